#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chemcomm/baseline.hpp"
#include "chemcomm/dataset.hpp"
#include "chemcomm/model_io.hpp"
#include "chemcomm/trainer.hpp"

namespace chemcomm::eval {

// Hard decisions for one record: argmax of each per-symbol PMF, ties toward
// bit 0.  Sequence detectors run on non-overlapping windows of net.tau; a
// trailing remainder is evaluated as a shorter window so every symbol gets a
// decision.
std::vector<std::uint8_t> predict_record(const nn::Network& net,
                                         const channel::SequenceRecord& rec,
                                         const channel::ModulationScheme& scheme,
                                         const framing::SyncConfig& sync);

std::vector<std::uint8_t> predict_record(const baseline::BaselineParams& params,
                                         const channel::SequenceRecord& rec,
                                         const channel::ModulationScheme& scheme,
                                         const framing::SyncConfig& sync);

// Hamming distance over length; lengths must match.
double compute_ber(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

// One evaluated detector: either a network or a fitted baseline.
struct Detector {
  std::string name;
  const nn::Network* net = nullptr;
  const baseline::BaselineFit* fit = nullptr;
};

struct BerRow {
  std::string detector;
  double interval_ms = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t total_bits = 0;
  double ber = 0.0;
};

struct BerReport {
  std::vector<BerRow> rows;
  std::map<std::string, std::string> meta;

  double mean_ber(const std::string& detector) const;
};

// Every detector on the test partition of every interval, one row per
// (detector, interval) in the given orders.
BerReport report_table(std::span<const Detector> detectors, const channel::Dataset& ds,
                       const framing::SyncConfig& sync);

void write_report_text(const BerReport& report, const std::filesystem::path& path);
void write_report_json(const BerReport& report, const std::filesystem::path& path);

struct SweepRow {
  std::string arch;
  int length = 0;
  std::uint64_t seed = 0;
  double test_ber = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  // Mean test BER over seeds for one (arch, length).
  double mean_ber(const std::string& arch, int length) const;
};

// Trains one model per (arch, length, seed) with the given protocol and
// reports pooled test BER.  Lengths become the training window tau.
SweepResult sweep_seq_len(std::span<const std::string> archs, const channel::Dataset& ds,
                          std::span<const int> lengths, const train::TrainConfig& protocol,
                          std::span<const std::uint64_t> seeds);

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

// time/pH columns for one record plus '#'-prefixed sync and symbol-boundary
// marker lines for external plotting.
void dump_trace(const channel::Dataset& ds, std::uint64_t record_id,
                const std::filesystem::path& path, const framing::SyncConfig& sync);

// Rank correlation with average ranks for ties; 0 when either input has no
// rank variance.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace chemcomm::eval
