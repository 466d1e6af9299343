#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chemcomm/channel.hpp"

namespace chemcomm::channel {

enum class Split : std::uint8_t { none, train, test };

struct SequenceRecord {
  std::uint64_t id = 0;
  std::vector<std::uint8_t> bits;
  double interval_ms = 0.0;
  PhTrace trace;
  Split split = Split::none;

  bool operator==(const SequenceRecord&) const = default;
};

struct Dataset {
  std::vector<ModulationScheme> schemes;
  ChannelModel channel;
  int n_sequences = 0;
  int seq_len = 0;
  std::uint64_t seed = 0;
  std::vector<SequenceRecord> records;

  bool operator==(const Dataset&) const = default;

  // Hex digest of the header fields; reports cite it so every number can be
  // traced back to the generating configuration.
  std::string id() const;
};

// n_sequences random bit sequences per scheme, each simulated on its own
// PRNG stream (stream id == global record index), so the whole dataset is a
// pure function of master_seed.
Dataset generate_dataset(std::span<const ModulationScheme> schemes, const ChannelModel& model,
                         int n_sequences, int seq_len, std::uint64_t master_seed);

// Expected trace length for a record: sync preamble plus (bits + 1) symbol
// intervals, sampled at scheme rate.
std::size_t expected_samples(const ModulationScheme& scheme, int seq_len);

struct DatasetFormatError : std::runtime_error {
  enum class Kind { io, malformed_header, unsupported_version, truncated_samples, record_invalid };
  Kind kind;
  DatasetFormatError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Line-oriented text format, lossless float round-trip; grammar in
// docs/file-formats.md.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

std::string split_name(Split s);
Split split_from_name(const std::string& name);

}  // namespace chemcomm::channel
