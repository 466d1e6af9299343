#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "chemcomm/channel.hpp"

namespace chemcomm::framing {

struct SymbolWindow {
  std::vector<double> samples;
  double interval_ms = 0.0;
};

struct BinVector {
  std::vector<double> values;
  int size() const { return static_cast<int>(values.size()); }
};

struct NoSyncFound : std::runtime_error {
  NoSyncFound() : std::runtime_error("no synchronization pulse found in trace") {}
};

struct TruncatedTrace : std::runtime_error {
  int windows_available;
  TruncatedTrace(int requested, int available)
      : std::runtime_error("trace too short: requested " + std::to_string(requested) +
                           " windows, only " + std::to_string(available) + " available"),
        windows_available(available) {}
};

struct InsufficientSamples : std::runtime_error {
  InsufficientSamples(int bins, std::size_t samples)
      : std::runtime_error("bin count " + std::to_string(bins) + " exceeds window of " +
                           std::to_string(samples) + " samples") {}
};

// Sync detector tuning.  The pulse is declared found where a backward-smoothed
// pH drop stays below -threshold_drop for at least sustain_fraction of the
// pulse; the reported index is then refined to the last pre-drop maximum of
// the smoothed trace.
struct SyncConfig {
  double smooth_ms = 50.0;
  double threshold_drop = 0.10;     // pH decline per smooth window
  double sustain_fraction = 0.5;    // of sync_pulse_ms

  // Scale the threshold with the channel noise floor, clamped so the pulse
  // edge (roughly 0.4 pH per 50 ms at default amplitudes) stays detectable.
  static SyncConfig for_noise(double noise_std);
};

// Index of the first sample of the sync pulse.  Throws NoSyncFound.
std::size_t detect_sync(const channel::PhTrace& trace, const channel::ModulationScheme& scheme,
                        const SyncConfig& config = {});

// Window k covers [sync + sync_total + k*interval, ... + interval), boundaries
// rounded to the sample grid so adjacent windows tile exactly.
std::vector<SymbolWindow> segment(const channel::PhTrace& trace, std::size_t sync_index,
                                  const channel::ModulationScheme& scheme, int count);

// Mean pH of B contiguous runs covering the window; run lengths differ by at
// most one, longer runs first.
BinVector bin_average(const SymbolWindow& window, int bins);

// d[i] = b[i+1] - b[i]
std::vector<double> bin_diff(const BinVector& b);

// Detector input layout: [b_1, b_B, d_1..d_{B-1}, interval/500].
std::vector<double> extract_features(const BinVector& b, double interval_ms);

}  // namespace chemcomm::framing
