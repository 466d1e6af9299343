#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "chemcomm/dataset.hpp"
#include "chemcomm/framing.hpp"

namespace chemcomm::baseline {

struct BaselineParams {
  int bins = 2;
  int gamma = 1;  // 1-based index into the difference vector
  double train_ber = 0.0;
};

// d_gamma <= 0 means the pH fell: acid, bit 0.  gamma is 1-based.
int detect_bit(std::span<const double> d, int gamma);

// Labelled symbol windows ready for grid search.
struct LabelledWindows {
  std::vector<framing::SymbolWindow> windows;
  std::vector<std::uint8_t> bits;
};

// Exhaustive search over B in b_range and gamma in [1, B-1], minimizing
// training BER; ties prefer smaller B, then smaller gamma.
BaselineParams fit_grid(const LabelledWindows& train, std::span<const int> b_range);

// Per-interval fit over the train partition (the pooled variant fits one
// parameter pair across all intervals).
struct BaselineFit {
  std::map<double, BaselineParams> per_interval;
  std::optional<BaselineParams> pooled;

  const BaselineParams& params_for(double interval_ms) const;
};

BaselineFit fit_baseline(const channel::Dataset& ds, bool pooled,
                         const framing::SyncConfig& sync, int b_max = 30);

// Framing helper shared with evaluation: windows + ground-truth bits for all
// records of one split (Split::none selects every record).
LabelledWindows collect_windows(const channel::Dataset& ds, channel::Split split,
                                double interval_ms, const framing::SyncConfig& sync);

void save_baseline(const BaselineFit& fit, const std::filesystem::path& path);
BaselineFit load_baseline(const std::filesystem::path& path);

}  // namespace chemcomm::baseline
