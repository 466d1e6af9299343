#include "chemcomm/features.hpp"

#include <cmath>
#include <stdexcept>

namespace chemcomm::train {

const channel::ModulationScheme& scheme_for(const channel::Dataset& ds, double interval_ms) {
  for (const auto& s : ds.schemes)
    if (std::abs(s.symbol_interval_ms() - interval_ms) < 1e-9) return s;
  throw std::invalid_argument("scheme_for: interval not present in dataset");
}

std::vector<nn::Vec> record_inputs(const channel::SequenceRecord& rec,
                                   const channel::ModulationScheme& scheme,
                                   const nn::InputDesc& desc,
                                   const framing::SyncConfig& sync) {
  const auto sync_idx = framing::detect_sync(rec.trace, scheme, sync);
  const auto windows =
      framing::segment(rec.trace, sync_idx, scheme, static_cast<int>(rec.bits.size()));
  std::vector<nn::Vec> inputs;
  inputs.reserve(windows.size());
  for (const auto& win : windows) {
    const auto b = framing::bin_average(win, desc.bins);
    if (desc.kind == nn::InputKind::feature_vector)
      inputs.push_back(framing::extract_features(b, rec.interval_ms));
    else
      inputs.push_back(b.values);
  }
  return inputs;
}

}  // namespace chemcomm::train
