#pragma once

#include <vector>

#include "chemcomm/dataset.hpp"
#include "chemcomm/framing.hpp"
#include "chemcomm/nn.hpp"

namespace chemcomm::train {

const channel::ModulationScheme& scheme_for(const channel::Dataset& ds, double interval_ms);

// Receiver-side preprocessing for one record: synchronize, slice into symbol
// windows, bin, and emit one network input per transmitted symbol (either the
// feature layout or the raw bin vector, per the descriptor).
std::vector<nn::Vec> record_inputs(const channel::SequenceRecord& rec,
                                   const channel::ModulationScheme& scheme,
                                   const nn::InputDesc& desc,
                                   const framing::SyncConfig& sync);

}  // namespace chemcomm::train
