#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chemcomm/adam.hpp"
#include "chemcomm/dataset.hpp"
#include "chemcomm/features.hpp"
#include "chemcomm/nn.hpp"

namespace chemcomm::train {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 10;
  int tau = 120;  // window length for sequence detectors; ignored otherwise
  std::uint64_t seed = 1;
  AdamConfig adam;
  bool finetune_trunk = false;  // cnn_lstm3: also update the conv trunk

  // Sequence-length sweeps run a lighter protocol.
  static TrainConfig sweep_defaults() {
    TrainConfig c;
    c.epochs = 50;
    c.batch_size = 32;
    return c;
  }
};

// Tags every record train/test.  Per interval, a seeded permutation sends
// round(fraction * n) records to train and the rest to test.
void split_dataset(channel::Dataset& ds, double train_fraction, std::uint64_t seed);

struct TrainResult {
  nn::Network net;
  std::vector<double> epoch_loss;  // mean per-symbol cross-entropy
};

// Minibatch Adam over the train partition.  Feedforward architectures train
// on independent symbols; sequence architectures on non-overlapping windows
// of tau symbols with state reset per window (a trailing remainder shorter
// than tau is dropped).  Deterministic given config.seed.
TrainResult train(nn::Network net, const channel::Dataset& ds, const TrainConfig& config);

}  // namespace chemcomm::train
