#include "chemcomm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chemcomm::train {

void split_dataset(channel::Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (ds.records.empty()) throw std::invalid_argument("split_dataset: empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_dataset: fraction must be in (0, 1)");

  num::Prng prng(seed, num::kStreamSplit);
  for (const auto& scheme : ds.schemes) {
    const double interval = scheme.symbol_interval_ms();
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < ds.records.size(); ++r)
      if (std::abs(ds.records[r].interval_ms - interval) < 1e-9) idx.push_back(r);
    if (idx.empty()) continue;
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    if (n_train == 0 || n_train == idx.size())
      throw std::invalid_argument("split_dataset: fraction leaves an empty partition");
    prng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      ds.records[idx[i]].split = i < n_train ? channel::Split::train : channel::Split::test;
  }
}

namespace {

struct Sample {
  std::vector<nn::Vec> steps;
  std::vector<int> targets;
};

std::vector<Sample> build_samples(const nn::Network& net, const channel::Dataset& ds,
                                  const TrainConfig& config,
                                  const framing::SyncConfig& sync) {
  std::vector<Sample> samples;
  for (const auto& rec : ds.records) {
    if (rec.split != channel::Split::train) continue;
    const auto& scheme = scheme_for(ds, rec.interval_ms);
    auto inputs = record_inputs(rec, scheme, net.input, sync);
    if (net.input.sequential) {
      const int tau = config.tau;
      if (tau < 1) throw std::invalid_argument("train: tau must be >= 1");
      const std::size_t n_windows = inputs.size() / static_cast<std::size_t>(tau);
      for (std::size_t w = 0; w < n_windows; ++w) {
        Sample s;
        s.steps.assign(inputs.begin() + w * tau, inputs.begin() + (w + 1) * tau);
        s.targets.reserve(tau);
        for (int k = 0; k < tau; ++k)
          s.targets.push_back(rec.bits[w * static_cast<std::size_t>(tau) + k]);
        samples.push_back(std::move(s));
      }
    } else {
      for (std::size_t k = 0; k < inputs.size(); ++k)
        samples.push_back({{std::move(inputs[k])}, {rec.bits[k]}});
    }
  }
  if (samples.empty()) throw std::invalid_argument("train: no training records in dataset");
  return samples;
}

}  // namespace

TrainResult train(nn::Network net, const channel::Dataset& ds, const TrainConfig& config) {
  if (config.epochs < 1 || config.batch_size < 1)
    throw std::invalid_argument("train: epochs and batch size must be positive");

  const auto sync = framing::SyncConfig::for_noise(ds.channel.noise_std);
  auto samples = build_samples(net, ds, config, sync);

  if (config.finetune_trunk) net.frozen_layers = 0;

  auto adam = make_adam_state(net, config.adam);
  auto grads = nn::make_gradients(net);
  nn::BackwardOptions opts;
  opts.include_frozen = false;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.epoch_loss.reserve(config.epochs);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Batch order is a pure function of (seed, epoch).
    num::Prng shuffle_rng(config.seed, num::kStreamShuffleBase + static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t symbols = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      nn::zero(grads);
      for (std::size_t b = start; b < stop; ++b) {
        const Sample& s = samples[order[b]];
        loss_sum += nn::backward(net, s.steps, s.targets, grads, opts);
        symbols += s.targets.size();
      }
      nn::scale(grads, 1.0 / static_cast<double>(stop - start));
      adam_step(net, grads, adam);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(symbols));
  }

  result.net = std::move(net);
  return result;
}

}  // namespace chemcomm::train
