#pragma once

#include <span>
#include <vector>

namespace chemcomm::nn {

// Cross-entropy against a one-hot target: -log(pmf[target]); probabilities
// below 1e-12 are clamped so the loss stays finite.
double loss_symbol(int target, std::span<const double> pmf);

// Sequence loss: sum of the per-step symbol losses.
double loss_sequence(std::span<const int> targets,
                     std::span<const std::vector<double>> pmfs);

}  // namespace chemcomm::nn
