#include "chemcomm/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemcomm::nn {

double loss_symbol(int target, std::span<const double> pmf) {
  if (target < 0 || static_cast<std::size_t>(target) >= pmf.size())
    throw std::out_of_range("loss_symbol: target outside PMF support");
  return -std::log(std::max(pmf[target], 1e-12));
}

double loss_sequence(std::span<const int> targets, std::span<const std::vector<double>> pmfs) {
  if (targets.size() != pmfs.size())
    throw std::invalid_argument("loss_sequence: length mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) total += loss_symbol(targets[k], pmfs[k]);
  return total;
}

}  // namespace chemcomm::nn
