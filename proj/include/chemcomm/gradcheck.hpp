#pragma once

#include <functional>
#include <span>
#include <vector>

namespace chemcomm::num {

// Central-difference gradient of a scalar function, one coordinate at a time:
// g_i = (f(x + h e_i) - f(x - h e_i)) / (2h).  Error decays as O(h^2).
// Throws std::domain_error if f evaluates to a non-finite value.
std::vector<double> finite_diff_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor); the usual gradient-check metric.
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-8);

}  // namespace chemcomm::num
