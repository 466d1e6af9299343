#include "chemcomm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chemcomm::num {

std::vector<double> finite_diff_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = f(probe);
    probe[i] = orig - h;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::domain_error("finite_diff_gradient: non-finite evaluation at coordinate " +
                              std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace chemcomm::num
