#include "chemcomm/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace chemcomm::train {

AdamState make_adam_state(const nn::Network& net, const AdamConfig& cfg) {
  AdamState s;
  s.cfg = cfg;
  const std::size_t n = nn::param_count(net);
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(nn::Network& net, const nn::Gradients& grads, AdamState& state) {
  // Count the tensors inside the frozen prefix so their slots are skipped.
  std::size_t frozen_tensors = 0;
  {
    std::vector<nn::Layer> prefix(net.layers.begin(), net.layers.begin() + net.frozen_layers);
    nn::for_each_tensor(prefix, [&](const num::Tensor&) { ++frozen_tensors; });
  }

  std::vector<const num::Tensor*> gtensors;
  nn::for_each_tensor(grads.layers, [&](const num::Tensor& t) { gtensors.push_back(&t); });

  state.t += 1;
  const auto& cfg = state.cfg;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  std::size_t tensor_idx = 0;
  std::size_t offset = 0;
  nn::for_each_tensor(net.layers, [&](num::Tensor& p) {
    const num::Tensor* g = gtensors.at(tensor_idx);
    if (!p.same_shape(*g)) throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (tensor_idx >= frozen_tensors) {
      for (std::size_t j = 0; j < p.numel(); ++j) {
        const double grad = g->data[j];
        double& m = state.m[offset + j];
        double& v = state.v[offset + j];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        p.data[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    }
    offset += p.numel();
    ++tensor_idx;
  });
  if (offset != state.m.size()) throw std::invalid_argument("adam_step: state size mismatch");
}

}  // namespace chemcomm::train
