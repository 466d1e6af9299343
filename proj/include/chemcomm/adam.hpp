#pragma once

#include <cstdint>
#include <vector>

#include "chemcomm/nn.hpp"

namespace chemcomm::train {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators, flat over the network's parameter order.
struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;
  AdamConfig cfg;
};

AdamState make_adam_state(const nn::Network& net, const AdamConfig& cfg = {});

// One bias-corrected Adam update:
//   m <- b1 m + (1-b1) g        m_hat = m / (1 - b1^t)
//   v <- b2 v + (1-b2) g^2      v_hat = v / (1 - b2^t)
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Tensors inside the network's frozen prefix are left untouched.
void adam_step(nn::Network& net, const nn::Gradients& grads, AdamState& state);

}  // namespace chemcomm::train
