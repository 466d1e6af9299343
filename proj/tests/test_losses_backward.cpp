#include <cmath>

#include "chemcomm/gradcheck.hpp"
#include "chemcomm/losses.hpp"
#include "chemcomm/nn.hpp"
#include "doctest.h"

using namespace chemcomm;
using namespace chemcomm::nn;

namespace {

Vec random_vec(std::size_t n, num::Prng& rng, double scale = 1.0) {
  Vec v(n);
  for (auto& x : v) x = rng.next_gaussian(0.0, scale);
  return v;
}

Vec random_pmf(std::size_t n, num::Prng& rng) {
  Vec v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = 0.05 + rng.next_uniform();
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

// Shake every parameter (biases included) off exact zero: a conv position
// whose receptive field is fully ReLU-clamped otherwise sits exactly on the
// kink, where one-sided derivatives differ and a difference quotient is
// meaningless.
void perturb_params(Network& net, num::Prng& rng, double amp = 0.05) {
  for_each_tensor(net.layers, [&](num::Tensor& t) {
    for (auto& v : t.data) v += (2.0 * rng.next_uniform() - 1.0) * amp;
  });
}

// Max relative error between backpropagation and the central-difference
// oracle over every parameter of the network.
double gradcheck(Network& net, const std::vector<Vec>& steps, const std::vector<int>& targets,
                 double h = 1e-5) {
  Gradients grads = make_gradients(net);
  BackwardOptions opts;
  opts.include_frozen = true;
  backward(net, steps, targets, grads, opts);
  const auto analytic = flatten_grads(grads);

  const auto base = flatten_params(net);
  auto f = [&](std::span<const double> flat) {
    unflatten_params(net, flat);
    double loss = 0.0;
    auto fw = forward_sequence(net, steps);
    for (std::size_t t = 0; t < targets.size(); ++t)
      loss += loss_symbol(targets[t], fw.pmf[t]);
    return loss;
  };
  const auto numeric = num::finite_diff_gradient(f, base, h);
  unflatten_params(net, base);
  return num::max_relative_error(analytic, numeric, 1e-6);
}

}  // namespace

TEST_CASE("symbol loss basics") {
  CHECK(loss_symbol(0, Vec{1.0, 0.0}) == 0.0);
  CHECK(loss_symbol(0, Vec{0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(loss_symbol(1, Vec{0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // zero probability is clamped, not infinite
  CHECK(loss_symbol(0, Vec{0.0, 1.0}) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS((void)loss_symbol(2, Vec{0.5, 0.5}), std::out_of_range);
}

TEST_CASE("sequence loss is additive") {
  num::Prng rng(31, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pmf = random_pmf(2, rng);
    const int target = static_cast<int>(rng.next_below(2));
    const int tau = 1 + static_cast<int>(rng.next_below(6));
    std::vector<Vec> pmfs(tau, pmf);
    std::vector<int> targets(tau, target);
    CHECK(loss_sequence(targets, pmfs) ==
          doctest::Approx(tau * loss_symbol(target, pmf)).epsilon(1e-12));
  }
}

TEST_CASE("cross-entropy equals KL divergence for one-hot targets") {
  num::Prng rng(32, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pmf = random_pmf(2 + rng.next_below(4), rng);
    const auto target = static_cast<int>(rng.next_below(pmf.size()));
    // KL(x || x_hat) with one-hot x: terms with x_i = 0 vanish
    const double kl = std::log(1.0 / pmf[target]);
    CHECK(loss_symbol(target, pmf) == doctest::Approx(kl).epsilon(1e-12));
  }
}

TEST_CASE("softmax cross-entropy head propagates pmf minus onehot") {
  // identity dense into softmax: dW row structure exposes the head gradient
  Network net;
  DenseParams p;
  p.W = num::Tensor({2, 2}, {1, 0, 0, 1});
  p.b = num::Tensor::zeros({2});
  p.act = Activation::identity;
  net.layers.push_back({LayerKind::dense, p});
  net.layers.push_back({LayerKind::softmax, SoftmaxParams{}});

  const std::vector<Vec> steps{{0.4, -1.1}};
  const std::vector<int> targets{1};
  Gradients grads = make_gradients(net);
  const double loss = backward(net, steps, targets, grads);

  const auto pmf = softmax(steps[0]);
  CHECK(loss == doctest::Approx(-std::log(pmf[1])).epsilon(1e-12));
  const auto& gp = std::get<DenseParams>(grads.layers[0].params);
  const Vec expected_ds{pmf[0] - 0.0, pmf[1] - 1.0};
  for (int i = 0; i < 2; ++i) {
    CHECK(gp.b.data[i] == doctest::Approx(expected_ds[i]).epsilon(1e-12));
    for (int j = 0; j < 2; ++j)
      CHECK(gp.W.at(i, j) == doctest::Approx(expected_ds[i] * steps[0][j]).epsilon(1e-12));
  }
}

TEST_CASE("saturated correct prediction has a vanishing gradient") {
  Network net;
  DenseParams p;
  p.W = num::Tensor({2, 2}, {40.0, 0.0, -40.0, 0.0});
  p.b = num::Tensor::zeros({2});
  p.act = Activation::identity;
  net.layers.push_back({LayerKind::dense, p});
  net.layers.push_back({LayerKind::softmax, SoftmaxParams{}});

  const std::vector<Vec> steps{{1.0, 0.0}};
  const std::vector<int> targets{0};
  Gradients grads = make_gradients(net);
  const double loss = backward(net, steps, targets, grads);
  CHECK(loss < 1e-6);
  double norm = 0.0;
  for (double g : flatten_grads(grads)) norm += g * g;
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("gradient check: dense stack") {
  num::Prng rng(41, num::kStreamWeightInit);
  const int hidden[] = {6, 6, 6};
  auto net = build_dense_net(5, hidden, 3, rng);
  perturb_params(net, rng);
  num::Prng rx(42, 0);
  const std::vector<Vec> steps{random_vec(5, rx)};
  const std::vector<int> targets{1};
  CHECK(gradcheck(net, steps, targets) < 1e-4);
}

TEST_CASE("gradient check: conv stack") {
  num::Prng rng(43, num::kStreamWeightInit);
  const int kernels[] = {2, 4, 6, 8};
  auto net = build_cnn_net(16, 2, kernels, rng);
  perturb_params(net, rng);
  num::Prng rx(44, 0);
  const std::vector<Vec> steps{random_vec(16, rx)};
  const std::vector<int> targets{0};
  CHECK(gradcheck(net, steps, targets) < 1e-4);
}

TEST_CASE("gradient check: lstm stack over a window") {
  num::Prng rng(45, num::kStreamWeightInit);
  auto net = build_lstm_net({InputKind::feature_vector, 1, true}, 3, 3, false, 4, rng);
  perturb_params(net, rng);
  num::Prng rx(46, 0);
  std::vector<Vec> steps;
  std::vector<int> targets;
  for (int t = 0; t < 4; ++t) {
    steps.push_back(random_vec(3, rx));
    targets.push_back(static_cast<int>(rx.next_below(2)));
  }
  CHECK(gradcheck(net, steps, targets) < 1e-4);
}

TEST_CASE("gradient check: bilstm stack over a window") {
  num::Prng rng(47, num::kStreamWeightInit);
  auto net = build_lstm_net({InputKind::feature_vector, 1, true}, 3, 3, true, 4, rng);
  perturb_params(net, rng);
  num::Prng rx(48, 0);
  std::vector<Vec> steps;
  std::vector<int> targets;
  for (int t = 0; t < 4; ++t) {
    steps.push_back(random_vec(3, rx));
    targets.push_back(static_cast<int>(rx.next_below(2)));
  }
  CHECK(gradcheck(net, steps, targets) < 1e-4);
}

TEST_CASE("gradient check: conv trunk feeding an lstm stack") {
  num::Prng rng(49, num::kStreamWeightInit);
  const int kernels[] = {2, 4, 6, 8};
  auto net = build_cnn_lstm_net(12, 2, kernels, 3, 3, 3, rng);
  perturb_params(net, rng);
  num::Prng rx(50, 0);
  std::vector<Vec> steps;
  std::vector<int> targets;
  for (int t = 0; t < 3; ++t) {
    steps.push_back(random_vec(12, rx));
    targets.push_back(static_cast<int>(rx.next_below(2)));
  }
  CHECK(gradcheck(net, steps, targets) < 1e-4);
}

TEST_CASE("frozen trunk keeps its gradients at zero unless requested") {
  num::Prng rng(51, num::kStreamWeightInit);
  const int kernels[] = {2, 4, 6, 8};
  auto net = build_cnn_lstm_net(12, 2, kernels, 3, 2, 2, rng);
  num::Prng rx(52, 0);
  std::vector<Vec> steps{random_vec(12, rx), random_vec(12, rx)};
  std::vector<int> targets{0, 1};

  Gradients grads = make_gradients(net);
  backward(net, steps, targets, grads);
  double trunk_norm = 0.0, upper_norm = 0.0;
  for (int l = 0; l < static_cast<int>(grads.layers.size()); ++l) {
    std::vector<Layer> single{grads.layers[l]};
    for_each_tensor(single, [&](const num::Tensor& t) {
      for (double v : t.data) (l < net.frozen_layers ? trunk_norm : upper_norm) += v * v;
    });
  }
  CHECK(trunk_norm == 0.0);
  CHECK(upper_norm > 0.0);
}
