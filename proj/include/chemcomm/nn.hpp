#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chemcomm/prng.hpp"
#include "chemcomm/tensor.hpp"

namespace chemcomm::nn {

using Vec = std::vector<double>;

enum class Activation : std::uint8_t { identity, relu };
enum class LayerKind : std::uint8_t { dense, conv1d, maxpool1d, flatten, lstm, bilstm, softmax };

struct DenseParams {
  num::Tensor W;  // [out, in]
  num::Tensor b;  // [out]
  Activation act = Activation::identity;
};

// 1-D cross-correlation, stride 1, "same" zero padding (left floor((k-1)/2),
// right ceil((k-1)/2)), ReLU.
struct ConvParams {
  num::Tensor filters;  // [out_ch, in_ch, k]
  num::Tensor bias;     // [out_ch]
  int out_channels() const { return static_cast<int>(filters.shape[0]); }
  int in_channels() const { return static_cast<int>(filters.shape[1]); }
  int kernel() const { return static_cast<int>(filters.shape[2]); }
  int pad_left() const { return (kernel() - 1) / 2; }
};

// Non-overlapping max windows per channel; a trailing remainder shorter than
// `pool` is dropped.
struct PoolParams {
  int pool = 2;
  int channels = 1;
};

struct FlattenParams {};
struct SoftmaxParams {};

// Gate recurrences, sigma the logistic function, (x) elementwise product:
//   i_k = sigma(Wyi y_k + Wai a_{k-1} + Wci c_{k-1} + bi)
//   f_k = sigma(Wyf y_k + Waf a_{k-1} + Wcf c_{k-1} + bf)
//   c_k = f_k (x) c_{k-1} + i_k (x) tanh(Wyc y_k + Wac a_{k-1} + bc)
//   u_k = sigma(Wyu y_k + Wau a_{k-1} + Wcu c_k + bu)
//   a_k = u_k (x) tanh(c_k)
// Note the cell-state taps Wci/Wcf/Wcu are full matrices, and the output
// gate taps the updated c_k.
struct LstmCellParams {
  num::Tensor Wyi, Wai, Wci, bi;
  num::Tensor Wyf, Waf, Wcf, bf;
  num::Tensor Wyc, Wac, bc;
  num::Tensor Wyu, Wau, Wcu, bu;

  int input_size() const { return static_cast<int>(Wyi.cols()); }
  int hidden_size() const { return static_cast<int>(Wyi.rows()); }
};

// Forward and reverse cells; the layer output at step k is the concatenation
// [a_fw[k], a_bw[k]] of the two passes.
struct BilstmParams {
  LstmCellParams fw, bw;
};

struct Layer {
  LayerKind kind;
  std::variant<DenseParams, ConvParams, PoolParams, FlattenParams, LstmCellParams, BilstmParams,
               SoftmaxParams>
      params;
};

enum class InputKind : std::uint8_t { feature_vector, bin_vector };

struct InputDesc {
  InputKind kind = InputKind::feature_vector;
  int bins = 8;
  bool sequential = false;

  // feature vectors carry [b_1, b_B, d..., duration] = bins + 2 entries
  int width() const { return kind == InputKind::feature_vector ? bins + 2 : bins; }
};

struct Network {
  std::string arch;  // dense | cnn | lstm3 | cnn_lstm3 | bilstm3 | custom
  InputDesc input;
  std::vector<Layer> layers;
  int frozen_layers = 0;  // leading layers excluded from parameter updates
  int tau = 1;            // training window length for sequence detectors
  std::map<std::string, std::string> meta;  // provenance (seeds, protocol)
};

// Same layer/tensor structure as the network, zero-valued.
struct Gradients {
  std::vector<Layer> layers;
};

Gradients make_gradients(const Network& net);
void zero(Gradients& g);
void scale(Gradients& g, double factor);
void accumulate(Gradients& dst, const Gradients& src, double scale = 1.0);

// Visits every parameter tensor in a fixed, documented order (layer order;
// within a layer, declaration order).  The order defines the flattened
// parameter vector used by the optimizer, serialization and gradient checks.
void for_each_tensor(std::vector<Layer>& layers,
                     const std::function<void(num::Tensor&)>& fn);
void for_each_tensor(const std::vector<Layer>& layers,
                     const std::function<void(const num::Tensor&)>& fn);
std::size_t param_count(const Network& net);
std::vector<double> flatten_params(const Network& net);
void unflatten_params(Network& net, std::span<const double> flat);
std::vector<double> flatten_grads(const Gradients& g);

// phi_i = exp(z_i - max z) / sum_j exp(z_j - max z)
Vec softmax(std::span<const double> z);

struct StepCache {
  Vec in;
  Vec pre;                   // dense/conv pre-activation
  std::vector<int> argmax;   // pool winners
  Vec i, f, g, u, c, a, tanhc;
  Vec ri, rf, rg, ru, rc, ra, rtanhc;  // reverse direction (bilstm)
};

struct Forward {
  std::vector<std::vector<StepCache>> cache;  // [layer][step]
  std::vector<Vec> pmf;                       // [step]
};

// Unrolls the network over the step inputs; feedforward architectures are the
// single-step case.  Output k of a causal (lstm) stack depends only on steps
// 1..k; a bilstm stack sees the whole window.
Forward forward_sequence(const Network& net, std::span<const Vec> steps);
Vec forward_symbol(const Network& net, const Vec& x);

struct BackwardOptions {
  bool include_frozen = false;  // also differentiate the frozen prefix
};

// Cross-entropy loss summed over steps plus parameter gradients (accumulated
// into `grads`).  Gradients of a frozen prefix are skipped unless requested.
double backward(const Network& net, std::span<const Vec> steps, std::span<const int> targets,
                Gradients& grads, const BackwardOptions& opts = {});

// Weight initialization: uniform in +-sqrt(6 / (fan_in + fan_out)) per
// matrix, zero biases.
void glorot_fill(num::Tensor& t, std::size_t fan_in, std::size_t fan_out, num::Prng& prng);

// Configurable builders (paper-scale nets use build_architecture below).
Network build_dense_net(int input_width, std::span<const int> hidden, int bins,
                        num::Prng& prng);
Network build_cnn_net(int bins, int channels, std::span<const int> kernels, num::Prng& prng);
Network build_lstm_net(const InputDesc& input, int hidden, int depth, bool bidirectional,
                       int tau, num::Prng& prng);
Network build_cnn_lstm_net(int bins, int channels, std::span<const int> kernels, int hidden,
                           int depth, int tau, num::Prng& prng);

// The five named detectors; sizes fixed by the workbench defaults.
Network build_architecture(const std::string& name, num::Prng& prng);
bool known_architecture(const std::string& name);

// Copies the convolutional trunk of a trained "cnn" network into a
// "cnn_lstm3" network (layers up to and including flatten).
void adopt_trunk(Network& cnn_lstm, const Network& trained_cnn);

}  // namespace chemcomm::nn
