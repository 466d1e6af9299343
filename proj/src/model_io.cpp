#include "chemcomm/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace chemcomm::train {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'W', 'B', '-', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

using Kind = ModelIoError::Kind;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ModelIoError(Kind::io, "model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ModelIoError(Kind::io, "model file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string get_string(std::istream& in, std::size_t max_len = 1 << 20) {
  const auto len = get_u32(in);
  if (len > max_len) throw ModelIoError(Kind::bad_descriptor, "string field too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ModelIoError(Kind::io, "model file truncated");
  return s;
}

std::uint64_t fnv1a_bytes(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

nn::LstmCellParams zero_cell(std::uint32_t in, std::uint32_t hidden) {
  const std::size_t H = hidden, D = in;
  nn::LstmCellParams p;
  p.Wyi = num::Tensor::zeros({H, D}), p.Wai = num::Tensor::zeros({H, H});
  p.Wci = num::Tensor::zeros({H, H}), p.bi = num::Tensor::zeros({H});
  p.Wyf = num::Tensor::zeros({H, D}), p.Waf = num::Tensor::zeros({H, H});
  p.Wcf = num::Tensor::zeros({H, H}), p.bf = num::Tensor::zeros({H});
  p.Wyc = num::Tensor::zeros({H, D}), p.Wac = num::Tensor::zeros({H, H});
  p.bc = num::Tensor::zeros({H});
  p.Wyu = num::Tensor::zeros({H, D}), p.Wau = num::Tensor::zeros({H, H});
  p.Wcu = num::Tensor::zeros({H, H}), p.bu = num::Tensor::zeros({H});
  return p;
}

}  // namespace

void save_model(const nn::Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelIoError(Kind::io, "cannot open for writing: " + path.string());

  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_string(out, net.arch);
  put_u32(out, static_cast<std::uint32_t>(net.tau));
  put_u32(out, static_cast<std::uint32_t>(net.input.bins));
  put_u32(out, (net.input.kind == nn::InputKind::bin_vector ? 1u : 0u) |
                   (net.input.sequential ? 2u : 0u));
  put_u32(out, static_cast<std::uint32_t>(net.frozen_layers));

  std::ostringstream meta;
  for (const auto& [k, v] : net.meta) meta << k << "=" << v << "\n";
  put_string(out, meta.str());

  put_u32(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) {
    out.put(static_cast<char>(layer.kind));
    switch (layer.kind) {
      case nn::LayerKind::dense: {
        const auto& p = std::get<nn::DenseParams>(layer.params);
        out.put(static_cast<char>(p.act));
        put_u32(out, static_cast<std::uint32_t>(p.W.rows()));
        put_u32(out, static_cast<std::uint32_t>(p.W.cols()));
        break;
      }
      case nn::LayerKind::conv1d: {
        const auto& p = std::get<nn::ConvParams>(layer.params);
        put_u32(out, static_cast<std::uint32_t>(p.out_channels()));
        put_u32(out, static_cast<std::uint32_t>(p.in_channels()));
        put_u32(out, static_cast<std::uint32_t>(p.kernel()));
        break;
      }
      case nn::LayerKind::maxpool1d: {
        const auto& p = std::get<nn::PoolParams>(layer.params);
        put_u32(out, static_cast<std::uint32_t>(p.pool));
        put_u32(out, static_cast<std::uint32_t>(p.channels));
        break;
      }
      case nn::LayerKind::lstm: {
        const auto& p = std::get<nn::LstmCellParams>(layer.params);
        put_u32(out, static_cast<std::uint32_t>(p.input_size()));
        put_u32(out, static_cast<std::uint32_t>(p.hidden_size()));
        break;
      }
      case nn::LayerKind::bilstm: {
        const auto& p = std::get<nn::BilstmParams>(layer.params);
        put_u32(out, static_cast<std::uint32_t>(p.fw.input_size()));
        put_u32(out, static_cast<std::uint32_t>(p.fw.hidden_size()));
        break;
      }
      default:
        break;
    }
  }

  std::vector<unsigned char> payload;
  payload.reserve(nn::param_count(net) * 8);
  nn::for_each_tensor(net.layers, [&](const num::Tensor& t) {
    for (double v : t.data) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i)
        payload.push_back(static_cast<unsigned char>(bits >> (8 * i)));
    }
  });
  put_u64(out, static_cast<std::uint64_t>(payload.size() / 8));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  put_u64(out, fnv1a_bytes(payload.data(), payload.size()));
  if (!out) throw ModelIoError(Kind::io, "write failed: " + path.string());
}

nn::Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError(Kind::io, "cannot open for reading: " + path.string());

  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ModelIoError(Kind::bad_magic, "not a model file: " + path.string());
  const auto version = get_u32(in);
  if (version != kVersion)
    throw ModelIoError(Kind::unsupported_version,
                       "unsupported model version " + std::to_string(version));

  nn::Network net;
  net.arch = get_string(in);
  if (!nn::known_architecture(net.arch) && net.arch != "custom")
    throw ModelIoError(Kind::bad_descriptor, "unknown architecture name: " + net.arch);
  net.tau = static_cast<int>(get_u32(in));
  net.input.bins = static_cast<int>(get_u32(in));
  const auto flags = get_u32(in);
  net.input.kind = (flags & 1u) ? nn::InputKind::bin_vector : nn::InputKind::feature_vector;
  net.input.sequential = (flags & 2u) != 0;
  net.frozen_layers = static_cast<int>(get_u32(in));

  const std::string meta = get_string(in);
  std::istringstream ms(meta);
  std::string line;
  while (std::getline(ms, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) net.meta[line.substr(0, eq)] = line.substr(eq + 1);
  }

  const auto n_layers = get_u32(in);
  if (n_layers == 0 || n_layers > 1024)
    throw ModelIoError(Kind::bad_descriptor, "implausible layer count");
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const int kind_byte = in.get();
    if (kind_byte < 0) throw ModelIoError(Kind::io, "model file truncated");
    const auto kind = static_cast<nn::LayerKind>(kind_byte);
    nn::Layer layer;
    layer.kind = kind;
    switch (kind) {
      case nn::LayerKind::dense: {
        const int act_byte = in.get();
        if (act_byte != 0 && act_byte != 1)
          throw ModelIoError(Kind::bad_descriptor, "unknown activation code");
        const auto rows = get_u32(in), cols = get_u32(in);
        if (rows == 0 || cols == 0)
          throw ModelIoError(Kind::shape, "dense layer with zero dimension");
        nn::DenseParams p;
        p.W = num::Tensor::zeros({rows, cols});
        p.b = num::Tensor::zeros({rows});
        p.act = static_cast<nn::Activation>(act_byte);
        layer.params = std::move(p);
        break;
      }
      case nn::LayerKind::conv1d: {
        const auto oc = get_u32(in), ic = get_u32(in), k = get_u32(in);
        if (oc == 0 || ic == 0 || k == 0)
          throw ModelIoError(Kind::shape, "conv layer with zero dimension");
        nn::ConvParams p;
        p.filters = num::Tensor::zeros({oc, ic, k});
        p.bias = num::Tensor::zeros({oc});
        layer.params = std::move(p);
        break;
      }
      case nn::LayerKind::maxpool1d: {
        const auto pool = get_u32(in), channels = get_u32(in);
        if (pool == 0 || channels == 0)
          throw ModelIoError(Kind::shape, "pool layer with zero dimension");
        layer.params = nn::PoolParams{static_cast<int>(pool), static_cast<int>(channels)};
        break;
      }
      case nn::LayerKind::flatten:
        layer.params = nn::FlattenParams{};
        break;
      case nn::LayerKind::softmax:
        layer.params = nn::SoftmaxParams{};
        break;
      case nn::LayerKind::lstm: {
        const auto inw = get_u32(in), hidden = get_u32(in);
        if (inw == 0 || hidden == 0)
          throw ModelIoError(Kind::shape, "lstm layer with zero dimension");
        layer.params = zero_cell(inw, hidden);
        break;
      }
      case nn::LayerKind::bilstm: {
        const auto inw = get_u32(in), hidden = get_u32(in);
        if (inw == 0 || hidden == 0)
          throw ModelIoError(Kind::shape, "bilstm layer with zero dimension");
        layer.params = nn::BilstmParams{zero_cell(inw, hidden), zero_cell(inw, hidden)};
        break;
      }
      default:
        throw ModelIoError(Kind::bad_descriptor,
                           "unknown layer kind " + std::to_string(kind_byte));
    }
    net.layers.push_back(std::move(layer));
  }
  if (net.frozen_layers < 0 || net.frozen_layers >= static_cast<int>(net.layers.size()))
    throw ModelIoError(Kind::bad_descriptor, "frozen prefix out of range");

  const auto n_doubles = get_u64(in);
  if (n_doubles != nn::param_count(net))
    throw ModelIoError(Kind::shape, "parameter payload does not match the layer table");
  std::vector<unsigned char> payload(n_doubles * 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!in) throw ModelIoError(Kind::io, "model file truncated in payload");
  const auto stored_sum = get_u64(in);
  const auto actual_sum = fnv1a_bytes(payload.data(), payload.size());
  if (stored_sum != actual_sum)
    throw ModelIoError(Kind::checksum, "payload checksum mismatch");

  std::size_t pos = 0;
  nn::for_each_tensor(net.layers, [&](num::Tensor& t) {
    for (auto& v : t.data) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(payload[pos + i]) << (8 * i);
      v = std::bit_cast<double>(bits);
      pos += 8;
    }
  });
  return net;
}

}  // namespace chemcomm::train
