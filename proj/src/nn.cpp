#include "chemcomm/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemcomm::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

template <typename LayersT, typename Fn>
void visit_tensors(LayersT& layers, Fn&& fn) {
  for (auto& layer : layers) {
    switch (layer.kind) {
      case LayerKind::dense: {
        auto& p = std::get<DenseParams>(layer.params);
        fn(p.W);
        fn(p.b);
        break;
      }
      case LayerKind::conv1d: {
        auto& p = std::get<ConvParams>(layer.params);
        fn(p.filters);
        fn(p.bias);
        break;
      }
      case LayerKind::lstm: {
        auto& p = std::get<LstmCellParams>(layer.params);
        fn(p.Wyi), fn(p.Wai), fn(p.Wci), fn(p.bi);
        fn(p.Wyf), fn(p.Waf), fn(p.Wcf), fn(p.bf);
        fn(p.Wyc), fn(p.Wac), fn(p.bc);
        fn(p.Wyu), fn(p.Wau), fn(p.Wcu), fn(p.bu);
        break;
      }
      case LayerKind::bilstm: {
        auto& p = std::get<BilstmParams>(layer.params);
        for (auto* cell : {&p.fw, &p.bw}) {
          fn(cell->Wyi), fn(cell->Wai), fn(cell->Wci), fn(cell->bi);
          fn(cell->Wyf), fn(cell->Waf), fn(cell->Wcf), fn(cell->bf);
          fn(cell->Wyc), fn(cell->Wac), fn(cell->bc);
          fn(cell->Wyu), fn(cell->Wau), fn(cell->Wcu), fn(cell->bu);
        }
        break;
      }
      default:
        break;
    }
  }
}

// ---- LSTM cell ----

struct GateScratch {
  Vec si, sf, sg, su;
};

void cell_forward(const LstmCellParams& p, std::span<const double> y,
                  std::span<const double> a_prev, std::span<const double> c_prev, Vec& i, Vec& f,
                  Vec& g, Vec& u, Vec& c, Vec& a, Vec& tanhc, GateScratch& s) {
  const std::size_t h = p.hidden_size();
  check(y.size() == static_cast<std::size_t>(p.input_size()), "lstm: input width mismatch");
  s.si.assign(h, 0.0);
  s.sf.assign(h, 0.0);
  s.sg.assign(h, 0.0);
  s.su.assign(h, 0.0);

  num::matvec_acc(p.Wyi, y, s.si);
  num::matvec_acc(p.Wai, a_prev, s.si);
  num::matvec_acc(p.Wci, c_prev, s.si);
  num::matvec_acc(p.Wyf, y, s.sf);
  num::matvec_acc(p.Waf, a_prev, s.sf);
  num::matvec_acc(p.Wcf, c_prev, s.sf);
  num::matvec_acc(p.Wyc, y, s.sg);
  num::matvec_acc(p.Wac, a_prev, s.sg);

  i.resize(h), f.resize(h), g.resize(h), u.resize(h), c.resize(h), a.resize(h), tanhc.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    i[j] = sigmoid(s.si[j] + p.bi.data[j]);
    f[j] = sigmoid(s.sf[j] + p.bf.data[j]);
    g[j] = std::tanh(s.sg[j] + p.bc.data[j]);
    c[j] = f[j] * c_prev[j] + i[j] * g[j];
  }
  num::matvec_acc(p.Wyu, y, s.su);
  num::matvec_acc(p.Wau, a_prev, s.su);
  num::matvec_acc(p.Wcu, c, s.su);
  for (std::size_t j = 0; j < h; ++j) {
    u[j] = sigmoid(s.su[j] + p.bu.data[j]);
    tanhc[j] = std::tanh(c[j]);
    a[j] = u[j] * tanhc[j];
  }
}

// One BPTT step for the cell above.  `da` is the full gradient at a_k,
// `dc_in` the recurrent gradient at c_k from the following step.  Outputs the
// gradients handed to step k-1 and accumulates parameter gradients.
void cell_backward_step(const LstmCellParams& p, LstmCellParams& gp, std::span<const double> y,
                        std::span<const double> a_prev, std::span<const double> c_prev,
                        const StepCache& sc, bool reverse_dir, std::span<const double> da,
                        std::span<const double> dc_in, Vec& dy, Vec& da_prev, Vec& dc_prev) {
  const std::size_t h = p.hidden_size();
  const Vec& i = reverse_dir ? sc.ri : sc.i;
  const Vec& f = reverse_dir ? sc.rf : sc.f;
  const Vec& g = reverse_dir ? sc.rg : sc.g;
  const Vec& u = reverse_dir ? sc.ru : sc.u;
  const Vec& c = reverse_dir ? sc.rc : sc.c;
  const Vec& tanhc = reverse_dir ? sc.rtanhc : sc.tanhc;

  Vec dsu(h), dc(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double du = da[j] * tanhc[j];
    dsu[j] = du * u[j] * (1.0 - u[j]);
    dc[j] = da[j] * u[j] * (1.0 - tanhc[j] * tanhc[j]) + dc_in[j];
  }
  // The output gate taps c_k, so its pre-activation feeds back into dc.
  num::tmatvec_acc(p.Wcu, dsu, dc);

  Vec dsi(h), dsf(h), dsg(h);
  dc_prev.assign(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double di = dc[j] * g[j];
    const double df = dc[j] * c_prev[j];
    const double dg = dc[j] * i[j];
    dsi[j] = di * i[j] * (1.0 - i[j]);
    dsf[j] = df * f[j] * (1.0 - f[j]);
    dsg[j] = dg * (1.0 - g[j] * g[j]);
    dc_prev[j] = dc[j] * f[j];
  }

  num::outer_acc(dsu, y, gp.Wyu);
  num::outer_acc(dsu, a_prev, gp.Wau);
  num::outer_acc(dsu, c, gp.Wcu);
  num::outer_acc(dsi, y, gp.Wyi);
  num::outer_acc(dsi, a_prev, gp.Wai);
  num::outer_acc(dsi, c_prev, gp.Wci);
  num::outer_acc(dsf, y, gp.Wyf);
  num::outer_acc(dsf, a_prev, gp.Waf);
  num::outer_acc(dsf, c_prev, gp.Wcf);
  num::outer_acc(dsg, y, gp.Wyc);
  num::outer_acc(dsg, a_prev, gp.Wac);
  for (std::size_t j = 0; j < h; ++j) {
    gp.bu.data[j] += dsu[j];
    gp.bi.data[j] += dsi[j];
    gp.bf.data[j] += dsf[j];
    gp.bc.data[j] += dsg[j];
  }

  dy.assign(y.size(), 0.0);
  num::tmatvec_acc(p.Wyu, dsu, dy);
  num::tmatvec_acc(p.Wyi, dsi, dy);
  num::tmatvec_acc(p.Wyf, dsf, dy);
  num::tmatvec_acc(p.Wyc, dsg, dy);

  da_prev.assign(h, 0.0);
  num::tmatvec_acc(p.Wau, dsu, da_prev);
  num::tmatvec_acc(p.Wai, dsi, da_prev);
  num::tmatvec_acc(p.Waf, dsf, da_prev);
  num::tmatvec_acc(p.Wac, dsg, da_prev);

  num::tmatvec_acc(p.Wci, dsi, dc_prev);
  num::tmatvec_acc(p.Wcf, dsf, dc_prev);
}

}  // namespace

void for_each_tensor(std::vector<Layer>& layers, const std::function<void(num::Tensor&)>& fn) {
  visit_tensors(layers, fn);
}

void for_each_tensor(const std::vector<Layer>& layers,
                     const std::function<void(const num::Tensor&)>& fn) {
  visit_tensors(layers, fn);
}

Gradients make_gradients(const Network& net) {
  Gradients g;
  g.layers = net.layers;
  for_each_tensor(g.layers, [](num::Tensor& t) { t.fill(0.0); });
  return g;
}

void zero(Gradients& g) {
  for_each_tensor(g.layers, [](num::Tensor& t) { t.fill(0.0); });
}

void scale(Gradients& g, double factor) {
  for_each_tensor(g.layers, [factor](num::Tensor& t) {
    for (auto& v : t.data) v *= factor;
  });
}

void accumulate(Gradients& dst, const Gradients& src, double scale) {
  check(dst.layers.size() == src.layers.size(), "accumulate: layer count mismatch");
  std::vector<const num::Tensor*> from;
  for_each_tensor(src.layers, [&](const num::Tensor& t) { from.push_back(&t); });
  std::size_t idx = 0;
  for_each_tensor(dst.layers, [&](num::Tensor& t) { num::add_scaled(t, *from[idx++], scale); });
}

std::size_t param_count(const Network& net) {
  std::size_t n = 0;
  for_each_tensor(net.layers, [&](const num::Tensor& t) { n += t.numel(); });
  return n;
}

std::vector<double> flatten_params(const Network& net) {
  std::vector<double> flat;
  flat.reserve(param_count(net));
  for_each_tensor(net.layers, [&](const num::Tensor& t) {
    flat.insert(flat.end(), t.data.begin(), t.data.end());
  });
  return flat;
}

void unflatten_params(Network& net, std::span<const double> flat) {
  std::size_t pos = 0;
  for_each_tensor(net.layers, [&](num::Tensor& t) {
    check(pos + t.numel() <= flat.size(), "unflatten_params: vector too short");
    std::copy(flat.begin() + pos, flat.begin() + pos + t.numel(), t.data.begin());
    pos += t.numel();
  });
  check(pos == flat.size(), "unflatten_params: vector length mismatch");
}

std::vector<double> flatten_grads(const Gradients& g) {
  std::vector<double> flat;
  for_each_tensor(g.layers, [&](const num::Tensor& t) {
    flat.insert(flat.end(), t.data.begin(), t.data.end());
  });
  return flat;
}

Vec softmax(std::span<const double> z) {
  check(!z.empty(), "softmax: empty input");
  const double zmax = *std::max_element(z.begin(), z.end());
  Vec out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - zmax);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

Forward forward_sequence(const Network& net, std::span<const Vec> steps) {
  check(!steps.empty(), "forward: no steps");
  check(!net.layers.empty(), "forward: empty network");
  const std::size_t T = steps.size();

  Forward fw;
  fw.cache.resize(net.layers.size());
  for (auto& c : fw.cache) c.resize(T);
  fw.pmf.resize(T);

  std::vector<Vec> act(steps.begin(), steps.end());
  GateScratch scratch;

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    auto& caches = fw.cache[l];
    switch (layer.kind) {
      case LayerKind::dense: {
        const auto& p = std::get<DenseParams>(layer.params);
        for (std::size_t t = 0; t < T; ++t) {
          check(act[t].size() == p.W.cols(), "dense: input width mismatch");
          caches[t].in = std::move(act[t]);
          Vec pre(p.W.rows());
          num::matvec(p.W, caches[t].in, pre);
          for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += p.b.data[j];
          caches[t].pre = pre;
          if (p.act == Activation::relu)
            for (auto& v : pre) v = v > 0.0 ? v : 0.0;
          act[t] = std::move(pre);
        }
        break;
      }
      case LayerKind::conv1d: {
        const auto& p = std::get<ConvParams>(layer.params);
        const int ic = p.in_channels(), oc = p.out_channels(), k = p.kernel();
        const int pl = p.pad_left();
        for (std::size_t t = 0; t < T; ++t) {
          check(act[t].size() % ic == 0, "conv1d: input not divisible by channels");
          const int len = static_cast<int>(act[t].size()) / ic;
          caches[t].in = std::move(act[t]);
          const Vec& in = caches[t].in;
          Vec pre(static_cast<std::size_t>(oc) * len);
          for (int o = 0; o < oc; ++o) {
            for (int pos = 0; pos < len; ++pos) {
              double acc = p.bias.data[o];
              for (int c = 0; c < ic; ++c) {
                const double* f = &p.filters.data[(static_cast<std::size_t>(o) * ic + c) * k];
                const double* src = &in[static_cast<std::size_t>(c) * len];
                const int tlo = std::max(0, pl - pos);
                const int thi = std::min(k, len + pl - pos);
                for (int tt = tlo; tt < thi; ++tt) acc += f[tt] * src[pos + tt - pl];
              }
              pre[static_cast<std::size_t>(o) * len + pos] = acc;
            }
          }
          caches[t].pre = pre;
          for (auto& v : pre) v = v > 0.0 ? v : 0.0;
          act[t] = std::move(pre);
        }
        break;
      }
      case LayerKind::maxpool1d: {
        const auto& p = std::get<PoolParams>(layer.params);
        for (std::size_t t = 0; t < T; ++t) {
          check(act[t].size() % p.channels == 0, "maxpool: input not divisible by channels");
          const int len = static_cast<int>(act[t].size()) / p.channels;
          check(len >= p.pool, "maxpool: window shorter than pool size");
          const int out_len = len / p.pool;
          caches[t].in = std::move(act[t]);
          const Vec& in = caches[t].in;
          Vec out(static_cast<std::size_t>(p.channels) * out_len);
          caches[t].argmax.resize(out.size());
          for (int c = 0; c < p.channels; ++c) {
            for (int w = 0; w < out_len; ++w) {
              int best = c * len + w * p.pool;
              for (int j = 1; j < p.pool; ++j)
                if (in[c * len + w * p.pool + j] > in[best]) best = c * len + w * p.pool + j;
              out[static_cast<std::size_t>(c) * out_len + w] = in[best];
              caches[t].argmax[static_cast<std::size_t>(c) * out_len + w] = best;
            }
          }
          act[t] = std::move(out);
        }
        break;
      }
      case LayerKind::flatten:
        break;  // layout is already flat
      case LayerKind::lstm: {
        const auto& p = std::get<LstmCellParams>(layer.params);
        const std::size_t h = p.hidden_size();
        const Vec zeros(h, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          caches[t].in = std::move(act[t]);
          std::span<const double> a_prev = t == 0 ? std::span<const double>(zeros)
                                                  : std::span<const double>(caches[t - 1].a);
          std::span<const double> c_prev = t == 0 ? std::span<const double>(zeros)
                                                  : std::span<const double>(caches[t - 1].c);
          auto& sc = caches[t];
          cell_forward(p, sc.in, a_prev, c_prev, sc.i, sc.f, sc.g, sc.u, sc.c, sc.a, sc.tanhc,
                       scratch);
          act[t] = sc.a;
        }
        break;
      }
      case LayerKind::bilstm: {
        const auto& p = std::get<BilstmParams>(layer.params);
        const std::size_t h = p.fw.hidden_size();
        const Vec zeros(h, 0.0);
        for (std::size_t t = 0; t < T; ++t) caches[t].in = std::move(act[t]);
        for (std::size_t t = 0; t < T; ++t) {
          auto& sc = caches[t];
          std::span<const double> a_prev = t == 0 ? std::span<const double>(zeros)
                                                  : std::span<const double>(caches[t - 1].a);
          std::span<const double> c_prev = t == 0 ? std::span<const double>(zeros)
                                                  : std::span<const double>(caches[t - 1].c);
          cell_forward(p.fw, sc.in, a_prev, c_prev, sc.i, sc.f, sc.g, sc.u, sc.c, sc.a, sc.tanhc,
                       scratch);
        }
        for (std::size_t ti = T; ti-- > 0;) {
          auto& sc = caches[ti];
          std::span<const double> a_prev = ti + 1 == T ? std::span<const double>(zeros)
                                                       : std::span<const double>(caches[ti + 1].ra);
          std::span<const double> c_prev = ti + 1 == T ? std::span<const double>(zeros)
                                                       : std::span<const double>(caches[ti + 1].rc);
          cell_forward(p.bw, sc.in, a_prev, c_prev, sc.ri, sc.rf, sc.rg, sc.ru, sc.rc, sc.ra,
                       sc.rtanhc, scratch);
        }
        for (std::size_t t = 0; t < T; ++t) {
          Vec out;
          out.reserve(2 * h);
          out.insert(out.end(), caches[t].a.begin(), caches[t].a.end());
          out.insert(out.end(), caches[t].ra.begin(), caches[t].ra.end());
          act[t] = std::move(out);
        }
        break;
      }
      case LayerKind::softmax: {
        for (std::size_t t = 0; t < T; ++t) {
          caches[t].in = std::move(act[t]);
          fw.pmf[t] = softmax(caches[t].in);
          act[t] = fw.pmf[t];
        }
        break;
      }
    }
  }
  return fw;
}

Vec forward_symbol(const Network& net, const Vec& x) {
  const Vec steps[1] = {x};
  return forward_sequence(net, steps).pmf[0];
}

double backward(const Network& net, std::span<const Vec> steps, std::span<const int> targets,
                Gradients& grads, const BackwardOptions& opts) {
  check(steps.size() == targets.size(), "backward: step/target count mismatch");
  check(net.layers.back().kind == LayerKind::softmax, "backward: network must end in softmax");
  check(grads.layers.size() == net.layers.size(), "backward: gradient layout mismatch");

  Forward fw = forward_sequence(net, steps);
  const std::size_t T = steps.size();

  double loss = 0.0;
  std::vector<Vec> d(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& pmf = fw.pmf[t];
    const int target = targets[t];
    check(target >= 0 && static_cast<std::size_t>(target) < pmf.size(),
          "backward: target out of range");
    loss += -std::log(std::max(pmf[target], 1e-12));
    d[t] = pmf;
    d[t][target] -= 1.0;
  }

  const int stop = opts.include_frozen ? 0 : net.frozen_layers;
  for (int l = static_cast<int>(net.layers.size()) - 2; l >= stop; --l) {
    const Layer& layer = net.layers[l];
    Layer& glayer = grads.layers[l];
    auto& caches = fw.cache[l];
    const bool need_input_grad = l > stop;
    switch (layer.kind) {
      case LayerKind::dense: {
        const auto& p = std::get<DenseParams>(layer.params);
        auto& gp = std::get<DenseParams>(glayer.params);
        for (std::size_t t = 0; t < T; ++t) {
          Vec ds = std::move(d[t]);
          if (p.act == Activation::relu)
            for (std::size_t j = 0; j < ds.size(); ++j)
              if (caches[t].pre[j] <= 0.0) ds[j] = 0.0;
          num::outer_acc(ds, caches[t].in, gp.W);
          for (std::size_t j = 0; j < ds.size(); ++j) gp.b.data[j] += ds[j];
          if (need_input_grad) {
            d[t].assign(caches[t].in.size(), 0.0);
            num::tmatvec_acc(p.W, ds, d[t]);
          }
        }
        break;
      }
      case LayerKind::conv1d: {
        const auto& p = std::get<ConvParams>(layer.params);
        auto& gp = std::get<ConvParams>(glayer.params);
        const int ic = p.in_channels(), oc = p.out_channels(), k = p.kernel(), pl = p.pad_left();
        for (std::size_t t = 0; t < T; ++t) {
          const Vec& in = caches[t].in;
          const int len = static_cast<int>(in.size()) / ic;
          Vec ds = std::move(d[t]);
          for (std::size_t j = 0; j < ds.size(); ++j)
            if (caches[t].pre[j] <= 0.0) ds[j] = 0.0;
          if (need_input_grad) d[t].assign(in.size(), 0.0);
          for (int o = 0; o < oc; ++o) {
            const double* dso = &ds[static_cast<std::size_t>(o) * len];
            double row_sum = 0.0;
            for (int pos = 0; pos < len; ++pos) row_sum += dso[pos];
            gp.bias.data[o] += row_sum;
            for (int c = 0; c < ic; ++c) {
              double* gf = &gp.filters.data[(static_cast<std::size_t>(o) * ic + c) * k];
              const double* f = &p.filters.data[(static_cast<std::size_t>(o) * ic + c) * k];
              const double* src = &in[static_cast<std::size_t>(c) * len];
              for (int tt = 0; tt < k; ++tt) {
                const int lo = std::max(0, pl - tt);
                const int hi = std::min(len, len + pl - tt);
                double acc = 0.0;
                for (int pos = lo; pos < hi; ++pos) acc += dso[pos] * src[pos + tt - pl];
                gf[tt] += acc;
                if (need_input_grad) {
                  double* din = &d[t][static_cast<std::size_t>(c) * len];
                  for (int pos = lo; pos < hi; ++pos) din[pos + tt - pl] += dso[pos] * f[tt];
                }
              }
            }
          }
        }
        break;
      }
      case LayerKind::maxpool1d: {
        for (std::size_t t = 0; t < T; ++t) {
          Vec ds = std::move(d[t]);
          d[t].assign(caches[t].in.size(), 0.0);
          for (std::size_t j = 0; j < ds.size(); ++j) d[t][caches[t].argmax[j]] += ds[j];
        }
        break;
      }
      case LayerKind::flatten:
        break;
      case LayerKind::lstm: {
        const auto& p = std::get<LstmCellParams>(layer.params);
        auto& gp = std::get<LstmCellParams>(glayer.params);
        const std::size_t h = p.hidden_size();
        const Vec zeros(h, 0.0);
        Vec da_next(h, 0.0), dc_next(h, 0.0), da(h), dy, da_prev, dc_prev;
        for (std::size_t t = T; t-- > 0;) {
          for (std::size_t j = 0; j < h; ++j) da[j] = d[t][j] + da_next[j];
          std::span<const double> a_prev =
              t == 0 ? std::span<const double>(zeros) : std::span<const double>(caches[t - 1].a);
          std::span<const double> c_prev =
              t == 0 ? std::span<const double>(zeros) : std::span<const double>(caches[t - 1].c);
          cell_backward_step(p, gp, caches[t].in, a_prev, c_prev, caches[t], false, da, dc_next,
                             dy, da_prev, dc_prev);
          d[t] = std::move(dy);
          da_next = std::move(da_prev);
          dc_next = std::move(dc_prev);
        }
        break;
      }
      case LayerKind::bilstm: {
        const auto& p = std::get<BilstmParams>(layer.params);
        auto& gp = std::get<BilstmParams>(glayer.params);
        const std::size_t h = p.fw.hidden_size();
        const Vec zeros(h, 0.0);
        std::vector<Vec> dy_total(T);
        for (std::size_t t = 0; t < T; ++t) dy_total[t].assign(caches[t].in.size(), 0.0);

        Vec da_next(h, 0.0), dc_next(h, 0.0), da(h), dy, da_prev, dc_prev;
        for (std::size_t t = T; t-- > 0;) {
          for (std::size_t j = 0; j < h; ++j) da[j] = d[t][j] + da_next[j];
          std::span<const double> a_prev =
              t == 0 ? std::span<const double>(zeros) : std::span<const double>(caches[t - 1].a);
          std::span<const double> c_prev =
              t == 0 ? std::span<const double>(zeros) : std::span<const double>(caches[t - 1].c);
          cell_backward_step(p.fw, gp.fw, caches[t].in, a_prev, c_prev, caches[t], false, da,
                             dc_next, dy, da_prev, dc_prev);
          for (std::size_t j = 0; j < dy.size(); ++j) dy_total[t][j] += dy[j];
          da_next = std::move(da_prev);
          dc_next = std::move(dc_prev);
        }

        da_next.assign(h, 0.0);
        dc_next.assign(h, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t j = 0; j < h; ++j) da[j] = d[t][h + j] + da_next[j];
          std::span<const double> a_prev = t + 1 == T ? std::span<const double>(zeros)
                                                      : std::span<const double>(caches[t + 1].ra);
          std::span<const double> c_prev = t + 1 == T ? std::span<const double>(zeros)
                                                      : std::span<const double>(caches[t + 1].rc);
          cell_backward_step(p.bw, gp.bw, caches[t].in, a_prev, c_prev, caches[t], true, da,
                             dc_next, dy, da_prev, dc_prev);
          for (std::size_t j = 0; j < dy.size(); ++j) dy_total[t][j] += dy[j];
          da_next = std::move(da_prev);
          dc_next = std::move(dc_prev);
        }
        for (std::size_t t = 0; t < T; ++t) d[t] = std::move(dy_total[t]);
        break;
      }
      case LayerKind::softmax:
        throw std::logic_error("backward: softmax only supported as the final layer");
    }
  }
  return loss;
}

void glorot_fill(num::Tensor& t, std::size_t fan_in, std::size_t fan_out, num::Prng& prng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data) v = (2.0 * prng.next_uniform() - 1.0) * limit;
}

namespace {

DenseParams make_dense(int in, int out, Activation act, num::Prng& prng) {
  DenseParams p;
  p.W = num::Tensor::zeros({static_cast<std::size_t>(out), static_cast<std::size_t>(in)});
  p.b = num::Tensor::zeros({static_cast<std::size_t>(out)});
  p.act = act;
  glorot_fill(p.W, in, out, prng);
  return p;
}

ConvParams make_conv(int in_ch, int out_ch, int k, num::Prng& prng) {
  ConvParams p;
  p.filters = num::Tensor::zeros({static_cast<std::size_t>(out_ch),
                                  static_cast<std::size_t>(in_ch), static_cast<std::size_t>(k)});
  p.bias = num::Tensor::zeros({static_cast<std::size_t>(out_ch)});
  glorot_fill(p.filters, static_cast<std::size_t>(in_ch) * k, static_cast<std::size_t>(out_ch) * k,
              prng);
  return p;
}

LstmCellParams make_cell(int in, int hidden, num::Prng& prng) {
  const auto H = static_cast<std::size_t>(hidden), D = static_cast<std::size_t>(in);
  LstmCellParams p;
  auto mat = [&](std::size_t rows, std::size_t cols) {
    auto t = num::Tensor::zeros({rows, cols});
    glorot_fill(t, cols, rows, prng);
    return t;
  };
  p.Wyi = mat(H, D), p.Wai = mat(H, H), p.Wci = mat(H, H), p.bi = num::Tensor::zeros({H});
  p.Wyf = mat(H, D), p.Waf = mat(H, H), p.Wcf = mat(H, H), p.bf = num::Tensor::zeros({H});
  p.Wyc = mat(H, D), p.Wac = mat(H, H), p.bc = num::Tensor::zeros({H});
  p.Wyu = mat(H, D), p.Wau = mat(H, H), p.Wcu = mat(H, H), p.bu = num::Tensor::zeros({H});
  return p;
}

// conv(k0) conv(k1) pool conv(k2) conv(k3) pool flatten
std::vector<Layer> make_conv_trunk(int bins, int channels, std::span<const int> kernels,
                                   num::Prng& prng, int& flat_width) {
  check(kernels.size() == 4, "conv trunk expects four kernel sizes");
  std::vector<Layer> layers;
  layers.push_back({LayerKind::conv1d, make_conv(1, channels, kernels[0], prng)});
  layers.push_back({LayerKind::conv1d, make_conv(channels, channels, kernels[1], prng)});
  layers.push_back({LayerKind::maxpool1d, PoolParams{2, channels}});
  layers.push_back({LayerKind::conv1d, make_conv(channels, channels, kernels[2], prng)});
  layers.push_back({LayerKind::conv1d, make_conv(channels, channels, kernels[3], prng)});
  layers.push_back({LayerKind::maxpool1d, PoolParams{2, channels}});
  layers.push_back({LayerKind::flatten, FlattenParams{}});
  flat_width = channels * ((bins / 2) / 2);
  return layers;
}

}  // namespace

Network build_dense_net(int input_width, std::span<const int> hidden, int bins,
                        num::Prng& prng) {
  Network net;
  net.arch = "custom";
  net.input = {InputKind::feature_vector, bins, false};
  int w = input_width;
  for (int hsize : hidden) {
    net.layers.push_back({LayerKind::dense, make_dense(w, hsize, Activation::relu, prng)});
    w = hsize;
  }
  net.layers.push_back({LayerKind::dense, make_dense(w, 2, Activation::identity, prng)});
  net.layers.push_back({LayerKind::softmax, SoftmaxParams{}});
  return net;
}

Network build_cnn_net(int bins, int channels, std::span<const int> kernels, num::Prng& prng) {
  Network net;
  net.arch = "custom";
  net.input = {InputKind::bin_vector, bins, false};
  int flat_width = 0;
  net.layers = make_conv_trunk(bins, channels, kernels, prng, flat_width);
  net.layers.push_back({LayerKind::dense, make_dense(flat_width, 2, Activation::identity, prng)});
  net.layers.push_back({LayerKind::softmax, SoftmaxParams{}});
  return net;
}

Network build_lstm_net(const InputDesc& input, int hidden, int depth, bool bidirectional,
                       int tau, num::Prng& prng) {
  Network net;
  net.arch = "custom";
  net.input = input;
  net.input.sequential = true;
  net.tau = tau;
  int w = net.input.width();
  for (int l = 0; l < depth; ++l) {
    if (bidirectional) {
      BilstmParams p{make_cell(w, hidden, prng), make_cell(w, hidden, prng)};
      net.layers.push_back({LayerKind::bilstm, std::move(p)});
      w = 2 * hidden;
    } else {
      net.layers.push_back({LayerKind::lstm, make_cell(w, hidden, prng)});
      w = hidden;
    }
  }
  net.layers.push_back({LayerKind::dense, make_dense(w, 2, Activation::identity, prng)});
  net.layers.push_back({LayerKind::softmax, SoftmaxParams{}});
  return net;
}

Network build_cnn_lstm_net(int bins, int channels, std::span<const int> kernels, int hidden,
                           int depth, int tau, num::Prng& prng) {
  Network net;
  net.arch = "custom";
  net.input = {InputKind::bin_vector, bins, true};
  net.tau = tau;
  int flat_width = 0;
  net.layers = make_conv_trunk(bins, channels, kernels, prng, flat_width);
  net.frozen_layers = static_cast<int>(net.layers.size());
  int w = flat_width;
  for (int l = 0; l < depth; ++l) {
    net.layers.push_back({LayerKind::lstm, make_cell(w, hidden, prng)});
    w = hidden;
  }
  net.layers.push_back({LayerKind::dense, make_dense(w, 2, Activation::identity, prng)});
  net.layers.push_back({LayerKind::softmax, SoftmaxParams{}});
  return net;
}

bool known_architecture(const std::string& name) {
  return name == "dense" || name == "cnn" || name == "lstm3" || name == "cnn_lstm3" ||
         name == "bilstm3";
}

Network build_architecture(const std::string& name, num::Prng& prng) {
  constexpr int kKernels[4] = {2, 4, 6, 8};
  Network net;
  if (name == "dense") {
    constexpr int hidden[3] = {80, 80, 80};
    net = build_dense_net(11, hidden, 9, prng);
  } else if (name == "cnn") {
    net = build_cnn_net(30, 16, kKernels, prng);
  } else if (name == "lstm3") {
    net = build_lstm_net({InputKind::feature_vector, 8, true}, 40, 3, false, 120, prng);
  } else if (name == "bilstm3") {
    net = build_lstm_net({InputKind::feature_vector, 8, true}, 40, 3, true, 120, prng);
  } else if (name == "cnn_lstm3") {
    net = build_cnn_lstm_net(30, 16, kKernels, 40, 3, 120, prng);
  } else {
    throw std::invalid_argument("unknown architecture: " + name);
  }
  net.arch = name;
  return net;
}

void adopt_trunk(Network& cnn_lstm, const Network& trained_cnn) {
  check(cnn_lstm.frozen_layers > 0, "adopt_trunk: target has no trunk");
  check(static_cast<int>(trained_cnn.layers.size()) >= cnn_lstm.frozen_layers,
        "adopt_trunk: source too shallow");
  for (int l = 0; l < cnn_lstm.frozen_layers; ++l) {
    const Layer& src = trained_cnn.layers[l];
    Layer& dst = cnn_lstm.layers[l];
    check(src.kind == dst.kind, "adopt_trunk: trunk layer kinds differ");
    if (src.kind == LayerKind::conv1d) {
      const auto& sp = std::get<ConvParams>(src.params);
      auto& dp = std::get<ConvParams>(dst.params);
      check(sp.filters.same_shape(dp.filters), "adopt_trunk: filter shapes differ");
      dp = sp;
    }
  }
}

}  // namespace chemcomm::nn
