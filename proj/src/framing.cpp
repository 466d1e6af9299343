#include "chemcomm/framing.hpp"

#include <algorithm>
#include <cmath>

namespace chemcomm::framing {

SyncConfig SyncConfig::for_noise(double noise_std) {
  SyncConfig c;
  c.threshold_drop = std::clamp(10.0 * noise_std, 0.08, 0.25);
  return c;
}

std::size_t detect_sync(const channel::PhTrace& trace, const channel::ModulationScheme& scheme,
                        const SyncConfig& config) {
  const auto& ph = trace.samples;
  const int rate = trace.sample_rate_hz;
  const int w = std::max(2, static_cast<int>(std::lround(config.smooth_ms * rate / 1000.0)));
  const int sustain = std::max(
      1, static_cast<int>(std::lround(config.sustain_fraction * scheme.sync_pulse_ms * rate /
                                      1000.0)));
  const std::size_t min_len =
      channel::trace_sample_count(scheme.sync_total_ms(), rate) + 1;
  if (ph.size() < min_len) throw NoSyncFound();

  // Backward moving average; partial windows at the head.
  std::vector<double> smoothed(ph.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) {
    acc += ph[i];
    if (i >= static_cast<std::size_t>(w)) acc -= ph[i - w];
    smoothed[i] = acc / std::min<std::size_t>(i + 1, w);
  }

  // Earliest run of `sustain` consecutive drops below the threshold.
  std::size_t run_start = 0;
  int run_len = 0;
  bool found = false;
  for (std::size_t i = w; i < ph.size(); ++i) {
    if (smoothed[i] - smoothed[i - w] < -config.threshold_drop) {
      if (run_len == 0) run_start = i;
      if (++run_len >= sustain) {
        found = true;
        break;
      }
    } else {
      run_len = 0;
    }
  }
  if (!found) throw NoSyncFound();

  // The drop at run_start reflects decline inside (run_start - w, run_start];
  // the pulse onset is the last point where the smoothed trace was still at
  // its pre-drop maximum.
  const std::size_t lo = run_start >= static_cast<std::size_t>(2 * w) ? run_start - 2 * w : 0;
  std::size_t best = lo;
  for (std::size_t i = lo; i <= run_start; ++i)
    if (smoothed[i] >= smoothed[best]) best = i;
  return best;
}

std::vector<SymbolWindow> segment(const channel::PhTrace& trace, std::size_t sync_index,
                                  const channel::ModulationScheme& scheme, int count) {
  if (count < 0) throw std::invalid_argument("segment: negative count");
  const double rate = trace.sample_rate_hz;
  const double interval = scheme.symbol_interval_ms();
  auto boundary = [&](int k) {
    return sync_index + static_cast<std::size_t>(std::llround(
                            (scheme.sync_total_ms() + k * interval) * rate / 1000.0));
  };
  if (boundary(count) > trace.samples.size()) {
    int available = 0;
    while (available < count && boundary(available + 1) <= trace.samples.size()) ++available;
    throw TruncatedTrace(count, available);
  }
  std::vector<SymbolWindow> windows;
  windows.reserve(count);
  for (int k = 0; k < count; ++k) {
    const std::size_t lo = boundary(k), hi = boundary(k + 1);
    SymbolWindow win;
    win.interval_ms = interval;
    win.samples.assign(trace.samples.begin() + lo, trace.samples.begin() + hi);
    windows.push_back(std::move(win));
  }
  return windows;
}

BinVector bin_average(const SymbolWindow& window, int bins) {
  if (bins < 2) throw std::invalid_argument("bin_average: need at least 2 bins");
  const std::size_t n = window.samples.size();
  if (static_cast<std::size_t>(bins) > n) throw InsufficientSamples(bins, n);

  const std::size_t base = n / bins;
  const std::size_t remainder = n % bins;
  BinVector b;
  b.values.reserve(bins);
  std::size_t pos = 0;
  for (int i = 0; i < bins; ++i) {
    const std::size_t len = base + (static_cast<std::size_t>(i) < remainder ? 1 : 0);
    double sum = 0.0;
    for (std::size_t j = 0; j < len; ++j) sum += window.samples[pos + j];
    b.values.push_back(sum / len);
    pos += len;
  }
  return b;
}

std::vector<double> bin_diff(const BinVector& b) {
  if (b.size() < 2) throw std::invalid_argument("bin_diff: need at least 2 bins");
  std::vector<double> d(b.values.size() - 1);
  for (std::size_t i = 0; i + 1 < b.values.size(); ++i) d[i] = b.values[i + 1] - b.values[i];
  return d;
}

std::vector<double> extract_features(const BinVector& b, double interval_ms) {
  const auto d = bin_diff(b);
  std::vector<double> f;
  f.reserve(b.values.size() + 2);
  f.push_back(b.values.front());
  f.push_back(b.values.back());
  f.insert(f.end(), d.begin(), d.end());
  f.push_back(interval_ms / 500.0);
  return f;
}

}  // namespace chemcomm::framing
