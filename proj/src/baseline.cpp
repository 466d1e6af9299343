#include "chemcomm/baseline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace chemcomm::baseline {

int detect_bit(std::span<const double> d, int gamma) {
  if (gamma < 1 || static_cast<std::size_t>(gamma) > d.size())
    throw std::out_of_range("detect_bit: gamma out of range");
  return d[gamma - 1] <= 0.0 ? 0 : 1;
}

BaselineParams fit_grid(const LabelledWindows& train, std::span<const int> b_range) {
  if (train.windows.empty()) throw std::invalid_argument("fit_grid: empty training set");
  if (train.windows.size() != train.bits.size())
    throw std::invalid_argument("fit_grid: window/bit count mismatch");

  std::size_t min_samples = train.windows.front().samples.size();
  for (const auto& w : train.windows) min_samples = std::min(min_samples, w.samples.size());

  bool any = false;
  BaselineParams best;
  std::size_t best_errors = 0;
  for (int bins : b_range) {
    if (bins < 2 || static_cast<std::size_t>(bins) > min_samples)
      throw std::invalid_argument("fit_grid: bin count " + std::to_string(bins) +
                                  " infeasible for the training windows");
    // One binning pass per B; every gamma shares the difference vectors.
    std::vector<std::size_t> errors(bins - 1, 0);
    for (std::size_t i = 0; i < train.windows.size(); ++i) {
      const auto d = framing::bin_diff(framing::bin_average(train.windows[i], bins));
      for (int gamma = 1; gamma <= bins - 1; ++gamma)
        if (detect_bit(d, gamma) != train.bits[i]) ++errors[gamma - 1];
    }
    for (int gamma = 1; gamma <= bins - 1; ++gamma) {
      const std::size_t e = errors[gamma - 1];
      if (!any || e < best_errors) {
        any = true;
        best_errors = e;
        best = {bins, gamma,
                static_cast<double>(e) / static_cast<double>(train.windows.size())};
      }
    }
  }
  if (!any) throw std::invalid_argument("fit_grid: empty bin range");
  return best;
}

LabelledWindows collect_windows(const channel::Dataset& ds, channel::Split split,
                                double interval_ms, const framing::SyncConfig& sync) {
  LabelledWindows out;
  for (const auto& rec : ds.records) {
    if (split != channel::Split::none && rec.split != split) continue;
    if (interval_ms > 0 && std::abs(rec.interval_ms - interval_ms) > 1e-9) continue;
    const auto* scheme = [&]() -> const channel::ModulationScheme* {
      for (const auto& s : ds.schemes)
        if (std::abs(s.symbol_interval_ms() - rec.interval_ms) < 1e-9) return &s;
      return nullptr;
    }();
    if (!scheme) throw std::invalid_argument("collect_windows: record interval not in dataset");
    const auto sync_idx = framing::detect_sync(rec.trace, *scheme, sync);
    auto windows = framing::segment(rec.trace, sync_idx, *scheme,
                                    static_cast<int>(rec.bits.size()));
    for (std::size_t k = 0; k < windows.size(); ++k) {
      out.windows.push_back(std::move(windows[k]));
      out.bits.push_back(rec.bits[k]);
    }
  }
  return out;
}

BaselineFit fit_baseline(const channel::Dataset& ds, bool pooled,
                         const framing::SyncConfig& sync, int b_max) {
  std::vector<double> intervals;
  for (const auto& s : ds.schemes) intervals.push_back(s.symbol_interval_ms());

  BaselineFit fit;
  auto make_range = [&](const LabelledWindows& lw) {
    std::size_t min_samples = lw.windows.front().samples.size();
    for (const auto& w : lw.windows) min_samples = std::min(min_samples, w.samples.size());
    std::vector<int> range;
    for (int b = 2; b <= std::min<int>(b_max, static_cast<int>(min_samples)); ++b)
      range.push_back(b);
    return range;
  };

  if (pooled) {
    auto lw = collect_windows(ds, channel::Split::train, 0.0, sync);
    if (lw.windows.empty()) throw std::invalid_argument("fit_baseline: no training records");
    auto params = fit_grid(lw, make_range(lw));
    fit.pooled = params;
    for (double iv : intervals) fit.per_interval[iv] = params;
  } else {
    for (double iv : intervals) {
      auto lw = collect_windows(ds, channel::Split::train, iv, sync);
      if (lw.windows.empty()) throw std::invalid_argument("fit_baseline: no training records");
      fit.per_interval[iv] = fit_grid(lw, make_range(lw));
    }
  }
  return fit;
}

const BaselineParams& BaselineFit::params_for(double interval_ms) const {
  for (const auto& [iv, params] : per_interval)
    if (std::abs(iv - interval_ms) < 1e-9) return params;
  throw std::out_of_range("BaselineFit: no parameters for interval " +
                          std::to_string(interval_ms));
}

void save_baseline(const BaselineFit& fit, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_baseline: cannot open " + path.string());
  out << "baseline_params_v1\n";
  out << "pooled=" << (fit.pooled ? 1 : 0) << "\n";
  for (const auto& [iv, p] : fit.per_interval) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, iv);
    out << "interval=" << std::string_view(buf, ptr) << " bins=" << p.bins
        << " gamma=" << p.gamma << " train_ber=" << p.train_ber << "\n";
  }
}

BaselineFit load_baseline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_baseline: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "baseline_params_v1")
    throw std::runtime_error("load_baseline: unrecognized file header");
  BaselineFit fit;
  bool pooled = false;
  while (std::getline(in, line)) {
    if (line.rfind("pooled=", 0) == 0) {
      pooled = line == "pooled=1";
      continue;
    }
    std::istringstream ls(line);
    std::string tok;
    double iv = 0;
    BaselineParams p;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("load_baseline: bad token " + tok);
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "interval") iv = std::stod(val);
      else if (key == "bins") p.bins = std::stoi(val);
      else if (key == "gamma") p.gamma = std::stoi(val);
      else if (key == "train_ber") p.train_ber = std::stod(val);
    }
    fit.per_interval[iv] = p;
  }
  if (pooled && !fit.per_interval.empty()) fit.pooled = fit.per_interval.begin()->second;
  return fit;
}

}  // namespace chemcomm::baseline
