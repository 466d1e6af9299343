#include "chemcomm/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace chemcomm::eval {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int argmax_bit(const nn::Vec& pmf) {
  // Strict > keeps ties on the lower index (bit 0).
  int best = 0;
  for (std::size_t i = 1; i < pmf.size(); ++i)
    if (pmf[i] > pmf[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace

std::vector<std::uint8_t> predict_record(const nn::Network& net,
                                         const channel::SequenceRecord& rec,
                                         const channel::ModulationScheme& scheme,
                                         const framing::SyncConfig& sync) {
  const auto inputs = train::record_inputs(rec, scheme, net.input, sync);
  std::vector<std::uint8_t> bits;
  bits.reserve(inputs.size());
  if (net.input.sequential) {
    const std::size_t tau = std::max(1, net.tau);
    for (std::size_t start = 0; start < inputs.size(); start += tau) {
      const std::size_t stop = std::min(inputs.size(), start + tau);
      const auto fw = nn::forward_sequence(
          net, std::span<const nn::Vec>(inputs.data() + start, stop - start));
      for (const auto& pmf : fw.pmf) bits.push_back(static_cast<std::uint8_t>(argmax_bit(pmf)));
    }
  } else {
    for (const auto& x : inputs)
      bits.push_back(static_cast<std::uint8_t>(argmax_bit(nn::forward_symbol(net, x))));
  }
  return bits;
}

std::vector<std::uint8_t> predict_record(const baseline::BaselineParams& params,
                                         const channel::SequenceRecord& rec,
                                         const channel::ModulationScheme& scheme,
                                         const framing::SyncConfig& sync) {
  const auto sync_idx = framing::detect_sync(rec.trace, scheme, sync);
  const auto windows =
      framing::segment(rec.trace, sync_idx, scheme, static_cast<int>(rec.bits.size()));
  std::vector<std::uint8_t> bits;
  bits.reserve(windows.size());
  for (const auto& win : windows) {
    const auto d = framing::bin_diff(framing::bin_average(win, params.bins));
    bits.push_back(static_cast<std::uint8_t>(baseline::detect_bit(d, params.gamma)));
  }
  return bits;
}

double compute_ber(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("compute_ber: length mismatch");
  if (predicted.empty()) throw std::invalid_argument("compute_ber: empty input");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != truth[i]) ++errors;
  return static_cast<double>(errors) / static_cast<double>(predicted.size());
}

double BerReport::mean_ber(const std::string& detector) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& row : rows)
    if (row.detector == detector) {
      sum += row.ber;
      ++n;
    }
  if (n == 0) throw std::out_of_range("BerReport: no rows for detector " + detector);
  return sum / n;
}

BerReport report_table(std::span<const Detector> detectors, const channel::Dataset& ds,
                       const framing::SyncConfig& sync) {
  BerReport report;
  report.meta["dataset_id"] = ds.id();
  report.meta["dataset_seed"] = std::to_string(ds.seed);
  report.meta["noise_std"] = format_double(ds.channel.noise_std);
  report.meta["jitter_ms"] = format_double(ds.channel.jitter_ms);
  report.meta["decay_tau_ms"] = format_double(ds.channel.decay_tau_ms);
  report.meta["partition"] = "test";
  for (const auto& det : detectors) {
    if (det.net)
      for (const auto& [k, v] : det.net->meta) report.meta["model." + det.name + "." + k] = v;
  }

  for (const auto& det : detectors) {
    if (!det.net && !det.fit)
      throw std::invalid_argument("report_table: detector '" + det.name + "' has no model");
    for (const auto& scheme : ds.schemes) {
      const double interval = scheme.symbol_interval_ms();
      BerRow row;
      row.detector = det.name;
      row.interval_ms = interval;
      bool any = false;
      for (const auto& rec : ds.records) {
        if (rec.split != channel::Split::test) continue;
        if (std::abs(rec.interval_ms - interval) > 1e-9) continue;
        any = true;
        const auto predicted = det.net
                                   ? predict_record(*det.net, rec, scheme, sync)
                                   : predict_record(det.fit->params_for(interval), rec, scheme,
                                                    sync);
        if (predicted.size() != rec.bits.size())
          throw std::logic_error("report_table: prediction length mismatch");
        for (std::size_t k = 0; k < predicted.size(); ++k)
          if (predicted[k] != rec.bits[k]) ++row.bit_errors;
        row.total_bits += predicted.size();
      }
      if (!any)
        throw std::invalid_argument("report_table: no test records for interval " +
                                    format_double(interval));
      row.ber = static_cast<double>(row.bit_errors) / static_cast<double>(row.total_bits);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_report_text(const BerReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open report file: " + path.string());
  for (const auto& [k, v] : report.meta) out << "# " << k << "=" << v << "\n";

  std::size_t name_w = 8;
  for (const auto& row : report.rows) name_w = std::max(name_w, row.detector.size());
  out << std::left;
  auto pad = [&](const std::string& s, std::size_t w) {
    out << s;
    for (std::size_t i = s.size(); i < w; ++i) out << ' ';
  };
  pad("detector", name_w + 2);
  pad("interval_ms", 13);
  pad("bit_errors", 12);
  pad("total_bits", 12);
  out << "ber\n";
  for (const auto& row : report.rows) {
    pad(row.detector, name_w + 2);
    pad(format_double(row.interval_ms), 13);
    pad(std::to_string(row.bit_errors), 12);
    pad(std::to_string(row.total_bits), 12);
    out << format_double(row.ber) << "\n";
  }
}

void write_report_json(const BerReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.meta) j["meta"][k] = v;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["detector"] = row.detector;
    r["interval_ms"] = row.interval_ms;
    r["bit_errors"] = row.bit_errors;
    r["total_bits"] = row.total_bits;
    r["ber"] = row.ber;
    j["rows"].push_back(std::move(r));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open report file: " + path.string());
  out << j.dump(2) << "\n";
}

double SweepResult::mean_ber(const std::string& arch, int length) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& row : rows)
    if (row.arch == arch && row.length == length) {
      sum += row.test_ber;
      ++n;
    }
  if (n == 0) throw std::out_of_range("SweepResult: no rows for " + arch);
  return sum / n;
}

SweepResult sweep_seq_len(std::span<const std::string> archs, const channel::Dataset& ds,
                          std::span<const int> lengths, const train::TrainConfig& protocol,
                          std::span<const std::uint64_t> seeds) {
  const auto sync = framing::SyncConfig::for_noise(ds.channel.noise_std);
  SweepResult result;
  for (const auto& arch : archs) {
    for (int length : lengths) {
      if (length < 1 || length > ds.seq_len)
        throw std::invalid_argument("sweep_seq_len: invalid length " + std::to_string(length));
      for (std::uint64_t seed : seeds) {
        num::Prng init(seed, num::kStreamWeightInit);
        auto net = nn::build_architecture(arch, init);
        net.tau = length;
        train::TrainConfig cfg = protocol;
        cfg.seed = seed;
        cfg.tau = length;
        auto trained = train::train(std::move(net), ds, cfg);

        std::uint64_t errors = 0, bits = 0;
        for (const auto& rec : ds.records) {
          if (rec.split != channel::Split::test) continue;
          const auto& scheme = train::scheme_for(ds, rec.interval_ms);
          const auto predicted = predict_record(trained.net, rec, scheme, sync);
          for (std::size_t k = 0; k < predicted.size(); ++k)
            if (predicted[k] != rec.bits[k]) ++errors;
          bits += predicted.size();
        }
        result.rows.push_back(
            {arch, length, seed, static_cast<double>(errors) / static_cast<double>(bits)});
      }
    }
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open sweep file: " + path.string());
  out << "arch,length,seed,test_ber\n";
  for (const auto& row : result.rows)
    out << row.arch << "," << row.length << "," << row.seed << ","
        << format_double(row.test_ber) << "\n";
}

void dump_trace(const channel::Dataset& ds, std::uint64_t record_id,
                const std::filesystem::path& path, const framing::SyncConfig& sync) {
  const channel::SequenceRecord* rec = nullptr;
  for (const auto& r : ds.records)
    if (r.id == record_id) rec = &r;
  if (!rec) throw std::invalid_argument("dump_trace: unknown record id " +
                                        std::to_string(record_id));
  const auto& scheme = train::scheme_for(ds, rec->interval_ms);
  const auto sync_idx = framing::detect_sync(rec->trace, scheme, sync);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file: " + path.string());
  out << "time_ms,ph\n";
  const double dt = 1000.0 / rec->trace.sample_rate_hz;
  for (std::size_t i = 0; i < rec->trace.samples.size(); ++i)
    out << format_double(i * dt) << "," << format_double(rec->trace.samples[i]) << "\n";
  out << "# sync," << format_double(sync_idx * dt) << "\n";
  for (std::size_t k = 0; k < rec->bits.size(); ++k) {
    const double t = sync_idx * dt + scheme.sync_total_ms() + k * scheme.symbol_interval_ms();
    out << "# symbol," << k << "," << format_double(t) << "," << int(rec->bits[k]) << "\n";
  }
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length vectors");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i], my += ry[i];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // constant ranks: no ordering signal
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace chemcomm::eval
