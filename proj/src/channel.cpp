#include "chemcomm/channel.hpp"

#include <algorithm>
#include <cmath>

namespace chemcomm::channel {

ModulationScheme ModulationScheme::for_interval(double interval_ms) {
  ModulationScheme s;
  if (interval_ms <= s.injection_ms)
    throw std::invalid_argument("ModulationScheme: interval must exceed injection duration");
  s.pause_ms = interval_ms - s.injection_ms;
  return s;
}

void ModulationScheme::validate() const {
  if (injection_ms <= 0 || pause_ms <= 0 || sync_pulse_ms <= 0 || sync_silence_ms <= 0 ||
      sample_rate_hz <= 0)
    throw std::invalid_argument("ModulationScheme: durations and rate must be positive");
  if (sample_rate_hz * symbol_interval_ms() / 1000.0 < 30.0)
    throw std::invalid_argument("ModulationScheme: fewer than 30 samples per symbol");
}

void ChannelModel::validate() const {
  if (decay_tau_ms <= 0) throw std::invalid_argument("ChannelModel: decay_tau_ms must be > 0");
  if (injection_amplitude <= 0)
    throw std::invalid_argument("ChannelModel: injection_amplitude must be > 0");
  if (noise_std < 0) throw std::invalid_argument("ChannelModel: noise_std must be >= 0");
  if (jitter_ms < 0) throw std::invalid_argument("ChannelModel: jitter_ms must be >= 0");
}

std::size_t trace_sample_count(double duration_ms, int sample_rate_hz) {
  return static_cast<std::size_t>(std::ceil(duration_ms * sample_rate_hz / 1000.0));
}

std::vector<InjectionEvent> modulate(std::span<const std::uint8_t> bits,
                                     const ModulationScheme& scheme) {
  scheme.validate();
  std::vector<InjectionEvent> events;
  events.reserve(bits.size() + 1);
  events.push_back({0.0, scheme.sync_pulse_ms, Polarity::acid});
  const double first_symbol = scheme.sync_total_ms();
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] > 1) throw std::invalid_argument("modulate: bits must be 0 or 1");
    events.push_back({first_symbol + static_cast<double>(k) * scheme.symbol_interval_ms(),
                      scheme.injection_ms,
                      bits[k] == 0 ? Polarity::acid : Polarity::base});
  }
  return events;
}

PhTrace simulate_trace(std::span<const InjectionEvent> events, const ChannelModel& model,
                       const ModulationScheme& scheme, num::Prng& prng,
                       double total_duration_ms, std::uint64_t sequence_id) {
  model.validate();
  scheme.validate();

  double last_end = 0.0;
  for (const auto& e : events) {
    if (e.duration_ms <= 0) throw std::invalid_argument("simulate_trace: non-positive duration");
    last_end = std::max(last_end, e.start_ms + e.duration_ms);
  }
  if (total_duration_ms + 1e-9 < last_end + scheme.symbol_interval_ms() - scheme.injection_ms)
    throw std::invalid_argument("simulate_trace: duration does not cover the event schedule");

  // Jittered schedule as rate breakpoints: +rate at start, -rate at end.
  struct RateEdge {
    double t;
    double delta;
  };
  std::vector<RateEdge> edges;
  edges.reserve(events.size() * 2);
  for (const auto& e : events) {
    const double start = e.start_ms + prng.next_uniform() * model.jitter_ms;
    const double rate = model.injection_amplitude / e.duration_ms *
                        (e.polarity == Polarity::acid ? 1.0 : -1.0);
    edges.push_back({start, rate});
    edges.push_back({start + e.duration_ms, -rate});
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const RateEdge& a, const RateEdge& b) { return a.t < b.t; });

  const std::size_t n = trace_sample_count(total_duration_ms, scheme.sample_rate_hz);
  const double dt_ms = 1000.0 / scheme.sample_rate_hz;

  PhTrace trace;
  trace.sample_rate_hz = scheme.sample_rate_hz;
  trace.symbol_interval_ms = scheme.symbol_interval_ms();
  trace.sequence_id = sequence_id;
  trace.samples.resize(n);

  // March x(t) across merged sample/edge breakpoints.  Over a span of length
  // d with constant input u:  x <- x e^{-d/tau} + u tau (1 - e^{-d/tau}).
  const double tau = model.decay_tau_ms;
  double x = 0.0;
  double t = 0.0;
  double u = 0.0;
  std::size_t edge_idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t_sample = static_cast<double>(i) * dt_ms;
    while (edge_idx < edges.size() && edges[edge_idx].t <= t_sample) {
      const double span = edges[edge_idx].t - t;
      if (span > 0) {
        const double decay = std::exp(-span / tau);
        x = x * decay + u * tau * (1.0 - decay);
      }
      t = edges[edge_idx].t;
      u += edges[edge_idx].delta;
      ++edge_idx;
    }
    const double span = t_sample - t;
    if (span > 0) {
      const double decay = std::exp(-span / tau);
      x = x * decay + u * tau * (1.0 - decay);
    }
    t = t_sample;
    trace.samples[i] = model.ph_baseline - model.nonlinearity_scale * std::asinh(x) +
                       prng.next_gaussian(0.0, model.noise_std);
  }
  return trace;
}

}  // namespace chemcomm::channel
