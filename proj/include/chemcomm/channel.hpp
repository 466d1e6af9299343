#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "chemcomm/prng.hpp"

namespace chemcomm::channel {

enum class Polarity : std::uint8_t { acid, base };

// One chemical injection into the vessel.
struct InjectionEvent {
  double start_ms = 0.0;
  double duration_ms = 0.0;
  Polarity polarity = Polarity::acid;
};

// Timing of the on-off keying: every bit is one short injection (acid for 0,
// base for 1) followed by a pause, and every sequence opens with a long acid
// pulse the receiver synchronizes on.
struct ModulationScheme {
  double injection_ms = 30.0;
  double pause_ms = 220.0;
  double sync_pulse_ms = 100.0;
  double sync_silence_ms = 900.0;
  int sample_rate_hz = 200;

  double symbol_interval_ms() const { return injection_ms + pause_ms; }
  double sync_total_ms() const { return sync_pulse_ms + sync_silence_ms; }

  static ModulationScheme for_interval(double interval_ms);

  // All durations positive and at least 30 samples per symbol.
  void validate() const;

  bool operator==(const ModulationScheme&) const = default;
};

// Parametric stand-in for the vessel: excess concentration x(t) follows a
// first-order tank, dx/dt = -x/tau + u(t), with u(t) = +-A/duration while an
// injection runs.  The probe reads
//   pH(t) = baseline - scale * asinh(x(t)) + N(0, noise_std^2)
// so acid (x > 0) lowers pH, base raises it, and the response saturates for
// large swings.  jitter_ms shifts every injection start by U[0, jitter].
struct ChannelModel {
  double ph_baseline = 7.0;
  double injection_amplitude = 1.0;
  double decay_tau_ms = 400.0;
  double nonlinearity_scale = 1.0;
  double noise_std = 0.1;
  double jitter_ms = 30.0;

  void validate() const;

  bool operator==(const ChannelModel&) const = default;
};

struct PhTrace {
  int sample_rate_hz = 200;
  std::vector<double> samples;
  double symbol_interval_ms = 0.0;
  std::uint64_t sequence_id = 0;

  bool operator==(const PhTrace&) const = default;
};

// ceil(duration_ms * rate / 1000), the sample count contract for traces.
std::size_t trace_sample_count(double duration_ms, int sample_rate_hz);

// Bits -> injection schedule.  Event 0 is the sync pulse at t = 0; symbol k
// starts at sync_total + k * symbol_interval.
std::vector<InjectionEvent> modulate(std::span<const std::uint8_t> bits,
                                     const ModulationScheme& scheme);

// Integrates the tank exactly between breakpoints (piecewise-constant input)
// and samples pH on the uniform grid.  total_duration_ms must cover the last
// event plus one symbol interval.
PhTrace simulate_trace(std::span<const InjectionEvent> events, const ChannelModel& model,
                       const ModulationScheme& scheme, num::Prng& prng,
                       double total_duration_ms, std::uint64_t sequence_id = 0);

}  // namespace chemcomm::channel
