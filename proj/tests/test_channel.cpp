#include <algorithm>
#include <cmath>

#include "chemcomm/channel.hpp"
#include "chemcomm/dataset.hpp"
#include "doctest.h"

using namespace chemcomm::channel;
using chemcomm::num::Prng;

namespace {

ChannelModel quiet_model() {
  ChannelModel m;
  m.noise_std = 0.0;
  m.jitter_ms = 0.0;
  return m;
}

}  // namespace

TEST_CASE("modulate emits the sync pulse alone for an empty message") {
  ModulationScheme scheme;
  auto events = modulate({}, scheme);
  REQUIRE(events.size() == 1);
  CHECK(events[0].start_ms == 0.0);
  CHECK(events[0].duration_ms == 100.0);
  CHECK(events[0].polarity == Polarity::acid);
}

TEST_CASE("modulate schedules symbols after the sync preamble") {
  ModulationScheme scheme;  // pause 220 -> interval 250
  const std::uint8_t one_zero[] = {0};
  auto events = modulate(one_zero, scheme);
  REQUIRE(events.size() == 2);
  CHECK(events[1].start_ms == 1000.0);
  CHECK(events[1].duration_ms == 30.0);
  CHECK(events[1].polarity == Polarity::acid);

  const std::uint8_t bits[] = {1, 0};
  events = modulate(bits, scheme);
  REQUIRE(events.size() == 3);
  CHECK(events[1].start_ms == 1000.0);
  CHECK(events[1].polarity == Polarity::base);
  CHECK(events[2].start_ms == 1250.0);
  CHECK(events[2].polarity == Polarity::acid);
  CHECK(events[2].duration_ms == 30.0);
}

TEST_CASE("quiet channel stays at baseline") {
  ModulationScheme scheme;
  Prng rng(1, 0);
  std::vector<InjectionEvent> none;
  auto trace = simulate_trace(none, quiet_model(), scheme, rng, 2000.0);
  CHECK(trace.samples.size() == trace_sample_count(2000.0, scheme.sample_rate_hz));
  for (double v : trace.samples) CHECK(v == 7.0);
}

TEST_CASE("one acid event dips and relaxes monotonically") {
  ModulationScheme scheme;
  Prng rng(1, 0);
  const InjectionEvent ev[] = {{100.0, 30.0, Polarity::acid}};
  auto trace = simulate_trace(ev, quiet_model(), scheme, rng, 2000.0);

  auto min_it = std::min_element(trace.samples.begin(), trace.samples.end());
  CHECK(*min_it < 7.0);
  // 200 Hz: injection ends at 130 ms == sample 26
  const auto min_idx = static_cast<std::size_t>(min_it - trace.samples.begin());
  CHECK(min_idx == 26);
  for (std::size_t i = min_idx; i + 1 < trace.samples.size(); ++i) {
    CHECK(trace.samples[i + 1] >= trace.samples[i]);
    CHECK(trace.samples[i + 1] <= 7.0);
  }
}

TEST_CASE("consecutive acid pulses accumulate") {
  ModulationScheme scheme;  // interval 250
  ChannelModel model = quiet_model();
  model.decay_tau_ms = 2.0 * scheme.symbol_interval_ms();
  Prng rng(1, 0);
  const InjectionEvent ev[] = {{0.0, 30.0, Polarity::acid}, {250.0, 30.0, Polarity::acid}};
  auto trace = simulate_trace(ev, model, scheme, rng, 1000.0);

  const auto split = static_cast<std::size_t>(0.250 * scheme.sample_rate_hz);
  const double min1 = *std::min_element(trace.samples.begin(), trace.samples.begin() + split);
  const double min2 = *std::min_element(trace.samples.begin() + split, trace.samples.end());
  CHECK(min2 < min1);

  // closed form: the peaks superpose linearly in concentration
  const double tau = model.decay_tau_ms;
  const double peak1 = (1.0 / 30.0) * tau * (1.0 - std::exp(-30.0 / tau));
  const double peak2 = peak1 * std::exp(-250.0 / tau) + peak1;
  CHECK(min1 == doctest::Approx(7.0 - std::asinh(peak1)).epsilon(1e-9));
  CHECK(min2 == doctest::Approx(7.0 - std::asinh(peak2)).epsilon(1e-9));
}

TEST_CASE("ISI: back-to-back response differs from an isolated response") {
  ModulationScheme scheme;
  ChannelModel model = quiet_model();
  model.decay_tau_ms = 400.0;
  Prng r1(1, 0), r2(1, 0);
  const InjectionEvent pair[] = {{0.0, 30.0, Polarity::acid}, {250.0, 30.0, Polarity::acid}};
  const InjectionEvent solo[] = {{250.0, 30.0, Polarity::acid}};
  auto with_isi = simulate_trace(pair, model, scheme, r1, 1000.0);
  auto without = simulate_trace(solo, model, scheme, r2, 1000.0);
  double max_diff = 0.0;
  const auto lo = static_cast<std::size_t>(0.250 * scheme.sample_rate_hz);
  const auto hi = static_cast<std::size_t>(0.500 * scheme.sample_rate_hz);
  for (std::size_t i = lo; i < hi; ++i)
    max_diff = std::max(max_diff, std::fabs(with_isi.samples[i] - without.samples[i]));
  CHECK(max_diff > 0.0);
}

TEST_CASE("polarity symmetry: complemented events mirror the trace") {
  ModulationScheme scheme;
  Prng r1(5, 0), r2(5, 0);
  std::vector<InjectionEvent> events = {{0.0, 30.0, Polarity::acid},
                                        {250.0, 30.0, Polarity::base},
                                        {500.0, 30.0, Polarity::acid},
                                        {750.0, 30.0, Polarity::acid}};
  std::vector<InjectionEvent> flipped = events;
  for (auto& e : flipped)
    e.polarity = e.polarity == Polarity::acid ? Polarity::base : Polarity::acid;
  auto a = simulate_trace(events, quiet_model(), scheme, r1, 1500.0);
  auto b = simulate_trace(flipped, quiet_model(), scheme, r2, 1500.0);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(a.samples[i] - 7.0 == doctest::Approx(-(b.samples[i] - 7.0)).epsilon(1e-12));
}

TEST_CASE("trace lengths obey the ceil formula for all default intervals") {
  for (double interval : {250.0, 334.0, 380.0, 500.0}) {
    auto scheme = ModulationScheme::for_interval(interval);
    CHECK(expected_samples(scheme, 120) ==
          trace_sample_count(1000.0 + 121.0 * interval, scheme.sample_rate_hz));
  }
}

TEST_CASE("default generation: counts and bit balance") {
  std::vector<ModulationScheme> schemes;
  for (double iv : {250.0, 334.0, 380.0, 500.0}) schemes.push_back(ModulationScheme::for_interval(iv));
  ChannelModel model;
  auto ds = generate_dataset(schemes, model, 100, 120, 2026);
  CHECK(ds.records.size() == 400);
  for (const auto& scheme : schemes) {
    std::size_t bits = 0, ones = 0;
    for (const auto& rec : ds.records) {
      if (std::abs(rec.interval_ms - scheme.symbol_interval_ms()) > 1e-9) continue;
      bits += rec.bits.size();
      for (auto b : rec.bits) ones += b;
      CHECK(rec.trace.samples.size() == expected_samples(scheme, 120));
    }
    CHECK(bits == 12000);
    CHECK(std::fabs(static_cast<double>(ones) / bits - 0.5) < 0.02);
  }
}

TEST_CASE("generation is deterministic in the master seed") {
  const ModulationScheme schemes[] = {ModulationScheme::for_interval(250.0)};
  ChannelModel model;
  auto a = generate_dataset(schemes, model, 2, 1, 77);
  auto b = generate_dataset(schemes, model, 2, 1, 77);
  CHECK(a == b);
  auto c = generate_dataset(schemes, model, 2, 1, 78);
  CHECK(a.records != c.records);
}

TEST_CASE("model validation rejects bad parameters") {
  ChannelModel m;
  m.decay_tau_ms = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = ChannelModel{};
  m.noise_std = -0.1;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  ModulationScheme s;
  s.pause_ms = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
