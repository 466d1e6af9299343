#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemcomm/evaluate.hpp"
#include "doctest.h"

using namespace chemcomm;
using namespace chemcomm::eval;

namespace {

channel::Dataset small_dataset(std::uint64_t seed = 21) {
  std::vector<channel::ModulationScheme> schemes = {
      channel::ModulationScheme::for_interval(250.0),
      channel::ModulationScheme::for_interval(500.0)};
  channel::ChannelModel model;
  model.noise_std = 0.05;
  model.jitter_ms = 5.0;
  auto ds = channel::generate_dataset(schemes, model, 6, 20, seed);
  train::split_dataset(ds, 0.67, 2);
  return ds;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("ber is the normalized Hamming distance") {
  const std::vector<std::uint8_t> a{0, 1, 1, 0}, b{1, 0, 0, 1}, half{0, 1, 0, 1};
  CHECK(compute_ber(a, a) == 0.0);
  CHECK(compute_ber(a, b) == 1.0);
  CHECK(compute_ber(a, half) == 0.5);
  const std::vector<std::uint8_t> short_vec{0, 1};
  CHECK_THROWS_AS((void)compute_ber(a, short_vec), std::invalid_argument);
}

TEST_CASE("prediction ties resolve to bit zero") {
  // zero head: logits are always [0, 0] -> PMF [0.5, 0.5]
  nn::Network net;
  nn::DenseParams head;
  head.W = num::Tensor::zeros({2, 11});
  head.b = num::Tensor::zeros({2});
  net.input = {nn::InputKind::feature_vector, 9, false};
  net.layers.push_back({nn::LayerKind::dense, head});
  net.layers.push_back({nn::LayerKind::softmax, nn::SoftmaxParams{}});

  auto ds = small_dataset();
  const auto sync = framing::SyncConfig::for_noise(ds.channel.noise_std);
  const auto& rec = ds.records.front();
  const auto bits = predict_record(net, rec, train::scheme_for(ds, rec.interval_ms), sync);
  CHECK(bits.size() == rec.bits.size());
  for (auto b : bits) CHECK(b == 0);
}

TEST_CASE("uniformly random guesses sit near one half BER") {
  auto ds = channel::generate_dataset(
      std::vector<channel::ModulationScheme>{channel::ModulationScheme::for_interval(250.0)},
      channel::ChannelModel{}, 10, 120, 77);
  num::Prng rng(123, 9999);
  std::size_t errors = 0, total = 0;
  for (const auto& rec : ds.records) {
    std::vector<std::uint8_t> guess(rec.bits.size());
    for (auto& g : guess) g = rng.next_uniform() < 0.5 ? 0 : 1;
    for (std::size_t k = 0; k < guess.size(); ++k)
      if (guess[k] != rec.bits[k]) ++errors;
    total += guess.size();
  }
  REQUIRE(total >= 1000);
  CHECK(std::fabs(static_cast<double>(errors) / total - 0.5) < 0.03);
}

TEST_CASE("report covers every detector and interval and matches recomputation") {
  auto ds = small_dataset();
  const auto sync = framing::SyncConfig::for_noise(ds.channel.noise_std);

  auto fit = baseline::fit_baseline(ds, false, sync, 12);
  num::Prng init(31, num::kStreamWeightInit);
  auto net = nn::build_architecture("dense", init);

  std::vector<Detector> detectors;
  detectors.push_back({"baseline", nullptr, &fit});
  detectors.push_back({"dense", &net, nullptr});

  auto report = report_table(detectors, ds, sync);
  REQUIRE(report.rows.size() == 4);  // 2 detectors x 2 intervals
  CHECK(report.meta.count("dataset_id") == 1);

  for (const auto& row : report.rows) {
    CHECK(row.ber == static_cast<double>(row.bit_errors) / row.total_bits);
    std::uint64_t errors = 0, bits = 0;
    for (const auto& rec : ds.records) {
      if (rec.split != channel::Split::test) continue;
      if (std::abs(rec.interval_ms - row.interval_ms) > 1e-9) continue;
      const auto& scheme = train::scheme_for(ds, rec.interval_ms);
      const auto predicted =
          row.detector == "baseline"
              ? predict_record(fit.params_for(rec.interval_ms), rec, scheme, sync)
              : predict_record(net, rec, scheme, sync);
      for (std::size_t k = 0; k < predicted.size(); ++k)
        if (predicted[k] != rec.bits[k]) ++errors;
      bits += predicted.size();
    }
    CHECK(row.bit_errors == errors);
    CHECK(row.total_bits == bits);
  }

  // emission is deterministic
  const auto t1 = temp_file("chemcomm_rep1.txt"), t2 = temp_file("chemcomm_rep2.txt");
  const auto j1 = temp_file("chemcomm_rep1.json"), j2 = temp_file("chemcomm_rep2.json");
  write_report_text(report, t1);
  write_report_text(report, t2);
  write_report_json(report, j1);
  write_report_json(report, j2);
  CHECK(slurp(t1) == slurp(t2));
  CHECK(slurp(j1) == slurp(j2));
  CHECK(slurp(j1).find("dataset_id") != std::string::npos);
  for (const auto& p : {t1, t2, j1, j2}) std::filesystem::remove(p);
}

TEST_CASE("trace dumps carry every sample and one marker per symbol plus sync") {
  auto ds = small_dataset();
  const auto sync = framing::SyncConfig::for_noise(ds.channel.noise_std);
  const auto path = temp_file("chemcomm_trace.csv");
  dump_trace(ds, ds.records[1].id, path, sync);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "time_ms,ph");
  std::size_t data_rows = 0, sync_markers = 0, symbol_markers = 0;
  std::vector<double> ph;
  while (std::getline(in, line)) {
    if (line.rfind("# sync", 0) == 0) ++sync_markers;
    else if (line.rfind("# symbol", 0) == 0) ++symbol_markers;
    else {
      ++data_rows;
      ph.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
  }
  const auto& rec = ds.records[1];
  CHECK(data_rows == rec.trace.samples.size());
  CHECK(sync_markers == 1);
  CHECK(symbol_markers == rec.bits.size());
  REQUIRE(ph.size() == rec.trace.samples.size());
  for (std::size_t i = 0; i < ph.size(); ++i) CHECK(ph[i] == rec.trace.samples[i]);

  CHECK_THROWS_AS(dump_trace(ds, 999999, path, sync), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("spearman rank correlation") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(spearman(x, std::vector<double>{10, 20, 25, 90}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{9, 7, 5, 2}) == doctest::Approx(-1.0));
  CHECK(spearman(x, std::vector<double>{5, 5, 5, 5}) == 0.0);
  // non-monotone: [0.02, 0.01, 0.0101, 0.0099] has mixed ranks
  CHECK(spearman(x, std::vector<double>{0.02, 0.01, 0.0101, 0.0099}) ==
        doctest::Approx(-0.8));
}
