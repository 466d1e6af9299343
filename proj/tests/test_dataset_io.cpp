#include <filesystem>
#include <fstream>

#include "chemcomm/dataset.hpp"
#include "chemcomm/trainer.hpp"
#include "doctest.h"

using namespace chemcomm::channel;

namespace {

Dataset small_dataset(std::uint64_t seed = 5) {
  std::vector<ModulationScheme> schemes = {ModulationScheme::for_interval(250.0),
                                           ModulationScheme::for_interval(500.0)};
  ChannelModel model;
  return generate_dataset(schemes, model, 4, 6, seed);
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_CASE("dataset round-trips exactly, split tags included") {
  auto ds = small_dataset();
  chemcomm::train::split_dataset(ds, 0.75, 9);
  const auto path = temp_file("chemcomm_ds_roundtrip.txt");
  write_dataset(ds, path);
  auto back = read_dataset(path);
  CHECK(back == ds);
  std::filesystem::remove(path);
}

TEST_CASE("unsupported version is reported distinctly") {
  auto ds = small_dataset();
  const auto path = temp_file("chemcomm_ds_version.txt");
  write_dataset(ds, path);
  auto text = slurp(path);
  const auto pos = text.find("format_version=1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 16, "format_version=9");
  spit(path, text);
  try {
    read_dataset(path);
    FAIL("expected DatasetFormatError");
  } catch (const DatasetFormatError& e) {
    CHECK(e.kind == DatasetFormatError::Kind::unsupported_version);
  }
  std::filesystem::remove(path);
}

TEST_CASE("bit count inconsistent with the trace is a validation error") {
  auto ds = small_dataset();
  const auto path = temp_file("chemcomm_ds_bits.txt");
  write_dataset(ds, path);
  auto text = slurp(path);
  const auto pos = text.find("bits=");
  REQUIRE(pos != std::string::npos);
  text.insert(pos + 5, "0");  // one extra bit, samples unchanged
  spit(path, text);
  try {
    read_dataset(path);
    FAIL("expected DatasetFormatError");
  } catch (const DatasetFormatError& e) {
    CHECK(e.kind == DatasetFormatError::Kind::record_invalid);
  }
  std::filesystem::remove(path);
}

TEST_CASE("missing header terminator is a header error") {
  const auto path = temp_file("chemcomm_ds_header.txt");
  spit(path, "format_version=1\nsample_rate_hz=200\n");
  try {
    read_dataset(path);
    FAIL("expected DatasetFormatError");
  } catch (const DatasetFormatError& e) {
    CHECK(e.kind == DatasetFormatError::Kind::malformed_header);
  }
  std::filesystem::remove(path);
}

TEST_CASE("truncated record section is reported") {
  auto ds = small_dataset();
  const auto path = temp_file("chemcomm_ds_trunc.txt");
  write_dataset(ds, path);
  auto text = slurp(path);
  const auto pos = text.rfind("samples=");
  REQUIRE(pos != std::string::npos);
  text.resize(pos);  // drop the last record's samples line
  spit(path, text);
  try {
    read_dataset(path);
    FAIL("expected DatasetFormatError");
  } catch (const DatasetFormatError& e) {
    CHECK(e.kind == DatasetFormatError::Kind::truncated_samples);
  }
  std::filesystem::remove(path);
}
