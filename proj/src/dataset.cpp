#include "chemcomm/dataset.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace chemcomm::channel {

namespace {

constexpr int kFormatVersion = 1;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Shortest representation that parses back to the identical double.
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw DatasetFormatError(DatasetFormatError::Kind::io, "float format");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const char* what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DatasetFormatError(DatasetFormatError::Kind::malformed_header,
                             std::string("bad float for ") + what);
  return v;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DatasetFormatError(DatasetFormatError::Kind::malformed_header,
                             std::string("bad integer for ") + what);
  return v;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string header_text(const Dataset& ds) {
  std::ostringstream os;
  os << "format_version=" << kFormatVersion << "\n";
  const auto& ref = ds.schemes.at(0);
  os << "sample_rate_hz=" << ref.sample_rate_hz << "\n";
  os << "intervals=";
  for (std::size_t i = 0; i < ds.schemes.size(); ++i) {
    if (i) os << ",";
    os << format_double(ds.schemes[i].symbol_interval_ms());
  }
  os << "\n";
  os << "n=" << ds.n_sequences << "\n";
  os << "seq_len=" << ds.seq_len << "\n";
  os << "seed=" << ds.seed << "\n";
  os << "injection_ms=" << format_double(ref.injection_ms) << "\n";
  os << "sync_pulse_ms=" << format_double(ref.sync_pulse_ms) << "\n";
  os << "sync_silence_ms=" << format_double(ref.sync_silence_ms) << "\n";
  os << "ph_baseline=" << format_double(ds.channel.ph_baseline) << "\n";
  os << "injection_amplitude=" << format_double(ds.channel.injection_amplitude) << "\n";
  os << "decay_tau_ms=" << format_double(ds.channel.decay_tau_ms) << "\n";
  os << "nonlinearity_scale=" << format_double(ds.channel.nonlinearity_scale) << "\n";
  os << "noise_std=" << format_double(ds.channel.noise_std) << "\n";
  os << "jitter_ms=" << format_double(ds.channel.jitter_ms) << "\n";
  os << "records=" << ds.records.size() << "\n";
  return os.str();
}

}  // namespace

std::string Dataset::id() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(header_text(*this)));
  return buf;
}

std::size_t expected_samples(const ModulationScheme& scheme, int seq_len) {
  const double duration =
      scheme.sync_total_ms() + (seq_len + 1) * scheme.symbol_interval_ms();
  return trace_sample_count(duration, scheme.sample_rate_hz);
}

Dataset generate_dataset(std::span<const ModulationScheme> schemes, const ChannelModel& model,
                         int n_sequences, int seq_len, std::uint64_t master_seed) {
  if (schemes.empty()) throw std::invalid_argument("generate_dataset: no schemes");
  if (n_sequences < 2) throw std::invalid_argument("generate_dataset: n_sequences must be >= 2");
  if (seq_len < 1) throw std::invalid_argument("generate_dataset: seq_len must be >= 1");
  model.validate();

  Dataset ds;
  ds.schemes.assign(schemes.begin(), schemes.end());
  ds.channel = model;
  ds.n_sequences = n_sequences;
  ds.seq_len = seq_len;
  ds.seed = master_seed;
  ds.records.reserve(schemes.size() * static_cast<std::size_t>(n_sequences));

  std::uint64_t record_index = 0;
  for (const auto& scheme : schemes) {
    scheme.validate();
    const double duration =
        scheme.sync_total_ms() + (seq_len + 1) * scheme.symbol_interval_ms();
    for (int s = 0; s < n_sequences; ++s, ++record_index) {
      num::Prng prng(master_seed, record_index);
      SequenceRecord rec;
      rec.id = record_index;
      rec.interval_ms = scheme.symbol_interval_ms();
      rec.bits.resize(seq_len);
      for (auto& b : rec.bits) b = prng.next_uniform() < 0.5 ? 0 : 1;
      rec.trace = simulate_trace(modulate(rec.bits, scheme), model, scheme, prng, duration,
                                 rec.id);
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "none";
  }
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  if (name == "none") return Split::none;
  throw DatasetFormatError(DatasetFormatError::Kind::record_invalid,
                           "unknown split tag: " + name);
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  if (ds.schemes.empty() || ds.records.empty())
    throw std::invalid_argument("write_dataset: empty dataset");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetFormatError(DatasetFormatError::Kind::io,
                                     "cannot open for writing: " + path.string());
  out << header_text(ds) << "---\n";
  for (const auto& rec : ds.records) {
    out << "record=" << rec.id << "\n";
    out << "interval_ms=" << format_double(rec.interval_ms) << "\n";
    out << "split=" << split_name(rec.split) << "\n";
    out << "bits=";
    for (auto b : rec.bits) out << char('0' + b);
    out << "\n";
    out << "samples=";
    for (std::size_t i = 0; i < rec.trace.samples.size(); ++i) {
      if (i) out << ",";
      out << format_double(rec.trace.samples[i]);
    }
    out << "\n";
  }
  if (!out) throw DatasetFormatError(DatasetFormatError::Kind::io,
                                     "write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFormatError(DatasetFormatError::Kind::io,
                                    "cannot open for reading: " + path.string());

  std::map<std::string, std::string> header;
  std::string line;
  bool saw_terminator = false;
  while (std::getline(in, line)) {
    if (line == "---") {
      saw_terminator = true;
      break;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DatasetFormatError(DatasetFormatError::Kind::malformed_header,
                               "header line without '=': " + line);
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!saw_terminator)
    throw DatasetFormatError(DatasetFormatError::Kind::malformed_header,
                             "missing '---' header terminator");

  auto require = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end())
      throw DatasetFormatError(DatasetFormatError::Kind::malformed_header,
                               std::string("missing header key: ") + key);
    return it->second;
  };

  const auto version = parse_u64(require("format_version"), "format_version");
  if (version != kFormatVersion)
    throw DatasetFormatError(DatasetFormatError::Kind::unsupported_version,
                             "unsupported format_version: " + std::to_string(version));

  Dataset ds;
  const int rate = static_cast<int>(parse_u64(require("sample_rate_hz"), "sample_rate_hz"));
  ds.n_sequences = static_cast<int>(parse_u64(require("n"), "n"));
  ds.seq_len = static_cast<int>(parse_u64(require("seq_len"), "seq_len"));
  ds.seed = parse_u64(require("seed"), "seed");
  ds.channel.ph_baseline = parse_double(require("ph_baseline"), "ph_baseline");
  ds.channel.injection_amplitude =
      parse_double(require("injection_amplitude"), "injection_amplitude");
  ds.channel.decay_tau_ms = parse_double(require("decay_tau_ms"), "decay_tau_ms");
  ds.channel.nonlinearity_scale =
      parse_double(require("nonlinearity_scale"), "nonlinearity_scale");
  ds.channel.noise_std = parse_double(require("noise_std"), "noise_std");
  ds.channel.jitter_ms = parse_double(require("jitter_ms"), "jitter_ms");

  const double injection_ms = parse_double(require("injection_ms"), "injection_ms");
  const double sync_pulse_ms = parse_double(require("sync_pulse_ms"), "sync_pulse_ms");
  const double sync_silence_ms = parse_double(require("sync_silence_ms"), "sync_silence_ms");
  for (const auto& tok : split_on(require("intervals"), ',')) {
    ModulationScheme s;
    s.sample_rate_hz = rate;
    s.injection_ms = injection_ms;
    s.sync_pulse_ms = sync_pulse_ms;
    s.sync_silence_ms = sync_silence_ms;
    s.pause_ms = parse_double(tok, "intervals") - injection_ms;
    s.validate();
    ds.schemes.push_back(s);
  }

  const auto n_records = parse_u64(require("records"), "records");
  ds.records.reserve(n_records);
  auto next_line = [&](const char* what, std::string_view key) -> std::string {
    if (!std::getline(in, line))
      throw DatasetFormatError(DatasetFormatError::Kind::truncated_samples,
                               std::string("unexpected end of file, expected ") + what);
    if (line.rfind(key, 0) != 0)
      throw DatasetFormatError(DatasetFormatError::Kind::record_invalid,
                               std::string("expected line '") + std::string(key) + "...', got: " +
                                   line.substr(0, 40));
    return line.substr(key.size());
  };

  for (std::uint64_t r = 0; r < n_records; ++r) {
    SequenceRecord rec;
    rec.id = parse_u64(next_line("record id", "record="), "record");
    rec.interval_ms = parse_double(next_line("interval", "interval_ms="), "interval_ms");
    rec.split = split_from_name(next_line("split", "split="));
    const std::string bits = next_line("bits", "bits=");
    rec.bits.reserve(bits.size());
    for (char c : bits) {
      if (c != '0' && c != '1')
        throw DatasetFormatError(DatasetFormatError::Kind::record_invalid,
                                 "bits line contains non-binary character");
      rec.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }

    const ModulationScheme* scheme = nullptr;
    for (const auto& s : ds.schemes)
      if (std::abs(s.symbol_interval_ms() - rec.interval_ms) < 1e-9) scheme = &s;
    if (!scheme)
      throw DatasetFormatError(DatasetFormatError::Kind::record_invalid,
                               "record interval not listed in header");

    const std::string samples = next_line("samples", "samples=");
    rec.trace.sample_rate_hz = rate;
    rec.trace.symbol_interval_ms = rec.interval_ms;
    rec.trace.sequence_id = rec.id;
    for (const auto& tok : split_on(samples, ','))
      rec.trace.samples.push_back(parse_double(tok, "samples"));

    const std::size_t expected =
        expected_samples(*scheme, static_cast<int>(rec.bits.size()));
    if (rec.trace.samples.size() != expected)
      throw DatasetFormatError(
          DatasetFormatError::Kind::record_invalid,
          "record " + std::to_string(rec.id) + ": bit count implies " +
              std::to_string(expected) + " samples, file has " +
              std::to_string(rec.trace.samples.size()));
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace chemcomm::channel
