#pragma once

#include <filesystem>
#include <stdexcept>

#include "chemcomm/nn.hpp"

namespace chemcomm::train {

struct ModelIoError : std::runtime_error {
  enum class Kind { io, bad_magic, unsupported_version, bad_descriptor, checksum, shape };
  Kind kind;
  ModelIoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Binary container: magic, version, architecture descriptor (name, tau, bins,
// metadata, layer table), little-endian float64 parameters in traversal
// order, FNV-1a checksum of the parameter payload.  Layout in
// docs/file-formats.md.
void save_model(const nn::Network& net, const std::filesystem::path& path);
nn::Network load_model(const std::filesystem::path& path);

}  // namespace chemcomm::train
