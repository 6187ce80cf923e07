#pragma once

#include <filesystem>
#include <string>

#include "forge/vqae.hpp"

namespace forge {

// Layout: 8-byte magic "FORGEVQ1", u64 little-endian header length, a JSON
// header (config, tensor names/shapes/offsets, provenance), then every
// tensor as little-endian float64 in header order. Offsets are in bytes
// from the start of the tensor block.

void save_checkpoint(const std::filesystem::path& path, const VqModel& model, const std::string& config_hash = {});
std::string encode_checkpoint(const VqModel& model, const std::string& config_hash = {});

VqModel load_checkpoint(const std::filesystem::path& path);
VqModel decode_checkpoint(std::string_view bytes);

}  // namespace forge
