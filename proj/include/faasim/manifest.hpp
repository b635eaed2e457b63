#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace faasim {

struct InputDigest {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Everything needed to re-run one CLI invocation.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<InputDigest> inputs;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;
};

/// Hex SHA-256 of a file. Throws IoError if it cannot be read.
InputDigest digest_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

nlohmann::ordered_json to_json(const RunManifest& manifest);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace faasim
