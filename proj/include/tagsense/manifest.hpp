#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tagsense {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Record of one CLI run: everything needed to reproduce its outputs.
struct RunManifest {
  std::string subcommand;
  std::uint64_t seed{0};
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;
  std::vector<std::pair<std::string, std::filesystem::path>> outputs;

  // key=value text; inputs and outputs carry the SHA-256 of their current
  // content.
  std::string to_text() const;
};

std::filesystem::path manifest_path(const std::filesystem::path& output);

// Writes `<output>.manifest.txt` next to `output`.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& output);

}  // namespace tagsense
