#include "tagsense/manifest.hpp"

#include "tagsense/textio.hpp"

namespace tagsense {

std::string RunManifest::to_text() const {
  std::string out;
  out += "tool=tagsense\n";
  out += "version=" + std::string(kToolVersion) + "\n";
  out += "subcommand=" + subcommand + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  for (const auto& [k, v] : parameters) out += "param." + k + "=" + v + "\n";
  auto files = [&](std::string_view kind, const auto& list) {
    for (const auto& [k, p] : list) {
      out += std::string(kind) + "." + k + "=" + p.string() + "\n";
      out += std::string(kind) + "." + k + ".sha256=" + textio::sha256_hex(textio::read_file(p)) + "\n";
    }
  };
  files("input", inputs);
  files("output", outputs);
  return out;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.txt";
  return p;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& output) {
  textio::write_file_atomic(manifest_path(output), manifest.to_text());
}

}  // namespace tagsense
