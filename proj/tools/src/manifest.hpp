#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ecc::cli {

struct FileDigest {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Everything needed to repeat a run: inputs by digest, every effective
/// setting, the argument vector, and digests of what was written.
struct RunManifest {
  std::string tool_version;
  std::string command;
  std::vector<std::string> argv;
  std::vector<FileDigest> inputs;
  std::vector<std::pair<std::string, std::string>> config;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<FileDigest> outputs;
  std::vector<std::string> warnings;
};

FileDigest digest_of(const std::filesystem::path& path, std::string display_name);

std::string manifest_json(const RunManifest& manifest);

/// Writes `manifest.json` into `dir`.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace ecc::cli
