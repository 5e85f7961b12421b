#include "manifest.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "digest.hpp"
#include "ecc/report_io.hpp"

namespace ecc::cli {
namespace {

std::string utc_text(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::time_point_cast<std::chrono::milliseconds>(t);
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", ms);
}

nlohmann::ordered_json files_json(const std::vector<FileDigest>& files) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return out;
}

}  // namespace

FileDigest digest_of(const std::filesystem::path& path, std::string display_name) {
  return {std::move(display_name), sha256_file(path), std::filesystem::file_size(path)};
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) config[k] = v;
  const nlohmann::ordered_json doc = {
      {"tool", "ecc"},
      {"version", m.tool_version},
      {"command", m.command},
      {"argv", m.argv},
      {"started_at", utc_text(m.started)},
      {"finished_at", utc_text(m.finished)},
      {"inputs", files_json(m.inputs)},
      {"config", config},
      {"outputs", files_json(m.outputs)},
      {"warnings", m.warnings}};
  return doc.dump(2) + "\n";
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  const auto path = dir / "manifest.json";
  io::write_text(path, manifest_json(manifest));
  return path;
}

}  // namespace ecc::cli
