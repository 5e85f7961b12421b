#pragma once

#include <filesystem>

namespace ecc::cli {

/// Output files are written into a hidden sibling directory and moved into
/// the target only on commit, so a failed run leaves nothing behind.
class StagedDirectory {
public:
  explicit StagedDirectory(std::filesystem::path target);
  ~StagedDirectory();

  StagedDirectory(const StagedDirectory&) = delete;
  StagedDirectory& operator=(const StagedDirectory&) = delete;

  const std::filesystem::path& path() const noexcept { return staging_; }
  const std::filesystem::path& target() const noexcept { return target_; }

  /// Moves every staged file into the target directory (created if absent,
  /// same-named files replaced).
  void commit();

private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

}  // namespace ecc::cli
