#include "staging.hpp"

#include <system_error>

#include <fmt/format.h>
#include <unistd.h>

#include "ecc/error.hpp"

namespace ecc::cli {
namespace fs = std::filesystem;

StagedDirectory::StagedDirectory(fs::path target) : target_(std::move(target)) {
  target_ = target_.lexically_normal();
  if (target_.filename().empty()) target_ = target_.parent_path();
  if (target_.empty()) throw Error(ErrorKind::argument, "output directory must not be empty");
  if (fs::exists(target_) && !fs::is_directory(target_)) {
    throw Error(ErrorKind::io, fmt::format("output path '{}' exists and is not a directory", target_.string()));
  }

  fs::path parent = target_.parent_path();
  if (parent.empty()) parent = ".";
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorKind::io, fmt::format("cannot create '{}': {}", parent.string(), ec.message()));

  staging_ = parent / fmt::format(".{}.staging-{}", target_.filename().string(), ::getpid());
  fs::remove_all(staging_, ec);
  if (!fs::create_directory(staging_, ec) || ec) {
    throw Error(ErrorKind::io, fmt::format("cannot create staging directory '{}'", staging_.string()));
  }
}

StagedDirectory::~StagedDirectory() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedDirectory::commit() {
  std::error_code ec;
  if (!fs::exists(target_)) {
    fs::rename(staging_, target_, ec);
    if (!ec) {
      committed_ = true;
      return;
    }
    fs::create_directory(target_, ec);
    if (ec) throw Error(ErrorKind::io, fmt::format("cannot create '{}': {}", target_.string(), ec.message()));
  }
  for (const auto& entry : fs::directory_iterator(staging_)) {
    fs::rename(entry.path(), target_ / entry.path().filename(), ec);
    if (ec) {
      throw Error(ErrorKind::io, fmt::format("cannot move '{}' into '{}': {}", entry.path().filename().string(),
                                             target_.string(), ec.message()));
    }
  }
  fs::remove_all(staging_, ec);
  committed_ = true;
}

}  // namespace ecc::cli
