#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "ecc/ingest.hpp"
#include "ecc/windowing.hpp"

namespace ecc {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Population over which raw item rarity is z-scored.
enum class Standardization { per_window, global };

std::string_view to_string(Standardization s) noexcept;
Standardization parse_standardization(std::string_view text);

enum class LogBase { natural, base10 };

struct RarityOptions {
  Standardization standardization = Standardization::per_window;
  LogBase log_base = LogBase::natural;
};

/// Item rarity per active (item, window) cell plus per-item summaries.
///
/// Cells are sorted by (item, window); `item_offsets` indexes each item's
/// cells. Raw rarity is -log of the number of distinct users on the item in
/// the window, so it is 0 for a single consumer and negative otherwise
/// (larger means rarer).
struct RarityTable {
  std::vector<ItemId> cell_items;
  std::vector<WindowIndex> cell_windows;
  std::vector<std::uint32_t> cell_users;  // |F_{i,t}|
  std::vector<double> raw;
  std::vector<double> z;
  std::vector<std::size_t> item_offsets;

  // Per item; kMissing for items without any active window.
  std::vector<double> representative;  // mean z over the item's active windows
  std::vector<double> percentile;      // rank of `representative` in (0, 1]

  RarityOptions options;

  std::size_t cell_count() const noexcept { return raw.size(); }
  std::size_t item_count() const noexcept { return representative.size(); }
  std::size_t active_windows(ItemId item) const noexcept {
    return item_offsets[item + 1] - item_offsets[item];
  }
  std::optional<std::size_t> find(ItemId item, WindowIndex window) const;
};

RarityTable compute_item_rarity(const WindowedFeedbackTable& wf, const RarityOptions& options = {});

/// Pre- and post-standardization eccentricities. Entries outside the
/// standardization population are kMissing.
struct EccentricityScores {
  std::vector<double> user_raw;
  std::vector<double> user_z;
  std::vector<double> item_raw;
  std::vector<double> item_z;
  std::vector<std::uint8_t> excluded;  // per item flag
  std::vector<ItemId> excluded_items;  // ascending

  bool user_scored(UserId u) const noexcept { return !is_missing(user_z[u]); }
  bool item_scored(ItemId i) const noexcept { return !is_missing(item_z[i]); }
};

struct UserEccentricity {
  std::vector<double> raw;
  std::vector<double> z;
};

UserEccentricity compute_user_eccentricity(const WindowedFeedbackTable& wf, const RarityTable& rarity);

struct ItemEccentricity {
  std::vector<double> raw;
  std::vector<double> z;
  std::vector<std::uint8_t> excluded;
  std::vector<ItemId> excluded_items;
};

/// `user_z` must come from compute_user_eccentricity on the same table.
ItemEccentricity compute_item_eccentricity(const WindowedFeedbackTable& wf, const std::vector<double>& user_z,
                                           bool exclusion = true);

struct MetricsConfig {
  WindowConfig window;
  DedupeMode dedupe = DedupeMode::sum;
  RarityOptions rarity;
  bool exclusion = true;
};

struct PipelineResult {
  WindowedFeedbackTable windowed;
  RarityTable rarity;
  EccentricityScores scores;
};

/// Windowing, item rarity, user eccentricity and item eccentricity in one call.
PipelineResult run_pipeline(const EventTable& events, const MetricsConfig& config = {});

/// Rarity and eccentricity for an already windowed table.
EccentricityScores compute_scores(const WindowedFeedbackTable& wf, const RarityTable& rarity, bool exclusion = true);

}  // namespace ecc
