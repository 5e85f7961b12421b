#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecc/ingest.hpp"

namespace ecc {

using WindowIndex = std::uint32_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

struct WindowConfig {
  std::int64_t width_days = 28;
  std::optional<Timestamp> origin;  // nullopt: minimum timestamp truncated to midnight UTC
};

enum class DedupeMode { sum, last };

std::string_view to_string(DedupeMode mode) noexcept;
DedupeMode parse_dedupe(std::string_view text);

/// Parses `auto`, integer epoch seconds, or an ISO-8601 UTC date/time
/// (`2015-03-01`, `2015-03-01T12:00:00Z`). nullopt means auto.
std::optional<Timestamp> parse_origin(std::string_view text);
std::string format_iso8601(Timestamp ts);

/// Origin actually used for a table: validated explicit origin, or the
/// table's minimum timestamp floored to a UTC day boundary.
Timestamp resolve_origin(const EventTable& table, const WindowConfig& config);

/// Aggregated feedback per unique (user, item, window) triple.
///
/// Rows are sorted by (user, item, window). `user_offsets` indexes the rows
/// of each user; `by_item` lists row indices grouped by item (via
/// `item_offsets`) and ordered by (window, user) within an item.
struct WindowedFeedbackTable {
  std::vector<UserId> users;
  std::vector<ItemId> items;
  std::vector<WindowIndex> windows;
  std::vector<double> values;
  std::vector<std::uint32_t> counts;

  std::vector<std::size_t> user_offsets;  // size user_count + 1
  std::vector<std::size_t> item_offsets;  // size item_count + 1
  std::vector<std::uint32_t> by_item;

  std::size_t user_count = 0;  // dictionary sizes of the source table
  std::size_t item_count = 0;
  std::size_t window_count = 0;  // 1 + largest window index in use
  Timestamp origin = 0;
  std::int64_t width_seconds = 0;

  std::size_t size() const noexcept { return users.size(); }
  bool empty() const noexcept { return users.empty(); }
};

WindowedFeedbackTable assign_windows(const EventTable& table, const WindowConfig& config,
                                     DedupeMode dedupe = DedupeMode::sum);

struct WindowCensusRow {
  WindowIndex window = 0;
  Timestamp start = 0;
  std::size_t events = 0;
  std::size_t active_items = 0;
  std::size_t active_users = 0;
};

/// One row per window index in [0, window_count), gaps reported as zeros.
std::vector<WindowCensusRow> window_census(const WindowedFeedbackTable& wf);

}  // namespace ecc
