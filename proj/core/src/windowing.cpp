#include "ecc/windowing.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ecc/error.hpp"
#include "ecc/parallel.hpp"

namespace ecc {
namespace {

constexpr std::size_t kUserBlock = 2048;
constexpr std::size_t kItemBlock = 4096;

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

/// Exclusive prefix sum of per-group counts into offsets of size n + 1.
std::vector<std::size_t> offsets_from_counts(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> offsets(counts.size() + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), offsets.begin() + 1);
  return offsets;
}

}  // namespace

std::string_view to_string(DedupeMode mode) noexcept {
  return mode == DedupeMode::sum ? "sum" : "last";
}

DedupeMode parse_dedupe(std::string_view text) {
  if (text == "sum") return DedupeMode::sum;
  if (text == "last") return DedupeMode::last;
  throw Error(ErrorKind::config, fmt::format("unknown dedupe mode '{}' (expected sum or last)", text));
}

std::optional<Timestamp> parse_origin(std::string_view text) {
  if (text.empty() || text == "auto") return std::nullopt;
  Timestamp epoch = 0;
  if (parse_int(text, epoch)) return epoch;

  auto fail = [&]() -> Error {
    return Error(ErrorKind::config,
                 fmt::format("cannot parse origin '{}' (expected auto, epoch seconds or ISO-8601 UTC)", text));
  };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') throw fail();
  int y = 0;
  unsigned mo = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d)) {
    throw fail();
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok()) throw fail();
  Timestamp seconds = std::chrono::sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay;

  std::string_view rest = text.substr(10);
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != ' ') throw fail();
    rest.remove_prefix(1);
    if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
    if (rest.size() != 8 || rest[2] != ':' || rest[5] != ':') throw fail();
    int h = 0, mi = 0, s = 0;
    if (!parse_int(rest.substr(0, 2), h) || !parse_int(rest.substr(3, 2), mi) || !parse_int(rest.substr(6, 2), s) ||
        h > 23 || mi > 59 || s > 60) {
      throw fail();
    }
    seconds += h * 3600 + mi * 60 + s;
  }
  return seconds;
}

std::string format_iso8601(Timestamp ts) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{ts}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

Timestamp resolve_origin(const EventTable& table, const WindowConfig& config) {
  if (table.empty()) throw Error(ErrorKind::validation, "event table is empty");
  const Timestamp min_ts = *std::min_element(table.timestamps.begin(), table.timestamps.end());
  if (!config.origin) return floor_div(min_ts, kSecondsPerDay) * kSecondsPerDay;
  if (*config.origin > min_ts) {
    throw Error(ErrorKind::config,
                fmt::format("window origin {} is later than the earliest event ({})", format_iso8601(*config.origin),
                            format_iso8601(min_ts)));
  }
  return *config.origin;
}

WindowedFeedbackTable assign_windows(const EventTable& table, const WindowConfig& config, DedupeMode dedupe) {
  if (config.width_days < 1) {
    throw Error(ErrorKind::config, fmt::format("window width must be at least 1 day, got {}", config.width_days));
  }
  const Timestamp origin = resolve_origin(table, config);
  const std::int64_t width = config.width_days * kSecondsPerDay;
  const std::size_t n = table.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::validation, "event tables above 2^32 rows are not supported");
  }

  WindowedFeedbackTable wf;
  wf.user_count = table.user_count();
  wf.item_count = table.item_count();
  wf.origin = origin;
  wf.width_seconds = width;

  std::vector<WindowIndex> event_window(n);
  parallel_for(n, 1 << 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const Timestamp k = floor_div(table.timestamps[r] - origin, width);
      if (k < 0 || k > std::numeric_limits<WindowIndex>::max()) {
        throw Error(ErrorKind::config, fmt::format("event at {} falls outside the window range starting at {}",
                                                   table.timestamps[r], origin));
      }
      event_window[r] = static_cast<WindowIndex>(k);
    }
  });

  // Counting sort of rows by user keeps file order within a user.
  std::vector<std::size_t> per_user(wf.user_count, 0);
  for (auto u : table.users) ++per_user[u];
  const auto event_offsets = offsets_from_counts(per_user);
  std::vector<std::uint32_t> order(n);
  {
    std::vector<std::size_t> cursor(event_offsets.begin(), event_offsets.end() - 1);
    for (std::size_t r = 0; r < n; ++r) order[cursor[table.users[r]]++] = static_cast<std::uint32_t>(r);
  }

  // Within a user: (item, window, row). Then count distinct triples.
  std::vector<std::size_t> triples_per_user(wf.user_count, 0);
  parallel_for(wf.user_count, kUserBlock, [&](std::size_t ub, std::size_t ue) {
    for (std::size_t u = ub; u < ue; ++u) {
      auto first = order.begin() + static_cast<std::ptrdiff_t>(event_offsets[u]);
      auto last = order.begin() + static_cast<std::ptrdiff_t>(event_offsets[u + 1]);
      std::sort(first, last, [&](std::uint32_t a, std::uint32_t b) {
        if (table.items[a] != table.items[b]) return table.items[a] < table.items[b];
        if (event_window[a] != event_window[b]) return event_window[a] < event_window[b];
        return a < b;
      });
      std::size_t distinct = 0;
      for (auto it = first; it != last; ++it) {
        if (it == first || table.items[*it] != table.items[*(it - 1)] || event_window[*it] != event_window[*(it - 1)]) {
          ++distinct;
        }
      }
      triples_per_user[u] = distinct;
    }
  });

  wf.user_offsets = offsets_from_counts(triples_per_user);
  const std::size_t m = wf.user_offsets.back();
  wf.users.resize(m);
  wf.items.resize(m);
  wf.windows.resize(m);
  wf.values.resize(m);
  wf.counts.resize(m);

  parallel_for(wf.user_count, kUserBlock, [&](std::size_t ub, std::size_t ue) {
    for (std::size_t u = ub; u < ue; ++u) {
      std::size_t out = wf.user_offsets[u];
      std::size_t i = event_offsets[u];
      const std::size_t end = event_offsets[u + 1];
      while (i < end) {
        const std::uint32_t head = order[i];
        const ItemId item = table.items[head];
        const WindowIndex window = event_window[head];
        double value = 0.0;
        std::uint32_t count = 0;
        std::uint32_t latest = head;
        for (; i < end && table.items[order[i]] == item && event_window[order[i]] == window; ++i) {
          const std::uint32_t r = order[i];
          value += table.values[r];
          ++count;
          if (table.timestamps[r] >= table.timestamps[latest]) latest = r;
        }
        wf.users[out] = static_cast<UserId>(u);
        wf.items[out] = item;
        wf.windows[out] = window;
        if (dedupe == DedupeMode::last) {
          wf.values[out] = table.values[latest];
          wf.counts[out] = 1;
        } else {
          wf.values[out] = value;
          wf.counts[out] = count;
        }
        ++out;
      }
    }
  });

  std::vector<std::size_t> per_item(wf.item_count, 0);
  WindowIndex max_window = 0;
  for (std::size_t t = 0; t < m; ++t) {
    ++per_item[wf.items[t]];
    max_window = std::max(max_window, wf.windows[t]);
  }
  wf.window_count = m == 0 ? 0 : std::size_t{max_window} + 1;
  wf.item_offsets = offsets_from_counts(per_item);
  wf.by_item.resize(m);
  {
    std::vector<std::size_t> cursor(wf.item_offsets.begin(), wf.item_offsets.end() - 1);
    for (std::size_t t = 0; t < m; ++t) wf.by_item[cursor[wf.items[t]]++] = static_cast<std::uint32_t>(t);
  }
  parallel_for(wf.item_count, kItemBlock, [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      auto first = wf.by_item.begin() + static_cast<std::ptrdiff_t>(wf.item_offsets[i]);
      auto last = wf.by_item.begin() + static_cast<std::ptrdiff_t>(wf.item_offsets[i + 1]);
      // Rows are already in user order; a stable sort by window yields (window, user).
      std::stable_sort(first, last, [&](std::uint32_t a, std::uint32_t b) { return wf.windows[a] < wf.windows[b]; });
    }
  });
  return wf;
}

std::vector<WindowCensusRow> window_census(const WindowedFeedbackTable& wf) {
  std::vector<WindowCensusRow> rows(wf.window_count);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].window = static_cast<WindowIndex>(k);
    rows[k].start = wf.origin + static_cast<Timestamp>(k) * wf.width_seconds;
  }
  for (std::size_t t = 0; t < wf.size(); ++t) rows[wf.windows[t]].events += wf.counts[t];

  for (std::size_t i = 0; i < wf.item_count; ++i) {
    WindowIndex previous = 0;
    for (std::size_t p = wf.item_offsets[i]; p < wf.item_offsets[i + 1]; ++p) {
      const WindowIndex w = wf.windows[wf.by_item[p]];
      if (p == wf.item_offsets[i] || w != previous) ++rows[w].active_items;
      previous = w;
    }
  }

  std::vector<WindowIndex> scratch;
  for (std::size_t u = 0; u < wf.user_count; ++u) {
    scratch.assign(wf.windows.begin() + static_cast<std::ptrdiff_t>(wf.user_offsets[u]),
                   wf.windows.begin() + static_cast<std::ptrdiff_t>(wf.user_offsets[u + 1]));
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    for (auto w : scratch) ++rows[w].active_users;
  }
  return rows;
}

}  // namespace ecc
