#include "ecc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ecc/error.hpp"
#include "ecc/parallel.hpp"
#include "ecc/stats.hpp"

namespace ecc {
namespace {

constexpr std::size_t kItemBlock = 4096;
constexpr std::size_t kUserBlock = 4096;
constexpr double kTieTolerance = 1e-12;

/// z-scores the entries of `values` selected by `member`, leaving the rest missing.
std::vector<double> standardize_subset(const std::vector<double>& values, const std::vector<std::uint8_t>& member) {
  std::vector<double> population;
  population.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (member[k]) population.push_back(values[k]);
  }
  std::vector<double> out(values.size(), kMissing);
  if (population.empty()) return out;
  const auto z = stats::zscore(population);
  std::size_t next = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (member[k]) out[k] = z[next++];
  }
  return out;
}

}  // namespace

std::string_view to_string(Standardization s) noexcept {
  return s == Standardization::per_window ? "per-window" : "global";
}

Standardization parse_standardization(std::string_view text) {
  if (text == "per-window") return Standardization::per_window;
  if (text == "global") return Standardization::global;
  throw Error(ErrorKind::config,
              fmt::format("unknown standardization '{}' (expected per-window or global)", text));
}

std::optional<std::size_t> RarityTable::find(ItemId item, WindowIndex window) const {
  if (item >= item_count()) return std::nullopt;
  const auto first = cell_windows.begin() + static_cast<std::ptrdiff_t>(item_offsets[item]);
  const auto last = cell_windows.begin() + static_cast<std::ptrdiff_t>(item_offsets[item + 1]);
  const auto it = std::lower_bound(first, last, window);
  if (it == last || *it != window) return std::nullopt;
  return static_cast<std::size_t>(it - cell_windows.begin());
}

RarityTable compute_item_rarity(const WindowedFeedbackTable& wf, const RarityOptions& options) {
  if (wf.empty()) throw Error(ErrorKind::validation, "windowed feedback table is empty");

  RarityTable rt;
  rt.options = options;
  const std::size_t items = wf.item_count;

  // Each (user, item, window) triple is unique, so the number of triples in an
  // (item, window) run is the number of distinct users.
  std::vector<std::size_t> cells_per_item(items, 0);
  parallel_for(items, kItemBlock, [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      std::size_t cells = 0;
      for (std::size_t p = wf.item_offsets[i]; p < wf.item_offsets[i + 1]; ++p) {
        if (p == wf.item_offsets[i] || wf.windows[wf.by_item[p]] != wf.windows[wf.by_item[p - 1]]) ++cells;
      }
      cells_per_item[i] = cells;
    }
  });
  rt.item_offsets.assign(items + 1, 0);
  for (std::size_t i = 0; i < items; ++i) rt.item_offsets[i + 1] = rt.item_offsets[i] + cells_per_item[i];
  const std::size_t cells = rt.item_offsets.back();
  rt.cell_items.resize(cells);
  rt.cell_windows.resize(cells);
  rt.cell_users.resize(cells);
  rt.raw.resize(cells);

  const double log_scale = options.log_base == LogBase::natural ? 1.0 : 1.0 / std::log(10.0);
  parallel_for(items, kItemBlock, [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      std::size_t c = rt.item_offsets[i];
      std::size_t p = wf.item_offsets[i];
      const std::size_t end = wf.item_offsets[i + 1];
      while (p < end) {
        const WindowIndex w = wf.windows[wf.by_item[p]];
        std::uint32_t users = 0;
        for (; p < end && wf.windows[wf.by_item[p]] == w; ++p) ++users;
        rt.cell_items[c] = static_cast<ItemId>(i);
        rt.cell_windows[c] = w;
        rt.cell_users[c] = users;
        rt.raw[c] = -std::log(static_cast<double>(users)) * log_scale;
        ++c;
      }
    }
  });

  if (options.standardization == Standardization::global) {
    rt.z = stats::zscore(rt.raw);
  } else {
    // Group cells by window (stable in cell order) and standardize each group.
    std::vector<std::size_t> per_window(wf.window_count + 1, 0);
    for (auto w : rt.cell_windows) ++per_window[w + 1];
    for (std::size_t w = 1; w < per_window.size(); ++w) per_window[w] += per_window[w - 1];
    std::vector<std::size_t> cursor(per_window.begin(), per_window.end() - 1);
    std::vector<std::size_t> grouped(cells);
    for (std::size_t c = 0; c < cells; ++c) grouped[cursor[rt.cell_windows[c]]++] = c;

    rt.z.assign(cells, 0.0);
    parallel_for(wf.window_count, 1, [&](std::size_t wb, std::size_t we) {
      std::vector<double> population;
      for (std::size_t w = wb; w < we; ++w) {
        if (per_window[w] == per_window[w + 1]) continue;
        population.clear();
        for (std::size_t k = per_window[w]; k < per_window[w + 1]; ++k) population.push_back(rt.raw[grouped[k]]);
        const auto z = stats::zscore(population);
        for (std::size_t k = per_window[w]; k < per_window[w + 1]; ++k) rt.z[grouped[k]] = z[k - per_window[w]];
      }
    });
  }

  rt.representative.assign(items, kMissing);
  rt.percentile.assign(items, kMissing);
  std::vector<double> ranked;
  ranked.reserve(items);
  for (std::size_t i = 0; i < items; ++i) {
    const std::size_t b = rt.item_offsets[i];
    const std::size_t e = rt.item_offsets[i + 1];
    if (b == e) continue;
    double sum = 0.0;
    for (std::size_t c = b; c < e; ++c) sum += rt.z[c];
    rt.representative[i] = sum / static_cast<double>(e - b);
    ranked.push_back(rt.representative[i]);
  }
  std::sort(ranked.begin(), ranked.end());
  const double n = static_cast<double>(ranked.size());
  for (std::size_t i = 0; i < items; ++i) {
    if (is_missing(rt.representative[i])) continue;
    // means of equal z values can differ in the last bits, so near-equal counts as a tie
    const double x = rt.representative[i];
    const double cut = x + kTieTolerance * std::max(1.0, std::fabs(x));
    const auto at_or_below = std::upper_bound(ranked.begin(), ranked.end(), cut) - ranked.begin();
    rt.percentile[i] = static_cast<double>(at_or_below) / n;
  }
  return rt;
}

UserEccentricity compute_user_eccentricity(const WindowedFeedbackTable& wf, const RarityTable& rarity) {
  UserEccentricity ue;
  ue.raw.assign(wf.user_count, kMissing);
  std::vector<std::uint8_t> active(wf.user_count, 0);

  parallel_for(wf.user_count, kUserBlock, [&](std::size_t ub, std::size_t uend) {
    for (std::size_t u = ub; u < uend; ++u) {
      const std::size_t b = wf.user_offsets[u];
      const std::size_t e = wf.user_offsets[u + 1];
      if (b == e) continue;
      double weighted = 0.0;
      double weight = 0.0;
      for (std::size_t t = b; t < e; ++t) {
        const auto cell = rarity.find(wf.items[t], wf.windows[t]);
        if (!cell) {
          throw Error(ErrorKind::internal,
                      fmt::format("rarity table has no cell for item {} in window {}", wf.items[t], wf.windows[t]));
        }
        weighted += wf.values[t] * rarity.z[*cell];
        weight += wf.values[t];
      }
      if (!(weight > 0.0)) {
        throw Error(ErrorKind::internal, fmt::format("user {} has zero total feedback weight", u));
      }
      ue.raw[u] = weighted / weight;
      active[u] = 1;
    }
  });
  ue.z = standardize_subset(ue.raw, active);
  return ue;
}

ItemEccentricity compute_item_eccentricity(const WindowedFeedbackTable& wf, const std::vector<double>& user_z,
                                           bool exclusion) {
  if (user_z.size() != wf.user_count) {
    throw Error(ErrorKind::argument, "user scores do not match the windowed table");
  }
  ItemEccentricity ie;
  ie.raw.assign(wf.item_count, kMissing);
  ie.excluded.assign(wf.item_count, 0);
  std::vector<std::uint8_t> population(wf.item_count, 0);

  parallel_for(wf.item_count, kItemBlock, [&](std::size_t ib, std::size_t iend) {
    for (std::size_t i = ib; i < iend; ++i) {
      const std::size_t b = wf.item_offsets[i];
      const std::size_t e = wf.item_offsets[i + 1];
      if (b == e) continue;
      // Summing f_{u,i,t} * UE_u over windows equals f_{u,i} * UE_u with f_{u,i} = sum_t f_{u,i,t}.
      double weighted = 0.0;
      double weight = 0.0;
      bool alone_everywhere = true;
      for (std::size_t p = b; p < e; ++p) {
        const std::size_t t = wf.by_item[p];
        const double z = user_z[wf.users[t]];
        if (is_missing(z)) throw Error(ErrorKind::internal, "consumer without a user eccentricity score");
        weighted += wf.values[t] * z;
        weight += wf.values[t];
        // Rows are ordered by (window, user): a repeated window means a co-consumer.
        if (p > b && wf.windows[wf.by_item[p - 1]] == wf.windows[t]) alone_everywhere = false;
      }
      ie.raw[i] = weighted / weight;
      if (exclusion && alone_everywhere) {
        ie.excluded[i] = 1;
      } else {
        population[i] = 1;
      }
    }
  });
  for (std::size_t i = 0; i < wf.item_count; ++i) {
    if (ie.excluded[i]) ie.excluded_items.push_back(static_cast<ItemId>(i));
  }
  ie.z = standardize_subset(ie.raw, population);
  return ie;
}

EccentricityScores compute_scores(const WindowedFeedbackTable& wf, const RarityTable& rarity, bool exclusion) {
  auto ue = compute_user_eccentricity(wf, rarity);
  auto ie = compute_item_eccentricity(wf, ue.z, exclusion);
  EccentricityScores s;
  s.user_raw = std::move(ue.raw);
  s.user_z = std::move(ue.z);
  s.item_raw = std::move(ie.raw);
  s.item_z = std::move(ie.z);
  s.excluded = std::move(ie.excluded);
  s.excluded_items = std::move(ie.excluded_items);
  return s;
}

PipelineResult run_pipeline(const EventTable& events, const MetricsConfig& config) {
  PipelineResult r;
  r.windowed = assign_windows(events, config.window, config.dedupe);
  r.rarity = compute_item_rarity(r.windowed, config.rarity);
  r.scores = compute_scores(r.windowed, r.rarity, config.exclusion);
  return r;
}

}  // namespace ecc
