#include "ecc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "ecc/error.hpp"
#include "ecc/parallel.hpp"

namespace ecc::analysis {
namespace {

double population_variance(const std::vector<double>& v) {
  if (v.empty()) return kMissing;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kMissing;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

/// Distinct users per item in a windowed table.
std::vector<std::size_t> distinct_users_per_item(const WindowedFeedbackTable& wf) {
  std::vector<std::size_t> users(wf.item_count, 0);
  for (std::size_t t = 0; t < wf.size(); ++t) {
    // Rows are sorted by (user, item, window): count each (user, item) run once.
    if (t == 0 || wf.users[t] != wf.users[t - 1] || wf.items[t] != wf.items[t - 1]) ++users[wf.items[t]];
  }
  return users;
}

std::string attribute_key(const AttributeValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return fmt::format("{:.17g}", std::get<double>(v));
}

}  // namespace

// ---------------------------------------------------------------------------

DensityReport density_report(const EccentricityScores& scores, std::size_t grid_size) {
  std::vector<double> users, items;
  for (double z : scores.user_z) {
    if (!is_missing(z)) users.push_back(z);
  }
  for (double z : scores.item_z) {
    if (!is_missing(z)) items.push_back(z);
  }
  DensityReport r;
  try {
    r.user = stats::kde(users, grid_size);
  } catch (const Error& e) {
    throw Error(ErrorKind::degenerate, fmt::format("user eccentricity density: {}", e.what()));
  }
  try {
    r.item = stats::kde(items, grid_size);
  } catch (const Error& e) {
    throw Error(ErrorKind::degenerate, fmt::format("item eccentricity density: {}", e.what()));
  }
  return r;
}

double density_mode(const stats::DensitySeries& series) {
  if (series.grid.empty()) throw Error(ErrorKind::argument, "empty density series");
  const auto it = std::max_element(series.density.begin(), series.density.end());
  return series.grid[static_cast<std::size_t>(it - series.density.begin())];
}

// ---------------------------------------------------------------------------

ScatterReport rarity_eccentricity_scatter(const RarityTable& rarity, const EccentricityScores& scores,
                                          std::size_t min_windows) {
  ScatterReport r;
  r.min_windows = min_windows;
  for (std::size_t i = 0; i < rarity.item_count(); ++i) {
    const auto item = static_cast<ItemId>(i);
    if (i >= scores.item_z.size() || !scores.item_scored(item)) continue;
    const std::size_t windows = rarity.active_windows(item);
    if (windows <= min_windows) continue;
    r.points.push_back({item, rarity.representative[i], scores.item_z[i], windows});
  }
  if (r.points.size() < 2) {
    throw Error(ErrorKind::degenerate,
                fmt::format("scatter needs at least two items active in more than {} windows (found {})", min_windows,
                            r.points.size()));
  }
  std::vector<double> x, y;
  x.reserve(r.points.size());
  y.reserve(r.points.size());
  for (const auto& p : r.points) {
    x.push_back(p.rarity);
    y.push_back(p.eccentricity);
  }
  r.fit = stats::ols_fit(x, y);

  std::vector<std::size_t> order(r.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (r.points[a].rarity != r.points[b].rarity) return r.points[a].rarity < r.points[b].rarity;
    return r.points[a].item < r.points[b].item;
  });
  std::array<std::vector<double>, 10> deciles;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    deciles[rank * 10 / order.size()].push_back(r.points[order[rank]].eccentricity);
  }
  for (std::size_t d = 0; d < 10; ++d) {
    r.decile_size[d] = deciles[d].size();
    r.decile_variance[d] = population_variance(deciles[d]);
  }
  return r;
}

// ---------------------------------------------------------------------------

double TransitionMatrix::diagonal_mass() const {
  double sum = 0.0;
  for (std::size_t g = 0; g < bins; ++g) sum += matrix[g][g];
  return sum / static_cast<double>(bins);
}

std::vector<std::size_t> quantile_bins(std::span<const double> scores, std::span<const ItemId> ids, std::size_t bins) {
  if (scores.size() != ids.size()) throw Error(ErrorKind::argument, "quantile_bins: scores and ids differ in length");
  if (bins == 0) throw Error(ErrorKind::argument, "quantile_bins needs at least one bin");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return ids[a] < ids[b];
  });
  std::vector<std::size_t> bin(scores.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) bin[order[rank]] = rank * bins / order.size();
  return bin;
}

TransitionMatrix transition_matrix(std::span<const std::size_t> first_bins, std::span<const std::size_t> second_bins,
                                   std::size_t bins) {
  if (first_bins.size() != second_bins.size()) throw Error(ErrorKind::argument, "transition_matrix: size mismatch");
  TransitionMatrix m;
  m.bins = bins;
  m.items = first_bins.size();
  m.matrix.assign(bins, std::vector<double>(bins, 0.0));
  m.row_counts.assign(bins, 0);
  for (std::size_t k = 0; k < first_bins.size(); ++k) {
    m.matrix[first_bins[k]][second_bins[k]] += 1.0;
    ++m.row_counts[first_bins[k]];
  }
  for (std::size_t g = 0; g < bins; ++g) {
    if (m.row_counts[g] == 0) continue;
    for (double& cell : m.matrix[g]) cell /= static_cast<double>(m.row_counts[g]);
  }
  return m;
}

TransitionMatrix stability_between(const EventTable& first, const EventTable& second, const StabilityOptions& options,
                                   std::optional<Timestamp> release_cutoff) {
  if (first.empty() || second.empty()) throw Error(ErrorKind::analysis, "stability analysis needs two nonempty periods");
  if (first.item_count() != second.item_count()) {
    throw Error(ErrorKind::argument, "both periods must share the item dictionary");
  }
  if (options.bins == 0) throw Error(ErrorKind::config, "stability analysis needs at least one bin");

  const PipelineResult p1 = run_pipeline(first, options.metrics);
  const PipelineResult p2 = run_pipeline(second, options.metrics);
  const auto users1 = distinct_users_per_item(p1.windowed);
  const auto users2 = distinct_users_per_item(p2.windowed);

  std::vector<Timestamp> first_seen(first.item_count(), std::numeric_limits<Timestamp>::max());
  for (const EventTable* t : {&first, &second}) {
    for (std::size_t r = 0; r < t->size(); ++r) {
      first_seen[t->items[r]] = std::min(first_seen[t->items[r]], t->timestamps[r]);
    }
  }

  std::vector<ItemId> retained;
  std::vector<double> z1, z2;
  for (std::size_t i = 0; i < first.item_count(); ++i) {
    const auto item = static_cast<ItemId>(i);
    if (!p1.scores.item_scored(item) || !p2.scores.item_scored(item)) continue;
    if (users1[i] <= options.min_users || users2[i] <= options.min_users) continue;
    if (release_cutoff && first_seen[i] >= *release_cutoff) continue;
    retained.push_back(item);
    z1.push_back(p1.scores.item_z[i]);
    z2.push_back(p2.scores.item_z[i]);
  }
  if (retained.empty()) {
    throw Error(ErrorKind::analysis,
                fmt::format("no item has more than {} users in both periods and passes the release filter",
                            options.min_users));
  }
  const auto b1 = quantile_bins(z1, retained, options.bins);
  const auto b2 = quantile_bins(z2, retained, options.bins);
  TransitionMatrix m = transition_matrix(b1, b2, options.bins);
  m.min_users = options.min_users;
  m.release_cutoff = release_cutoff;
  return m;
}

Timestamp median_timestamp(const EventTable& events) {
  if (events.empty()) throw Error(ErrorKind::validation, "event table is empty");
  std::vector<Timestamp> ts = events.timestamps;
  const auto mid = ts.begin() + static_cast<std::ptrdiff_t>((ts.size() - 1) / 2);
  std::nth_element(ts.begin(), mid, ts.end());
  return *mid;
}

TransitionMatrix stability_analysis(const EventTable& events, Timestamp split, const StabilityOptions& options) {
  std::vector<std::size_t> before, after;
  Timestamp min_ts = std::numeric_limits<Timestamp>::max();
  for (std::size_t r = 0; r < events.size(); ++r) {
    (events.timestamps[r] < split ? before : after).push_back(r);
    min_ts = std::min(min_ts, events.timestamps[r]);
  }
  if (before.empty() || after.empty()) {
    throw Error(ErrorKind::analysis, fmt::format("split at {} leaves an empty period", format_iso8601(split)));
  }
  std::optional<Timestamp> cutoff;
  if (options.release_filter) cutoff = min_ts + (split - min_ts) / 2;
  TransitionMatrix m = stability_between(select_rows(events, before), select_rows(events, after), options, cutoff);
  m.split = split;
  return m;
}

// ---------------------------------------------------------------------------

std::vector<ItemFeatures> item_features(const WindowedFeedbackTable& wf, const ItemMetadata* metadata,
                                        const std::string& artist_attribute) {
  std::vector<ItemFeatures> features(wf.item_count);

  parallel_for(wf.item_count, 1024, [&](std::size_t ib, std::size_t ie) {
    struct PerUser {
      UserId user;
      double value;
      std::uint32_t count;
    };
    std::vector<PerUser> rows;
    std::vector<double> totals;
    for (std::size_t i = ib; i < ie; ++i) {
      const std::size_t b = wf.item_offsets[i];
      const std::size_t e = wf.item_offsets[i + 1];
      if (b == e) continue;
      ItemFeatures& f = features[i];
      const WindowIndex first_window = wf.windows[wf.by_item[b]];
      rows.clear();
      for (std::size_t p = b; p < e; ++p) {
        const std::size_t t = wf.by_item[p];
        rows.push_back({wf.users[t], wf.values[t], wf.counts[t]});
        f.events += wf.counts[t];
        if (wf.windows[t] <= first_window + 1) f.early_events += wf.counts[t];
      }
      std::sort(rows.begin(), rows.end(), [](const PerUser& a, const PerUser& c) { return a.user < c.user; });
      totals.clear();
      for (std::size_t k = 0; k < rows.size();) {
        double value = 0.0;
        std::uint64_t count = 0;
        std::size_t j = k;
        for (; j < rows.size() && rows[j].user == rows[k].user; ++j) {
          value += rows[j].value;
          count += rows[j].count;
        }
        totals.push_back(value);
        if (count == 1) ++f.single_interaction_users;
        k = j;
      }
      f.users = totals.size();
      f.single_interaction_share = static_cast<double>(f.single_interaction_users) / static_cast<double>(f.users);
      f.mean_feedback = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(f.users);
      if (totals.size() >= 2) f.feedback_dip = stats::dip_statistic(totals);
      f.early_share = static_cast<double>(f.early_events) / static_cast<double>(f.events);
    }
  });

  if (metadata) {
    // Distinct consumers of every artist, then broadcast to its items.
    std::map<std::string, std::size_t> artist_index;
    std::vector<std::size_t> item_artist(wf.item_count, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < wf.item_count; ++i) {
      const auto* v = metadata->find(static_cast<ItemId>(i), artist_attribute);
      if (!v) continue;
      auto [it, inserted] = artist_index.emplace(attribute_key(*v), artist_index.size());
      item_artist[i] = it->second;
    }
    std::vector<std::pair<std::size_t, UserId>> pairs;
    for (std::size_t t = 0; t < wf.size(); ++t) {
      const std::size_t a = item_artist[wf.items[t]];
      if (a != std::numeric_limits<std::size_t>::max()) pairs.emplace_back(a, wf.users[t]);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    std::vector<std::size_t> artist_users(artist_index.size(), 0);
    for (const auto& [a, u] : pairs) ++artist_users[a];
    for (std::size_t i = 0; i < wf.item_count; ++i) {
      if (item_artist[i] != std::numeric_limits<std::size_t>::max() && features[i].users > 0) {
        features[i].artist_users = static_cast<double>(artist_users[item_artist[i]]);
      }
    }
  }
  return features;
}

namespace {

FeatureComparison compare_feature(const std::string& name, const std::vector<ItemId>& eccentric,
                                  const std::vector<ItemId>& noneccentric, const std::vector<ItemFeatures>& features,
                                  double ItemFeatures::*member) {
  FeatureComparison c;
  c.feature = name;
  std::vector<double> a, b;
  for (auto i : eccentric) {
    if (!is_missing(features[i].*member)) a.push_back(features[i].*member);
  }
  for (auto i : noneccentric) {
    if (!is_missing(features[i].*member)) b.push_back(features[i].*member);
  }
  c.eccentric_items = a.size();
  c.noneccentric_items = b.size();
  c.eccentric_mean = mean_of(a);
  c.noneccentric_mean = mean_of(b);
  try {
    c.test = stats::welch_t_test(a, b);
  } catch (const Error& e) {
    c.note = e.what();
  }
  return c;
}

/// Percentage feature: per-item mean as the reported value, pooled counts
/// (successes / trials over the group's items) for the test.
FeatureComparison compare_proportion(const std::string& name, const std::vector<ItemId>& eccentric,
                                     const std::vector<ItemId>& noneccentric,
                                     const std::vector<ItemFeatures>& features, double ItemFeatures::*share,
                                     std::uint64_t ItemFeatures::*successes, std::uint64_t ItemFeatures::*trials) {
  FeatureComparison c = compare_feature(name, eccentric, noneccentric, features, share);
  c.test.reset();
  c.note.clear();
  std::uint64_t k1 = 0, n1 = 0, k2 = 0, n2 = 0;
  for (auto i : eccentric) {
    k1 += features[i].*successes;
    n1 += features[i].*trials;
  }
  for (auto i : noneccentric) {
    k2 += features[i].*successes;
    n2 += features[i].*trials;
  }
  try {
    c.test = stats::two_proportion_z_test(k1, n1, k2, n2);
  } catch (const Error& e) {
    c.note = e.what();
  }
  return c;
}

}  // namespace

GroupComparisonTable group_comparison(const PipelineResult& pipeline, const ItemMetadata* metadata,
                                      const GroupOptions& options) {
  if (!(options.quintile > 0.0) || options.quintile > 0.5) {
    throw Error(ErrorKind::config, "group quantile must lie in (0, 0.5]");
  }
  if (!(options.band >= 0.0)) throw Error(ErrorKind::config, "band half-width must be non-negative");

  const auto& rarity = pipeline.rarity;
  const auto& scores = pipeline.scores;
  GroupComparisonTable table;
  table.options = options;
  if (!metadata) {
    table.warnings.push_back(
        fmt::format("no item metadata supplied: feature '{}' skipped", kFeatureArtistUsers));
  }

  const auto features = item_features(pipeline.windowed, metadata, options.artist_attribute);

  for (double center : options.ir_centers) {
    BandComparison band;
    band.ir_center = center;
    std::vector<ItemId> members;
    constexpr double kEdge = 1e-12;
    for (std::size_t i = 0; i < rarity.item_count(); ++i) {
      const auto item = static_cast<ItemId>(i);
      if (!scores.item_scored(item) || is_missing(rarity.percentile[i])) continue;
      const double p = rarity.percentile[i];
      if (p >= center - options.band - kEdge && p <= center + options.band + kEdge) members.push_back(item);
    }
    band.band_size = members.size();
    std::sort(members.begin(), members.end(), [&](ItemId a, ItemId b) {
      if (scores.item_z[a] != scores.item_z[b]) return scores.item_z[a] < scores.item_z[b];
      return a < b;
    });
    const double share = options.quintile * static_cast<double>(members.size());
    const auto k = static_cast<std::size_t>(std::floor(share + 1e-9));
    const auto k_top = std::max(k, static_cast<std::size_t>(std::ceil(share - 1e-9)));
    if (k < options.min_group_size) {
      band.skipped = true;
      band.warning = fmt::format("IR band {} has {} items; groups of {} are below the minimum of {}", center,
                                 members.size(), k, options.min_group_size);
      table.warnings.push_back(band.warning);
      table.bands.push_back(std::move(band));
      continue;
    }
    band.noneccentric.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
    band.eccentric.assign(members.end() - static_cast<std::ptrdiff_t>(k_top), members.end());

    band.features.push_back(compare_proportion(kFeatureSingleInteraction, band.eccentric, band.noneccentric,
                                               features, &ItemFeatures::single_interaction_share,
                                               &ItemFeatures::single_interaction_users, &ItemFeatures::users));
    band.features.push_back(compare_feature(kFeatureMeanFeedback, band.eccentric, band.noneccentric, features,
                                            &ItemFeatures::mean_feedback));
    band.features.push_back(compare_feature(kFeatureFeedbackDip, band.eccentric, band.noneccentric, features,
                                            &ItemFeatures::feedback_dip));
    band.features.push_back(compare_proportion(kFeatureEarlyShare, band.eccentric, band.noneccentric, features,
                                               &ItemFeatures::early_share, &ItemFeatures::early_events,
                                               &ItemFeatures::events));
    if (metadata) {
      band.features.push_back(compare_feature(kFeatureArtistUsers, band.eccentric, band.noneccentric, features,
                                              &ItemFeatures::artist_users));
    }
    table.bands.push_back(std::move(band));
  }
  return table;
}

// ---------------------------------------------------------------------------

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::argument, "spearman: size mismatch");
  if (a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - mean) * (rb[k] - mean);
    saa += (ra[k] - mean) * (ra[k] - mean);
    sbb += (rb[k] - mean) * (rb[k] - mean);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

WindowSweepReport window_size_sweep(const EventTable& events, std::vector<std::int64_t> widths,
                                    std::optional<Timestamp> origin) {
  if (events.empty()) throw Error(ErrorKind::validation, "event table is empty");
  std::sort(widths.begin(), widths.end());
  if (std::adjacent_find(widths.begin(), widths.end()) != widths.end()) {
    throw Error(ErrorKind::config, "window sweep widths must be distinct");
  }
  if (!widths.empty() && widths.front() < 1) throw Error(ErrorKind::config, "window widths must be at least 1 day");

  WindowConfig base;
  base.origin = origin;
  const Timestamp start = resolve_origin(events, base);
  const Timestamp last = *std::max_element(events.timestamps.begin(), events.timestamps.end());

  // Rows in time order once; each width walks them window by window.
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events.timestamps[a] < events.timestamps[b]; });

  WindowSweepReport report;
  for (auto width_days : widths) {
    SweepRow row;
    row.width_days = width_days;
    const std::int64_t width = width_days * kSecondsPerDay;
    row.windows = static_cast<std::size_t>((last - start + 1) / width);
    row.available = row.windows > 0;
    if (!row.available) {
      report.rows.push_back(row);
      continue;
    }

    // Per complete window: item -> (first-half count, second-half count).
    std::vector<std::unordered_map<ItemId, std::pair<double, double>>> halves(row.windows);
    for (auto r : order) {
      const Timestamp offset = events.timestamps[r] - start;
      const auto w = static_cast<std::size_t>(offset / width);
      if (w >= row.windows) break;
      const bool second = (offset - static_cast<Timestamp>(w) * width) * 2 >= width;
      auto& counts = halves[w][events.items[r]];
      (second ? counts.second : counts.first) += 1.0;
    }

    auto paired = [](const auto& map_a, const auto& map_b, auto get_a, auto get_b) {
      std::vector<std::pair<ItemId, std::pair<double, double>>> both;
      for (const auto& [item, ca] : map_a) {
        const auto it = map_b.find(item);
        if (it == map_b.end()) continue;
        const double a = get_a(ca);
        const double b = get_b(it->second);
        if (a > 0.0 && b > 0.0) both.push_back({item, {a, b}});
      }
      std::sort(both.begin(), both.end());
      std::vector<double> xa, xb;
      for (const auto& [item, ab] : both) {
        xa.push_back(ab.first);
        xb.push_back(ab.second);
      }
      return spearman(xa, xb);
    };

    std::vector<double> stabilities;
    for (const auto& w : halves) {
      auto rho = paired(
          w, w, [](const auto& c) { return c.first; }, [](const auto& c) { return c.second; });
      if (rho) stabilities.push_back(*rho);
    }
    if (!stabilities.empty()) row.stability = mean_of(stabilities);

    std::vector<double> changes;
    for (std::size_t w = 0; w + 1 < halves.size(); ++w) {
      auto total = [](const auto& c) { return c.first + c.second; };
      auto rho = paired(halves[w], halves[w + 1], total, total);
      if (rho) changes.push_back(1.0 - *rho);
    }
    if (!changes.empty()) row.variability = mean_of(changes);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace ecc::analysis
