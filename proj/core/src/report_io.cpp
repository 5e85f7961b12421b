#include "ecc/report_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "ecc/error.hpp"

namespace ecc::io {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using detail::csv_escape;
using detail::split_fields;
using detail::to_double;
using detail::trim;

ordered_json number_or_null(double v) {
  if (is_missing(v) || !std::isfinite(v)) return nullptr;
  return v;
}

ordered_json parameters_json(const Parameters& parameters) {
  ordered_json out = ordered_json::object();
  for (const auto& [k, v] : parameters) out[k] = v;
  return out;
}

void write_json(const fs::path& path, const ordered_json& doc) { write_text(path, doc.dump(2) + "\n"); }

ordered_json density_json(const stats::DensitySeries& s) {
  return {{"sample_size", s.sample_size},
          {"bandwidth", s.bandwidth},
          {"bandwidth_rule", "silverman"},
          {"kernel", "gaussian"},
          {"grid_size", s.grid.size()},
          {"mode", analysis::density_mode(s)},
          {"integral", s.integral()}};
}

std::string density_csv(const stats::DensitySeries& s) {
  std::string out = "x,density\n";
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    out += fmt::format("{},{}\n", format_double(s.grid[i]), format_double(s.density[i]));
  }
  return out;
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

/// Line reader over a whole file with a 1-based line counter.
class Lines {
public:
  explicit Lines(const fs::path& path) : path_(path), text_(read_file(path)) {
    if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
  }

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const auto end = text_.find('\n', pos_);
      const auto stop = end == std::string::npos ? text_.size() : end;
      line = trim(std::string_view(text_).substr(pos_, stop - pos_));
      pos_ = stop + 1;
      ++number_;
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string_view what) const {
    throw Error(ErrorKind::parse, fmt::format("{}: line {}: {}", path_.string(), number_, what));
  }

  void expect_header(std::string_view header) {
    std::string_view line;
    if (!next(line) || line != header) fail(fmt::format("expected header '{}'", header));
  }

private:
  fs::path path_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

double parse_cell(Lines& lines, std::string_view text, std::string_view field) {
  if (text.empty()) return kMissing;
  const auto v = to_double(text);
  if (!v) lines.fail(fmt::format("field '{}': not a number: '{}'", field, text));
  return *v;
}

}  // namespace

std::string format_double(double value) {
  if (is_missing(value)) return {};
  return fmt::format("{}", value);
}

void write_text(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot open '{}' for writing", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorKind::io, fmt::format("write to '{}' failed", path.string()));
}

Paths write_scores(const fs::path& dir, const EventTable& events, const RarityTable& rarity,
                   const EccentricityScores& scores) {
  const auto& items = events.item_dictionary;
  const auto& users = events.user_dictionary;

  std::string out = "item_id,ir_representative,ir_percentile,ie_z,excluded\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += fmt::format("{},{},{},{},{}\n", csv_escape(items.key(static_cast<ItemId>(i))),
                       format_double(rarity.representative[i]), format_double(rarity.percentile[i]),
                       format_double(scores.item_z[i]), scores.excluded[i] ? 1 : 0);
  }
  write_text(dir / kItemScoresFile, out);

  out = "user_id,ue_z\n";
  for (std::size_t u = 0; u < users.size(); ++u) {
    out += fmt::format("{},{}\n", csv_escape(users.key(static_cast<UserId>(u))), format_double(scores.user_z[u]));
  }
  write_text(dir / kUserScoresFile, out);

  out = "item_id,window,users,ir_raw,ir_z\n";
  for (std::size_t c = 0; c < rarity.cell_count(); ++c) {
    out += fmt::format("{},{},{},{},{}\n", csv_escape(items.key(rarity.cell_items[c])), rarity.cell_windows[c],
                       rarity.cell_users[c], format_double(rarity.raw[c]), format_double(rarity.z[c]));
  }
  write_text(dir / kItemWindowRarityFile, out);

  return {dir / kItemScoresFile, dir / kUserScoresFile, dir / kItemWindowRarityFile};
}

ScoreSnapshot load_scores(const fs::path& dir) {
  ScoreSnapshot snap;
  detail::Fields f;
  detail::FieldScratch scratch;
  std::string_view line;

  {
    Lines lines(dir / kItemScoresFile);
    lines.expect_header("item_id,ir_representative,ir_percentile,ie_z,excluded");
    while (lines.next(line)) {
      if (!split_fields(line, ',', 5, f, scratch)) lines.fail("expected 5 fields");
      const auto id = snap.items.intern(f[0]);
      if (id + 1 != snap.items.size()) lines.fail(fmt::format("duplicate item '{}'", f[0]));
      snap.rarity.representative.push_back(parse_cell(lines, f[1], "ir_representative"));
      snap.rarity.percentile.push_back(parse_cell(lines, f[2], "ir_percentile"));
      snap.scores.item_z.push_back(parse_cell(lines, f[3], "ie_z"));
      if (f[4] != "0" && f[4] != "1") lines.fail("field 'excluded': expected 0 or 1");
      snap.scores.excluded.push_back(f[4] == "1");
      if (f[4] == "1") snap.scores.excluded_items.push_back(id);
    }
  }
  snap.scores.item_raw.assign(snap.items.size(), kMissing);

  {
    Lines lines(dir / kUserScoresFile);
    lines.expect_header("user_id,ue_z");
    while (lines.next(line)) {
      if (!split_fields(line, ',', 2, f, scratch)) lines.fail("expected 2 fields");
      const auto id = snap.users.intern(f[0]);
      if (id + 1 != snap.users.size()) lines.fail(fmt::format("duplicate user '{}'", f[0]));
      snap.scores.user_z.push_back(parse_cell(lines, f[1], "ue_z"));
    }
  }
  snap.scores.user_raw.assign(snap.users.size(), kMissing);

  {
    Lines lines(dir / kItemWindowRarityFile);
    lines.expect_header("item_id,window,users,ir_raw,ir_z");
    auto& rt = snap.rarity;
    while (lines.next(line)) {
      if (!split_fields(line, ',', 5, f, scratch)) lines.fail("expected 5 fields");
      const auto item = snap.items.find(f[0]);
      if (!item) lines.fail(fmt::format("unknown item '{}'", f[0]));
      const auto window = detail::to_int64(f[1]);
      const auto count = detail::to_int64(f[2]);
      if (!window || *window < 0 || !count || *count < 1) lines.fail("bad window or user count");
      if (!rt.cell_items.empty()) {
        const bool ordered = rt.cell_items.back() < *item ||
                             (rt.cell_items.back() == *item && rt.cell_windows.back() < *window);
        if (!ordered) lines.fail("cells must be sorted by (item, window)");
      }
      rt.cell_items.push_back(*item);
      rt.cell_windows.push_back(static_cast<WindowIndex>(*window));
      rt.cell_users.push_back(static_cast<std::uint32_t>(*count));
      rt.raw.push_back(parse_cell(lines, f[3], "ir_raw"));
      rt.z.push_back(parse_cell(lines, f[4], "ir_z"));
    }
    rt.item_offsets.assign(snap.items.size() + 1, 0);
    for (auto i : rt.cell_items) ++rt.item_offsets[i + 1];
    for (std::size_t i = 0; i < snap.items.size(); ++i) rt.item_offsets[i + 1] += rt.item_offsets[i];
  }
  return snap;
}

Paths write_density(const fs::path& dir, const analysis::DensityReport& report, const Parameters& parameters) {
  write_text(dir / "density_ue.csv", density_csv(report.user));
  write_text(dir / "density_ie.csv", density_csv(report.item));
  ordered_json ue = density_json(report.user);
  ue["population"] = "scored users, standardized user eccentricity";
  ordered_json ie = density_json(report.item);
  ie["population"] = "retained items, standardized item eccentricity";
  ue["parameters"] = parameters_json(parameters);
  ie["parameters"] = parameters_json(parameters);
  write_json(dir / "density_ue.json", ue);
  write_json(dir / "density_ie.json", ie);
  return {dir / "density_ue.csv", dir / "density_ie.csv", dir / "density_ue.json", dir / "density_ie.json"};
}

Paths write_scatter(const fs::path& dir, const analysis::ScatterReport& report, const Dictionary& items,
                    const Parameters& parameters) {
  std::string out = "item_id,ir_representative,ie_z,windows\n";
  for (const auto& p : report.points) {
    out += fmt::format("{},{},{},{}\n", csv_escape(items.key(p.item)), format_double(p.rarity),
                       format_double(p.eccentricity), p.windows);
  }
  write_text(dir / "scatter.csv", out);

  ordered_json deciles = ordered_json::array();
  for (std::size_t d = 0; d < report.decile_variance.size(); ++d) {
    deciles.push_back({{"decile", d}, {"items", report.decile_size[d]},
                       {"ie_variance", number_or_null(report.decile_variance[d])}});
  }
  const ordered_json doc = {
      {"points", report.points.size()},
      {"filter", fmt::format("active windows > {} and not excluded", report.min_windows)},
      {"min_windows", report.min_windows},
      {"fit", {{"model", "ordinary least squares ie_z ~ ir_representative"},
               {"slope", report.fit.slope},
               {"intercept", report.fit.intercept},
               {"r_squared", report.fit.r_squared},
               {"n", report.fit.n}}},
      {"deciles_note", "decile 0 holds the most popular items, decile 9 the rarest; population variance"},
      {"deciles", deciles},
      {"parameters", parameters_json(parameters)}};
  write_json(dir / "scatter_fit.json", doc);
  return {dir / "scatter.csv", dir / "scatter_fit.json"};
}

Paths write_transition(const fs::path& dir, const analysis::TransitionMatrix& m, const Parameters& parameters) {
  std::string out = "from_bin";
  for (std::size_t g = 0; g < m.bins; ++g) out += fmt::format(",to_{}", g);
  out += '\n';
  for (std::size_t g = 0; g < m.bins; ++g) {
    out += std::to_string(g);
    for (double p : m.matrix[g]) out += "," + format_double(p);
    out += '\n';
  }
  write_text(dir / "transition.csv", out);

  const ordered_json doc = {
      {"bins", m.bins},
      {"orientation", "row-normalized: P(second-period bin | first-period bin)"},
      {"binning", "equal-count quantile bins of item eccentricity, ties ordered by item id"},
      {"items", m.items},
      {"min_users", m.min_users},
      {"split", m.split ? ordered_json(*m.split) : ordered_json(nullptr)},
      {"release_cutoff", m.release_cutoff ? ordered_json(*m.release_cutoff) : ordered_json(nullptr)},
      {"row_counts", m.row_counts},
      {"diagonal_mass", m.diagonal_mass()},
      {"chance", 1.0 / static_cast<double>(m.bins)},
      {"matrix", m.matrix},
      {"parameters", parameters_json(parameters)}};
  write_json(dir / "transition.json", doc);
  return {dir / "transition.csv", dir / "transition.json"};
}

Paths write_groups(const fs::path& dir, const analysis::GroupComparisonTable& table, const Parameters& parameters) {
  std::string out = "ir_center,group,feature,items,mean,test,statistic,p_value,note\n";
  ordered_json bands = ordered_json::array();
  for (const auto& band : table.bands) {
    ordered_json features = ordered_json::array();
    for (const auto& fc : band.features) {
      const std::string test = fc.test ? std::string(stats::to_string(fc.test->test)) : std::string();
      const std::string stat = fc.test ? format_double(fc.test->statistic) : std::string();
      const std::string p = fc.test ? format_double(fc.test->p_value) : std::string();
      out += fmt::format("{},eccentric,{},{},{},{},{},{},{}\n", format_double(band.ir_center), fc.feature,
                         fc.eccentric_items, format_double(fc.eccentric_mean), test, stat, p, csv_escape(fc.note));
      out += fmt::format("{},noneccentric,{},{},{},{},{},{},{}\n", format_double(band.ir_center), fc.feature,
                         fc.noneccentric_items, format_double(fc.noneccentric_mean), test, stat, p,
                         csv_escape(fc.note));
      ordered_json entry = {{"feature", fc.feature},
                            {"eccentric_mean", number_or_null(fc.eccentric_mean)},
                            {"noneccentric_mean", number_or_null(fc.noneccentric_mean)},
                            {"eccentric_items", fc.eccentric_items},
                            {"noneccentric_items", fc.noneccentric_items}};
      if (fc.test) {
        entry["test"] = {{"name", stats::to_string(fc.test->test)},
                         {"statistic", number_or_null(fc.test->statistic)},
                         {"p_value", number_or_null(fc.test->p_value)},
                         {"n1", fc.test->n1},
                         {"n2", fc.test->n2},
                         {"degrees_of_freedom", fc.test->degrees_of_freedom}};
      } else {
        entry["test"] = nullptr;
      }
      if (!fc.note.empty()) entry["note"] = fc.note;
      features.push_back(entry);
    }
    if (band.skipped) {
      out += fmt::format("{},skipped,,{},,,,,{}\n", format_double(band.ir_center), band.band_size,
                         csv_escape(band.warning));
    }
    bands.push_back({{"ir_center", band.ir_center},
                     {"band_size", band.band_size},
                     {"eccentric_items", band.eccentric.size()},
                     {"noneccentric_items", band.noneccentric.size()},
                     {"skipped", band.skipped},
                     {"warning", band.warning},
                     {"features", features}});
  }
  write_text(dir / "groups.csv", out);

  const auto& o = table.options;
  const ordered_json doc = {
      {"ir_centers", o.ir_centers},
      {"band", o.band},
      {"quintile", o.quintile},
      {"min_group_size", o.min_group_size},
      {"artist_attribute", o.artist_attribute},
      {"aggregation", "features computed per item, then averaged per group"},
      {"tests", {{analysis::kFeatureSingleInteraction, "two-proportion-z on pooled user counts"},
                 {analysis::kFeatureMeanFeedback, "welch-t on per-item values"},
                 {analysis::kFeatureFeedbackDip, "welch-t on per-item values"},
                 {analysis::kFeatureEarlyShare, "two-proportion-z on pooled event counts"},
                 {analysis::kFeatureArtistUsers, "welch-t on per-item values"}}},
      {"warnings", table.warnings},
      {"bands", bands},
      {"parameters", parameters_json(parameters)}};
  write_json(dir / "groups.json", doc);
  return {dir / "groups.csv", dir / "groups.json"};
}

Paths write_window_sweep(const fs::path& dir, const analysis::WindowSweepReport& report,
                         const Parameters& parameters) {
  std::string out = "width_days,windows,available,within_window_stability,between_window_variability\n";
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{}\n", r.width_days, r.windows, r.available ? 1 : 0,
                       optional_text(r.stability), optional_text(r.variability));
    rows.push_back({{"width_days", r.width_days},
                    {"windows", r.windows},
                    {"available", r.available},
                    {"within_window_stability", optional_json(r.stability)},
                    {"between_window_variability", optional_json(r.variability)}});
  }
  write_text(dir / "window_sweep.csv", out);

  const ordered_json doc = {
      {"criterion",
       {{"within_window_stability",
         "mean over complete windows of the Spearman rank correlation between item feedback counts in the "
         "window's first and second halves, over items active in both halves"},
        {"between_window_variability",
         "mean over adjacent complete windows of 1 - Spearman rank correlation of item feedback counts, over "
         "items active in both windows"},
        {"missing", "empty when fewer than two usable windows or correlations are undefined"}}},
      {"rows", rows},
      {"parameters", parameters_json(parameters)}};
  write_json(dir / "window_sweep.json", doc);
  return {dir / "window_sweep.csv", dir / "window_sweep.json"};
}

}  // namespace ecc::io
