#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ecc/analysis.hpp"
#include "ecc/ingest.hpp"
#include "ecc/metrics.hpp"

namespace ecc::io {

inline constexpr const char* kItemScoresFile = "item_scores.csv";
inline constexpr const char* kUserScoresFile = "user_scores.csv";
inline constexpr const char* kItemWindowRarityFile = "item_window_rarity.csv";

/// Shortest text that parses back to the same double (at most 17 significant
/// digits); empty when missing.
std::string format_double(double value);

/// Key/value pairs copied verbatim into the JSON mirrors of every report.
using Parameters = std::vector<std::pair<std::string, std::string>>;

using Paths = std::vector<std::filesystem::path>;

/// `item_id,ir_representative,ir_percentile,ie_z,excluded` plus
/// `user_id,ue_z` plus the per-(item, window) rarity cells.
Paths write_scores(const std::filesystem::path& dir, const EventTable& events, const RarityTable& rarity,
                   const EccentricityScores& scores);

/// Scores reloaded from a directory written by write_scores. Raw
/// (pre-standardization) eccentricities are not exported and read back as
/// missing.
struct ScoreSnapshot {
  Dictionary users;
  Dictionary items;
  RarityTable rarity;
  EccentricityScores scores;
};

ScoreSnapshot load_scores(const std::filesystem::path& dir);

Paths write_density(const std::filesystem::path& dir, const analysis::DensityReport& report,
                    const Parameters& parameters);
Paths write_scatter(const std::filesystem::path& dir, const analysis::ScatterReport& report, const Dictionary& items,
                    const Parameters& parameters);
Paths write_transition(const std::filesystem::path& dir, const analysis::TransitionMatrix& matrix,
                       const Parameters& parameters);
Paths write_groups(const std::filesystem::path& dir, const analysis::GroupComparisonTable& table,
                   const Parameters& parameters);
Paths write_window_sweep(const std::filesystem::path& dir, const analysis::WindowSweepReport& report,
                         const Parameters& parameters);

/// Writes `content` to `path`, Error(io) on failure.
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace ecc::io
