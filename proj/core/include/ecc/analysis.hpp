#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecc/ingest.hpp"
#include "ecc/metrics.hpp"
#include "ecc/stats.hpp"
#include "ecc/windowing.hpp"

namespace ecc::analysis {

// ---------------------------------------------------------------------------
// Distribution densities of the standardized eccentricities.

struct DensityReport {
  stats::DensitySeries user;  // over scored users
  stats::DensitySeries item;  // over retained (non-excluded) items
};

/// Error(degenerate) when either population has fewer than two distinct values.
DensityReport density_report(const EccentricityScores& scores, std::size_t grid_size = 512);

/// Grid location of the density maximum.
double density_mode(const stats::DensitySeries& series);

// ---------------------------------------------------------------------------
// Item eccentricity against representative item rarity.

struct ScatterPoint {
  ItemId item = 0;
  double rarity = 0.0;        // representative (mean z) item rarity
  double eccentricity = 0.0;  // standardized item eccentricity
  std::size_t windows = 0;    // active windows
};

struct ScatterReport {
  std::vector<ScatterPoint> points;
  stats::RegressionFit fit;
  std::size_t min_windows = 4;
  /// Population variance of IE inside each rarity decile of the points;
  /// decile 0 holds the most popular items, decile 9 the rarest.
  std::array<double, 10> decile_variance{};
  std::array<std::size_t, 10> decile_size{};
};

/// Points are items with more than `min_windows` active windows that survive
/// the exclusion rule. Error(degenerate) with fewer than two points or when
/// every point has the same rarity.
ScatterReport rarity_eccentricity_scatter(const RarityTable& rarity, const EccentricityScores& scores,
                                          std::size_t min_windows = 4);

// ---------------------------------------------------------------------------
// Two-period stability of item eccentricity.

struct StabilityOptions {
  MetricsConfig metrics;
  std::size_t bins = 7;
  std::size_t min_users = 10;  // strictly more distinct users needed in each period
  bool release_filter = true;
};

struct TransitionMatrix {
  std::size_t bins = 7;
  std::vector<std::vector<double>> matrix;  // [first-period bin][second-period bin]
  std::vector<std::size_t> row_counts;
  std::size_t items = 0;  // retained items
  std::size_t min_users = 0;
  std::optional<Timestamp> split;
  std::optional<Timestamp> release_cutoff;  // first feedback must be earlier

  /// Mean of the diagonal entries; chance level is 1 / bins.
  double diagonal_mass() const;
};

/// Quantile bin per entry: entries are ranked by (score, id) and rank r maps
/// to floor(r * bins / n).
std::vector<std::size_t> quantile_bins(std::span<const double> scores, std::span<const ItemId> ids, std::size_t bins);

/// Row-normalized transition counts between two binnings of the same items.
TransitionMatrix transition_matrix(std::span<const std::size_t> first_bins, std::span<const std::size_t> second_bins,
                                   std::size_t bins);

/// Runs the metric pipeline independently on each period and compares the
/// binned item eccentricities of items retained in both.
TransitionMatrix stability_between(const EventTable& first, const EventTable& second, const StabilityOptions& options,
                                   std::optional<Timestamp> release_cutoff = std::nullopt);

/// Splits at `split` (first period: timestamp < split). With the release
/// filter on, items must have their first feedback before the midpoint of
/// the first period. Error(analysis) when a period is empty or no item
/// qualifies.
TransitionMatrix stability_analysis(const EventTable& events, Timestamp split, const StabilityOptions& options = {});

/// Lower median of the timestamp column.
Timestamp median_timestamp(const EventTable& events);

// ---------------------------------------------------------------------------
// Eccentric vs noneccentric items inside narrow rarity bands.

struct GroupOptions {
  std::vector<double> ir_centers{0.6, 0.7, 0.8, 0.9, 0.99};
  double band = 0.01;
  double quintile = 0.2;
  std::size_t min_group_size = 10;
  std::string artist_attribute = "artist";
};

struct FeatureComparison {
  std::string feature;
  double eccentric_mean = kMissing;
  double noneccentric_mean = kMissing;
  std::size_t eccentric_items = 0;  // items with a defined value
  std::size_t noneccentric_items = 0;
  std::optional<stats::TestResult> test;
  std::string note;  // why a test is missing
};

struct BandComparison {
  double ir_center = 0.0;
  std::size_t band_size = 0;
  std::vector<ItemId> eccentric;
  std::vector<ItemId> noneccentric;
  std::vector<FeatureComparison> features;
  bool skipped = false;
  std::string warning;
};

struct GroupComparisonTable {
  std::vector<BandComparison> bands;
  std::vector<std::string> warnings;
  GroupOptions options;
};

inline constexpr const char* kFeatureSingleInteraction = "single_interaction_users";
inline constexpr const char* kFeatureMeanFeedback = "mean_feedback_per_user";
inline constexpr const char* kFeatureFeedbackDip = "feedback_dip";
inline constexpr const char* kFeatureEarlyShare = "first_two_windows_share";
inline constexpr const char* kFeatureArtistUsers = "artist_users";

/// Per-item features of one item, kMissing where undefined.
struct ItemFeatures {
  std::uint64_t users = 0;
  std::uint64_t single_interaction_users = 0;
  std::uint64_t events = 0;
  std::uint64_t early_events = 0;  // events in the item's first two active-window slots

  double single_interaction_share = kMissing;
  double mean_feedback = kMissing;
  double feedback_dip = kMissing;
  double early_share = kMissing;
  double artist_users = kMissing;
};

std::vector<ItemFeatures> item_features(const WindowedFeedbackTable& wf, const ItemMetadata* metadata,
                                        const std::string& artist_attribute);

GroupComparisonTable group_comparison(const PipelineResult& pipeline, const ItemMetadata* metadata,
                                      const GroupOptions& options = {});

// ---------------------------------------------------------------------------
// Window width selection.

struct SweepRow {
  std::int64_t width_days = 0;
  std::size_t windows = 0;  // complete windows inside the data span
  bool available = false;
  std::optional<double> stability;    // mean Spearman of half-window item counts
  std::optional<double> variability;  // mean (1 - Spearman) across adjacent windows
};

struct WindowSweepReport {
  std::vector<SweepRow> rows;  // ascending width
};

inline const std::vector<std::int64_t> kDefaultSweepWidths{7, 14, 21, 28, 42, 84};

WindowSweepReport window_size_sweep(const EventTable& events,
                                    std::vector<std::int64_t> widths = kDefaultSweepWidths,
                                    std::optional<Timestamp> origin = std::nullopt);

/// Spearman rank correlation with average ranks for ties; nullopt when either
/// side is constant or fewer than two pairs are given.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

}  // namespace ecc::analysis
