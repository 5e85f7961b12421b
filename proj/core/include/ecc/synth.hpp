#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ecc/ingest.hpp"
#include "ecc/metrics.hpp"

namespace ecc::synth {

/// SplitMix64 used as a counter-based generator: the k-th output is
/// mix(seed + k * 0x9E3779B97F4A7C15) with the finalizer
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
/// All sampling decisions are made on integers so streams are identical on
/// every platform.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound); bound > 0. Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// True with probability p (p converted once to a 64-bit threshold).
  bool bernoulli(double p) noexcept;

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (for test data, not for sampling decisions).
  double normal() noexcept;

private:
  std::uint64_t state_;
};

/// Integer cumulative weights for sampling from a discrete distribution.
class WeightedSampler {
public:
  explicit WeightedSampler(std::vector<std::uint64_t> weights);
  std::size_t sample(CounterRng& rng) const;
  std::size_t size() const noexcept { return cumulative_.size(); }

private:
  std::vector<std::uint64_t> cumulative_;
};

enum class FeedbackMode { implicit_plays, explicit_ratings };

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_users = 1000;
  std::size_t n_items = 5000;
  std::size_t n_events = 100000;
  std::int64_t time_span_days = 365;
  Timestamp start = 1262304000;  // 2010-01-01T00:00:00Z
  double popularity_exponent = 1.2;
  double eccentric_user_fraction = 0.1;
  double niche_item_fraction = 0.2;
  /// Probability that an eccentric user's event targets the niche pool;
  /// otherwise (and always for mainstream users) items follow base popularity.
  double affinity = 0.9;
  FeedbackMode mode = FeedbackMode::implicit_plays;
  /// After each event, probability of one more play of the same item by the
  /// same user within the hour (repeated geometrically). Niche items use
  /// `niche_repeat_probability`, all others `repeat_probability`.
  double repeat_probability = 0.0;
  double niche_repeat_probability = 0.0;
  /// Niche items are drawn from the least popular `tail_share` of the
  /// catalogue (at least the niche count itself).
  double tail_share = 0.4;
  /// Exponent of the power law over niche items (ordered by base rank) used
  /// for eccentric users' niche picks; unset means the base weights. A
  /// flatter or steeper law spreads niche items over more rarity levels.
  std::optional<double> niche_exponent;
};

enum class UserLabel { mainstream, eccentric };
enum class ItemLabel { mainstream, niche };

std::string_view to_string(UserLabel label) noexcept;
std::string_view to_string(ItemLabel label) noexcept;

/// Labels indexed by interned id of the generated table. Items the generator
/// never emitted are absent from the table and therefore unlabeled.
struct GroundTruth {
  std::vector<UserLabel> users;
  std::vector<ItemLabel> items;
};

struct SynthData {
  EventTable events;
  GroundTruth truth;
};

/// Throws Error(config) for invalid or infeasible configurations.
void validate(const SynthConfig& config);

/// Deterministic in the config. Events are ordered by timestamp.
SynthData generate(const SynthConfig& config);

/// Rank-based AUC (ties count one half) of `scores` separating positives.
/// Error(degenerate) when either class is empty.
double auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

struct Recovery {
  double user_auc = 0.5;
  double item_auc = 0.5;
  std::size_t users = 0;
  std::size_t items = 0;
};

/// AUC of user_z for eccentric users and of item_z (retained items only) for
/// niche items.
Recovery evaluate_recovery(const EccentricityScores& scores, const GroundTruth& truth);

/// Copy of `table` with the timestamp column permuted by a seeded shuffle.
EventTable permute_timestamps(const EventTable& table, std::uint64_t seed);

}  // namespace ecc::synth
