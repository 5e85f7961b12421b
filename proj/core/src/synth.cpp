#include "ecc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "ecc/error.hpp"

namespace ecc::synth {
namespace {

/// Partial Fisher-Yates: the first `k` entries become a uniform k-subset.
std::vector<std::size_t> choose_subset(std::size_t population, std::size_t k, CounterRng& rng) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

/// 2^40 * rank^-exponent rounded to an integer, at least 1.
std::uint64_t power_weight(std::size_t rank, double exponent) {
  const double w = std::ldexp(std::pow(static_cast<double>(rank), -exponent), 40);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(w)));
}

std::size_t rounded_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
  for (;;) {
    const std::uint64_t x = next();
    if (x < limit) return x % bound;
  }
}

bool CounterRng::bernoulli(double p) noexcept {
  if (!(p > 0.0)) return false;
  if (p >= 1.0) return true;
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(p, 64));
  return next() < threshold;
}

double CounterRng::normal() noexcept {
  const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

WeightedSampler::WeightedSampler(std::vector<std::uint64_t> weights) : cumulative_(std::move(weights)) {
  if (cumulative_.empty()) throw Error(ErrorKind::config, "cannot sample from an empty pool");
  std::partial_sum(cumulative_.begin(), cumulative_.end(), cumulative_.begin());
  if (cumulative_.back() == 0) throw Error(ErrorKind::config, "sampling weights sum to zero");
}

std::size_t WeightedSampler::sample(CounterRng& rng) const {
  const std::uint64_t r = rng.below(cumulative_.back());
  return static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), r) - cumulative_.begin());
}

std::string_view to_string(UserLabel label) noexcept {
  return label == UserLabel::eccentric ? "eccentric" : "mainstream";
}

std::string_view to_string(ItemLabel label) noexcept {
  return label == ItemLabel::niche ? "niche" : "mainstream";
}

void validate(const SynthConfig& c) {
  auto fraction_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (c.n_users == 0 || c.n_items == 0) throw Error(ErrorKind::config, "synth needs at least one user and one item");
  if (c.n_events < c.n_users) {
    throw Error(ErrorKind::config,
                fmt::format("n_events ({}) must be at least n_users ({}) so every user has an event", c.n_events,
                            c.n_users));
  }
  if (c.time_span_days < 1) throw Error(ErrorKind::config, "time span must be at least one day");
  if (!(c.popularity_exponent > 0.0)) throw Error(ErrorKind::config, "popularity exponent must be positive");
  if (c.niche_exponent && !(*c.niche_exponent >= 0.0)) throw Error(ErrorKind::config, "niche exponent must be >= 0");
  if (!fraction_ok(c.eccentric_user_fraction) || !fraction_ok(c.niche_item_fraction) || !fraction_ok(c.affinity) ||
      !fraction_ok(c.repeat_probability) || !fraction_ok(c.niche_repeat_probability) || !fraction_ok(c.tail_share)) {
    throw Error(ErrorKind::config, "fractions and probabilities must lie in [0, 1]");
  }
  if (c.repeat_probability >= 1.0 || c.niche_repeat_probability >= 1.0) {
    throw Error(ErrorKind::config, "repeat probabilities must be below 1");
  }
  const bool wants_niche = c.affinity > 0.0 && rounded_count(c.eccentric_user_fraction, c.n_users) > 0;
  if (wants_niche && rounded_count(c.niche_item_fraction, c.n_items) == 0) {
    throw Error(ErrorKind::config, "affinity > 0 with eccentric users requires at least one niche item");
  }
}

SynthData generate(const SynthConfig& config) {
  validate(config);
  CounterRng rng(config.seed);

  const std::size_t n_ecc = rounded_count(config.eccentric_user_fraction, config.n_users);
  const std::size_t n_niche = rounded_count(config.niche_item_fraction, config.n_items);

  std::vector<std::uint8_t> user_eccentric(config.n_users, 0);
  for (auto u : choose_subset(config.n_users, n_ecc, rng)) user_eccentric[u] = 1;

  // Item k has popularity rank k (0 = head). Niche items come from the tail.
  const std::size_t tail = std::min(config.n_items, std::max(n_niche, rounded_count(config.tail_share, config.n_items)));
  std::vector<std::uint8_t> item_niche(config.n_items, 0);
  for (auto k : choose_subset(tail, n_niche, rng)) item_niche[config.n_items - tail + k] = 1;

  std::vector<std::uint64_t> base_weights(config.n_items);
  for (std::size_t k = 0; k < config.n_items; ++k) base_weights[k] = power_weight(k + 1, config.popularity_exponent);
  std::vector<std::size_t> niche_ids;
  std::vector<std::uint64_t> niche_weights;
  for (std::size_t k = 0; k < config.n_items; ++k) {
    if (item_niche[k]) {
      niche_ids.push_back(k);
      niche_weights.push_back(config.niche_exponent ? power_weight(niche_ids.size(), *config.niche_exponent)
                                                    : base_weights[k]);
    }
  }
  const WeightedSampler base(base_weights);
  const std::optional<WeightedSampler> niche =
      niche_ids.empty() ? std::nullopt : std::optional<WeightedSampler>(WeightedSampler(niche_weights));

  struct Raw {
    std::uint32_t user;
    std::uint32_t item;
    std::uint8_t halfstars;
    Timestamp ts;
  };
  std::vector<Raw> raw;
  raw.reserve(config.n_events);
  const auto span_seconds = static_cast<std::uint64_t>(config.time_span_days * kSecondsPerDay);

  auto rating = [&](std::size_t user, std::size_t item) -> std::uint8_t {
    if (config.mode != FeedbackMode::explicit_ratings) return 2;
    // Mainstream items get 4 stars on average; niche items get 4 from
    // eccentric users and 3 from everyone else.
    const int base_halfstars = (item_niche[item] && !user_eccentric[user]) ? 6 : 8;
    const int h = base_halfstars + static_cast<int>(rng.below(5)) - 2;
    return static_cast<std::uint8_t>(std::clamp(h, 1, 10));
  };

  std::size_t next_user = 0;
  while (raw.size() < config.n_events) {
    const std::size_t user =
        next_user < config.n_users ? next_user++ : static_cast<std::size_t>(rng.below(config.n_users));
    const bool targets_niche = user_eccentric[user] && niche && rng.bernoulli(config.affinity);
    const std::size_t item = targets_niche ? niche_ids[niche->sample(rng)] : base.sample(rng);
    Timestamp ts = config.start + static_cast<Timestamp>(rng.below(span_seconds));
    raw.push_back({static_cast<std::uint32_t>(user), static_cast<std::uint32_t>(item), rating(user, item), ts});

    const double repeat = item_niche[item] ? config.niche_repeat_probability : config.repeat_probability;
    while (raw.size() < config.n_events && rng.bernoulli(repeat)) {
      ts = std::min<Timestamp>(ts + static_cast<Timestamp>(rng.below(3600)),
                               config.start + static_cast<Timestamp>(span_seconds) - 1);
      raw.push_back({static_cast<std::uint32_t>(user), static_cast<std::uint32_t>(item), rating(user, item), ts});
    }
  }

  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.ts < b.ts; });

  SynthData out;
  out.events.schema = Schema::generic_csv;
  out.events.reserve(raw.size());
  std::string user_key, item_key;
  for (const auto& r : raw) {
    user_key = fmt::format("u{}", r.user);
    item_key = fmt::format("i{}", r.item);
    const double value = config.mode == FeedbackMode::explicit_ratings ? r.halfstars / 2.0 : 1.0;
    out.events.append(user_key, item_key, value, r.ts);
  }

  const auto& users = out.events.user_dictionary;
  const auto& items = out.events.item_dictionary;
  out.truth.users.resize(users.size());
  for (std::size_t id = 0; id < users.size(); ++id) {
    const auto k = std::stoul(users.key(static_cast<std::uint32_t>(id)).substr(1));
    out.truth.users[id] = user_eccentric[k] ? UserLabel::eccentric : UserLabel::mainstream;
  }
  out.truth.items.resize(items.size());
  for (std::size_t id = 0; id < items.size(); ++id) {
    const auto k = std::stoul(items.key(static_cast<std::uint32_t>(id)).substr(1));
    out.truth.items[id] = item_niche[k] ? ItemLabel::niche : ItemLabel::mainstream;
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw Error(ErrorKind::argument, "auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        positive_rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorKind::degenerate, "auc undefined: one class is empty");
  const double np = static_cast<double>(n_pos);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

Recovery evaluate_recovery(const EccentricityScores& scores, const GroundTruth& truth) {
  Recovery r;
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  for (std::size_t u = 0; u < truth.users.size() && u < scores.user_z.size(); ++u) {
    if (!scores.user_scored(static_cast<UserId>(u))) continue;
    s.push_back(scores.user_z[u]);
    y.push_back(truth.users[u] == UserLabel::eccentric);
  }
  r.users = s.size();
  r.user_auc = auc(s, y);

  s.clear();
  y.clear();
  for (std::size_t i = 0; i < truth.items.size() && i < scores.item_z.size(); ++i) {
    if (!scores.item_scored(static_cast<ItemId>(i))) continue;
    s.push_back(scores.item_z[i]);
    y.push_back(truth.items[i] == ItemLabel::niche);
  }
  r.items = s.size();
  r.item_auc = auc(s, y);
  return r;
}

EventTable permute_timestamps(const EventTable& table, std::uint64_t seed) {
  EventTable out = table;
  CounterRng rng(seed);
  auto& ts = out.timestamps;
  for (std::size_t i = ts.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(ts[i - 1], ts[j]);
  }
  return out;
}

}  // namespace ecc::synth
