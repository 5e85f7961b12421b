#include "ecc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "ecc/error.hpp"
#include "ecc/parallel.hpp"

namespace ecc::stats {
namespace {

double mean_of(std::span<const double> v) { return stable_sum(v) / static_cast<double>(v.size()); }

/// Sum of squared deviations from `center`, compensated.
double sum_sq_dev(std::span<const double> v, double center) {
  CompensatedSum acc;
  for (double x : v) {
    const double d = x - center;
    acc.add(d * d);
  }
  return acc.value();
}

/// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double sample_variance(std::span<const double> v) {
  return sum_sq_dev(v, mean_of(v)) / static_cast<double>(v.size() - 1);
}

}  // namespace

std::vector<double> zscore(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::argument, "zscore of an empty population");
  std::vector<double> out(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  // Equal values can still leave a rounding residue in the mean.
  if (*lo == *hi) return std::vector<double>(values.size(), 0.0);

  const double n = static_cast<double>(values.size());
  const double mean = stable_sum(values) / n;

  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - mean;
  std::vector<double> squares(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) squares[i] = out[i] * out[i];
  const double sd = std::sqrt(stable_sum(squares) / n);

  if (!(sd > 0.0)) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  for (double& x : out) x /= sd;
  return out;
}

double DensitySeries::integral() const {
  double total = 0.0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    total += 0.5 * (density[j] + density[j - 1]) * (grid[j] - grid[j - 1]);
  }
  return total;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::degenerate, "bandwidth needs at least two values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(sample_variance(sorted));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensitySeries kde(std::span<const double> values, std::size_t grid_size) {
  if (grid_size < 2) throw Error(ErrorKind::argument, "kde grid needs at least two points");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2 || sorted.front() == sorted.back()) {
    throw Error(ErrorKind::argument,
                fmt::format("kernel density needs at least two distinct values (got {} values)", sorted.size()));
  }

  DensitySeries out;
  out.sample_size = sorted.size();
  out.bandwidth = silverman_bandwidth(sorted);
  const double h = out.bandwidth;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  out.grid.resize(grid_size);
  out.density.resize(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    out.grid[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(grid_size - 1);
  }

  // Contributions beyond 8 bandwidths are below 1e-14 of the peak.
  const double reach = 8.0 * h;
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  parallel_for(grid_size, 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const double g = out.grid[j];
      auto first = std::lower_bound(sorted.begin(), sorted.end(), g - reach);
      auto last = std::upper_bound(first, sorted.end(), g + reach);
      double acc = 0.0;
      for (auto it = first; it != last; ++it) {
        const double u = (g - *it) / h;
        acc += std::exp(-0.5 * u * u);
      }
      out.density[j] = acc * norm;
    }
  });
  return out;
}

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::argument, "ols_fit: x and y differ in length");
  if (x.size() < 2) throw Error(ErrorKind::argument, "ols_fit needs at least two points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  CompensatedSum sxx, sxy, syy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0)) throw Error(ErrorKind::degenerate, "ols_fit: every x value is equal");

  RegressionFit fit;
  fit.n = x.size();
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  if (syy.value() > 0.0) {
    CompensatedSum ss_res;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - (fit.intercept + fit.slope * x[k]);
      ss_res.add(r * r);
    }
    fit.r_squared = std::clamp(1.0 - ss_res.value() / syy.value(), 0.0, 1.0);
  }
  return fit;
}

std::string_view to_string(TestKind kind) noexcept {
  return kind == TestKind::welch_t ? "welch-t" : "two-proportion-z";
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) throw Error(ErrorKind::argument, "invalid t statistic or degrees of freedom");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(boost::math::ibeta(0.5 * df, 0.5, x), 0.0, 1.0);
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorKind::argument,
                fmt::format("welch_t_test needs at least two observations per sample (got {} and {})", a.size(),
                            b.size()));
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  if (!(va > 0.0) || !(vb > 0.0)) throw Error(ErrorKind::degenerate, "welch_t_test: a sample has zero variance");

  const double sa = va / na;
  const double sb = vb / nb;
  TestResult r;
  r.test = TestKind::welch_t;
  r.n1 = a.size();
  r.n2 = b.size();
  r.statistic = (mean_of(a) - mean_of(b)) / std::sqrt(sa + sb);
  r.degrees_of_freedom = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.statistic, r.degrees_of_freedom);
  return r;
}

TestResult two_proportion_z_test(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2) {
    throw Error(ErrorKind::argument,
                fmt::format("two_proportion_z_test: invalid counts {}/{} vs {}/{}", k1, n1, k2, n2));
  }
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  if (!(pooled > 0.0) || !(pooled < 1.0)) {
    throw Error(ErrorKind::degenerate, "two_proportion_z_test: pooled proportion is 0 or 1");
  }
  const double se =
      std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  TestResult r;
  r.test = TestKind::two_proportion_z;
  r.n1 = n1;
  r.n2 = n2;
  r.statistic = (p1 - p2) / se;
  r.p_value = std::clamp(std::erfc(std::fabs(r.statistic) / std::numbers::sqrt2), 0.0, 1.0);
  return r;
}

}  // namespace ecc::stats
