#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ecc::stats {

/// (x - mean) / sd with the population sd (divisor n). A zero-spread
/// population maps to all zeros. Throws Error(argument) on empty input.
std::vector<double> zscore(std::span<const double> values);

struct DensitySeries {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  std::size_t sample_size = 0;

  /// Trapezoidal integral of density over grid.
  double integral() const;
};

/// Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), with the
/// sample sd. Falls back to the sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE evaluated on `grid_size` points spanning [min - 3h, max + 3h].
/// Requires at least two distinct values (Error(argument) otherwise).
DensitySeries kde(std::span<const double> values, std::size_t grid_size = 512);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = slope * x + intercept; r^2 = 1 - SS_res/SS_tot
/// (0 when y is constant). Error(degenerate) when every x is equal.
RegressionFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Hartigan & Hartigan dip of the empirical distribution: half the largest
/// deviation from the closest unimodal CDF. Lies in (0, 0.25]; n identical
/// values give 1 / (2n). Input need not be sorted.
double dip_statistic(std::span<const double> values);

enum class TestKind { welch_t, two_proportion_z };

std::string_view to_string(TestKind kind) noexcept;

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestKind test = TestKind::welch_t;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double degrees_of_freedom = 0.0;  // Welch-Satterthwaite; 0 for the z test
};

/// Two-sided Welch t-test. Error(argument) for fewer than two observations,
/// Error(degenerate) when either sample has zero variance.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided pooled two-proportion z-test of k1/n1 vs k2/n2.
TestResult two_proportion_z_test(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2);

/// Survival function of Student's t with `df` degrees of freedom, two-sided.
double student_t_two_sided_p(double t, double df);

}  // namespace ecc::stats
