// Hartigan & Hartigan (1985) dip, algorithm AS 217 with the later
// corrections (symmetric GCM distance, termination guard). Internally the
// dip is tracked as 2n * D and divided out at the end.

#include <algorithm>
#include <vector>

#include "ecc/error.hpp"
#include "ecc/stats.hpp"

namespace ecc::stats {

double dip_statistic(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw Error(ErrorKind::argument, "dip_statistic needs at least two values");

  // 1-based copies keep the index arithmetic identical to the published algorithm.
  std::vector<double> x(n + 1);
  std::copy(values.begin(), values.end(), x.begin() + 1);
  std::sort(x.begin() + 1, x.end());

  const long N = static_cast<long>(n);
  double dip = 1.0;
  if (x[1] == x[n]) return dip / (2.0 * static_cast<double>(n));

  std::vector<long> mn(n + 1), mj(n + 1), gcm(n + 1), lcm(n + 1);

  // Indices over which combination is necessary for the convex minorant fit.
  mn[1] = 1;
  for (long j = 2; j <= N; ++j) {
    mn[j] = j - 1;
    for (;;) {
      const long mnj = mn[j];
      const long mnmnj = mn[mnj];
      if (mnj == 1 || (x[j] - x[mnj]) * static_cast<double>(mnj - mnmnj) <
                          (x[mnj] - x[mnmnj]) * static_cast<double>(j - mnj)) {
        break;
      }
      mn[j] = mnmnj;
    }
  }

  // ... and for the concave majorant fit.
  mj[n] = N;
  for (long k = N - 1; k >= 1; --k) {
    mj[k] = k + 1;
    for (;;) {
      const long mjk = mj[k];
      const long mjmjk = mj[mjk];
      if (mjk == N || (x[k] - x[mjk]) * static_cast<double>(mjk - mjmjk) <
                          (x[mjk] - x[mjmjk]) * static_cast<double>(k - mjk)) {
        break;
      }
      mj[k] = mjmjk;
    }
  }

  long low = 1;
  long high = N;
  for (;;) {
    // Change points of the GCM from high down to low.
    long ic = 1;
    gcm[1] = high;
    while (gcm[ic] > low) {
      const long prev = gcm[ic];
      ++ic;
      gcm[ic] = mn[prev];
    }
    const long l_gcm = ic;
    long ix = ic - 1;

    // Change points of the LCM from low up to high.
    ic = 1;
    lcm[1] = low;
    while (lcm[ic] < high) {
      const long prev = lcm[ic];
      ++ic;
      lcm[ic] = mj[prev];
    }
    const long l_lcm = ic;
    long iv = 2;

    // Largest distance between the GCM and the LCM from low to high.
    double d = 0.0;
    long ig = l_gcm;
    long ih = l_lcm;
    if (l_gcm != 2 || l_lcm != 2) {
      do {
        const long gcmix = gcm[ix];
        const long lcmiv = lcm[iv];
        if (gcmix > lcmiv) {
          const long gcmi1 = gcm[ix + 1];
          const double dx = static_cast<double>(lcmiv - gcmi1 + 1) -
                            (x[lcmiv] - x[gcmi1]) * static_cast<double>(gcmix - gcmi1) / (x[gcmix] - x[gcmi1]);
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const long lcmiv1 = lcm[iv - 1];
          const double dx = (x[gcmix] - x[lcmiv1]) * static_cast<double>(lcmiv - lcmiv1) / (x[lcmiv] - x[lcmiv1]) -
                            static_cast<double>(gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 1) ix = 1;
        if (iv > l_lcm) iv = l_lcm;
      } while (gcm[ix] != lcm[iv]);
    } else {
      d = 1.0;
    }

    if (d < dip) break;

    // Dip for the convex minorant.
    double dip_l = 0.0;
    for (long j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const long jb = gcm[j + 1];
      const long je = gcm[j];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = static_cast<double>(je - jb) / (x[je] - x[jb]);
        for (long jj = jb; jj <= je; ++jj) {
          const double t = static_cast<double>(jj - jb + 1) - (x[jj] - x[jb]) * c;
          max_t = std::max(max_t, t);
        }
      }
      dip_l = std::max(dip_l, max_t);
    }

    // Dip for the concave majorant.
    double dip_u = 0.0;
    for (long j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const long jb = lcm[j];
      const long je = lcm[j + 1];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = static_cast<double>(je - jb) / (x[je] - x[jb]);
        for (long jj = jb; jj <= je; ++jj) {
          const double t = (x[jj] - x[jb]) * c - static_cast<double>(jj - jb - 1);
          max_t = std::max(max_t, t);
        }
      }
      dip_u = std::max(dip_u, max_t);
    }

    dip = std::max(dip, std::max(dip_l, dip_u));

    // Without this guard the cycle can repeat forever.
    if (low == gcm[ig] && high == lcm[ih]) break;
    low = gcm[ig];
    high = lcm[ih];
  }

  return dip / (2.0 * static_cast<double>(n));
}

}  // namespace ecc::stats
