#include "pam/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>

#include "pam/error.hpp"

namespace pam::stats {

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = ss / static_cast<double>(s.n - 1);
  s.stderr_mean = std::sqrt(s.variance / static_cast<double>(s.n));
  return s;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::Domain, "regression needs two or more pairs");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::Domain, "regression abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double rss = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  if (x.size() > 2) fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.3) {
    // Small-argument form: P(K <= l) = sqrt(2 pi)/l * sum exp(-(2k-1)^2 pi^2 / (8 l^2)).
    const double pi2 = M_PI * M_PI;
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
    }
    return 1.0 - std::sqrt(2.0 * M_PI) / lambda * cdf;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::Domain, "KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  // Stephens' finite-sample correction of the asymptotic statistic.
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

ChiSquareResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> probs,
                               double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw Error(ErrorKind::Domain, "observed counts and probabilities differ in length");
  }
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  const double psum = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::vector<double> obs_bins, exp_bins;
  double o = 0.0, e = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o += static_cast<double>(observed[k]);
    e += n * probs[k] / psum;
    if (e >= min_expected) {
      obs_bins.push_back(o);
      exp_bins.push_back(e);
      o = e = 0.0;
    }
  }
  if (!obs_bins.empty()) {
    obs_bins.back() += o;
    exp_bins.back() += e;
  } else {
    obs_bins.push_back(o);
    exp_bins.push_back(e);
  }
  ChiSquareResult r;
  for (std::size_t k = 0; k < obs_bins.size(); ++k) {
    const double diff = obs_bins[k] - exp_bins[k];
    r.statistic += diff * diff / exp_bins[k];
  }
  r.dof = obs_bins.size() > 1 ? obs_bins.size() - 1 : 0;
  if (r.dof == 0) return r;
  const boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

}  // namespace pam::stats
