#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pam::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
};

[[nodiscard]] Summary summarize(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of y on x.
[[nodiscard]] LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
[[nodiscard]] KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Survival function of the Kolmogorov distribution, P(K > lambda).
[[nodiscard]] double kolmogorov_survival(double lambda);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Goodness of fit of observed counts to probabilities. Adjacent bins are pooled until each
/// expected count reaches `min_expected`.
[[nodiscard]] ChiSquareResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> probs,
                                             double min_expected = 5.0);

}  // namespace pam::stats
