#include <doctest.h>

#include <cmath>
#include <vector>

#include "pam/error.hpp"
#include "pam/stats.hpp"

using namespace pam::stats;

// p-values frozen from scipy.stats (kstwobign.sf, ks_2samp, chisquare).
TEST_SUITE("stats") {
  TEST_CASE("kolmogorov survival function") {
    CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.963945243664875).epsilon(1e-12));
    CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.269999671677355).epsilon(1e-12));
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494858767553779).epsilon(1e-12));
    CHECK(kolmogorov_survival(0.0) == 1.0);
  }

  TEST_CASE("two-sample KS") {
    const auto r = ks_two_sample({0.1, 0.5, 0.9, 1.3, 2.2, -0.4, 0.05}, {0.3, 1.1, 1.9, 2.5, 3.3, 0.8});
    CHECK(r.statistic == doctest::Approx(0.428571428571429).epsilon(1e-13));
    CHECK(r.p_value == doctest::Approx(0.468385021544753).epsilon(1e-11));
    const auto same = ks_two_sample({1, 2, 3}, {1, 2, 3});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK_THROWS_AS((void)ks_two_sample({}, {1.0}), pam::Error);
  }

  TEST_CASE("chi-square goodness of fit") {
    const std::vector<std::size_t> obs = {18, 22, 31, 29};
    const std::vector<double> p = {0.2, 0.25, 0.3, 0.25};
    const auto r = chi_square_gof(obs, p);
    CHECK(r.statistic == doctest::Approx(1.2333333333333334).epsilon(1e-13));
    CHECK(r.dof == 3);
    CHECK(r.p_value == doctest::Approx(0.7450212005481858).epsilon(1e-11));
  }

  TEST_CASE("chi-square pools thin bins") {
    const std::vector<std::size_t> obs = {1, 2, 50, 47};
    const std::vector<double> p = {0.01, 0.02, 0.5, 0.47};
    const auto r = chi_square_gof(obs, p);
    CHECK(r.dof < 3);
  }

  TEST_CASE("summary and linear fit") {
    const std::vector<double> xs = {1, 2, 3, 4};
    const auto s = summarize(xs);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.variance == doctest::Approx(5.0 / 3.0));
    CHECK(s.stderr_mean == doctest::Approx(std::sqrt(5.0 / 12.0)));
    const std::vector<double> y = {1.5, 3.5, 5.5, 7.5};
    const auto f = linear_fit(xs, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-14));
  }
}
