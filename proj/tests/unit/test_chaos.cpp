#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pam/chaos.hpp"
#include "pam/error.hpp"
#include "pam/kernel.hpp"
#include "pam/solver.hpp"
#include "pam/stats.hpp"
#include "pam/verify.hpp"

using namespace pam;

TEST_SUITE("chaos") {
  // Dirichlet integral over the simplex gives a_k(t) = 2^-k sqrt(pi) t^(k/2) / Gamma((k+1)/2).
  TEST_CASE("second-moment coefficients match the Dirichlet closed form") {
    for (double t : {0.3, 1.0, 2.5}) {
      for (int k = 0; k <= kMaxSecondMomentOrder; ++k) {
        const double expect = std::pow(2.0, -k) * std::sqrt(std::numbers::pi) * std::pow(t, k / 2.0) /
                              std::tgamma((k + 1) / 2.0);
        CAPTURE(k);
        CHECK(second_moment_coefficient(k, t) == doctest::Approx(expect).epsilon(1e-10));
      }
    }
    CHECK(second_moment_coefficient(1, 1.0) ==
          doctest::Approx(appendix_c_closed_form(LemmaId::Int1, {.t = 1.0})).epsilon(1e-12));
    CHECK_THROWS_AS((void)second_moment_coefficient(9, 1.0), Error);
  }

  TEST_CASE("zeroth term and first-order derivative") {
    const Geometry g = Geometry::centered(2.0, 0.1, 0.25, 0.005);
    const auto grid = NoiseGrid::generate(11, g);
    const ChaosEndpoints at{0, g.space_index(0.0), g.nt, g.space_index(0.3)};
    const auto terms = chaos_terms(grid, 3, at);
    REQUIRE(terms.size() == 4);
    CHECK(terms[0].value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(chaos_term(grid, 2, at) == doctest::Approx(terms[2].value).epsilon(1e-14));
    // The normalized solution is analytic in beta; its derivative at 0 is the first-order term.
    const double b = 1e-4;
    const double plus = normalized_value(grid, b, 0, g.nt, at.x_cell, at.y_cell);
    const double minus = normalized_value(grid, -b, 0, g.nt, at.x_cell, at.y_cell);
    const double heat = normalized_value(grid, 0.0, 0, g.nt, at.x_cell, at.y_cell);
    CHECK((plus - minus) / (2.0 * b * heat) == doctest::Approx(terms[1].value).epsilon(1e-6));
    const double partial = chaos_partial_sum(grid, 3, 0.1, at);
    CHECK(partial == doctest::Approx(1.0 + 0.1 * terms[1].value + 0.01 * terms[2].value + 0.001 * terms[3].value));
  }

  TEST_CASE("first-order variance agrees with Monte Carlo") {
    const Geometry g = Geometry::centered(2.0, 0.1, 0.25, 0.005);
    const ChaosEndpoints at{0, g.space_index(0.0), g.nt, g.space_index(0.0)};
    std::vector<double> xs;
    for (std::uint64_t s = 0; s < 3000; ++s) xs.push_back(chaos_term(NoiseGrid::generate(500 + s, g), 1, at));
    const auto sum = stats::summarize(xs);
    const double exact = first_order_variance(g, at);
    CHECK(std::fabs(sum.mean) < 4.0 * sum.stderr_mean);
    // The sample variance has relative standard error about sqrt(2 / n).
    CHECK(std::fabs(sum.variance / exact - 1.0) < 4.0 * std::sqrt(2.0 / 3000.0));
    CHECK(exact == doctest::Approx(std::sqrt(std::numbers::pi * 0.25) / 2.0).epsilon(0.1));
  }

  TEST_CASE("endpoints outside the light cone") {
    const Geometry g = Geometry::centered(2.0, 0.1, 0.05, 0.005);
    const ChaosEndpoints at{0, g.space_index(-1.5), g.nt, g.space_index(1.5)};
    CHECK_THROWS_AS((void)first_order_variance(g, at), Error);
  }

  TEST_CASE("one-step second moment is the lognormal factor") {
    // After a single step E[Z^2] / E[Z]^2 = E[D^2] = exp(beta^2 dt / dx).
    verify::LyapunovConfig cfg;
    cfg.beta = 1.0;
    cfg.dx = 0.1;
    cfg.times = {0.005};
    const auto rep = verify::lyapunov_trend_check(cfg);
    CHECK(rep.statistics["final_rate"].get<double>() == doctest::Approx(1.0 / 0.1).epsilon(1e-12));
  }

  TEST_CASE("exact second moment agrees with Monte Carlo") {
    verify::LyapunovConfig cfg;
    cfg.beta = 1.0;
    cfg.dx = 0.1;
    cfg.times = {0.1};
    const auto rep = verify::lyapunov_trend_check(cfg);
    const double exact = rep.statistics["rates"][0]["second_moment"].get<double>();
    const Geometry g = Geometry::centered(4.0 * std::sqrt(0.1) + 1.0, 0.1, 0.1, 0.005);
    const std::size_t y = g.space_index(0.0);
    std::vector<double> sq;
    for (std::uint64_t s = 0; s < 4000; ++s) {
      const auto grid = NoiseGrid::generate(9000 + s, g);
      const double z = normalized_value(grid, 1.0, 0, g.nt, y, y) / normalized_value(grid, 0.0, 0, g.nt, y, y);
      sq.push_back(z * z);
    }
    const auto sum = stats::summarize(sq);
    CHECK(std::fabs(sum.mean - exact) < 4.0 * sum.stderr_mean);
  }
}
