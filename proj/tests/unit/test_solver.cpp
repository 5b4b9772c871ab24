#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "pam/error.hpp"
#include "pam/kernel.hpp"
#include "pam/solver.hpp"

using namespace pam;

namespace {

// With dt = dx^2 / 2 the heat step is the lazy walk 1/4, 1/2, 1/4, i.e. two fair coin flips.
double lazy_walk(std::size_t n, long offset) {
  const long m = static_cast<long>(n) + offset;
  if (m < 0 || m > 2 * static_cast<long>(n)) return 0.0;
  const double ln = std::lgamma(2.0 * n + 1) - std::lgamma(m + 1.0) - std::lgamma(2.0 * n - m + 1) -
                    2.0 * static_cast<double>(n) * std::log(2.0);
  return std::exp(ln);
}

Geometry reference(double half, double horizon) { return Geometry::centered(half, 0.05, horizon, 0.00125); }

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("deterministic field is the lazy random walk") {
    const Geometry g = reference(3.0, 0.05);
    const auto grid = NoiseGrid::generate(1, g);
    const auto prop = green_field(grid, 0.0, 0, g.nt);
    const std::size_t y = g.space_index(0.0);
    for (std::size_t k = 0; k < g.nx; ++k) {
      const long off = static_cast<long>(k) - static_cast<long>(y);
      CHECK(prop(k, y) == doctest::Approx(lazy_walk(g.nt, off)).epsilon(1e-12));
    }
  }

  TEST_CASE("stability guard") {
    Geometry g = reference(1.0, 0.1);
    g.dt = 0.002;
    CHECK_THROWS_AS(check_stability(g), Error);
  }

  TEST_CASE("noise factors are Wick exponentials") {
    const Geometry g = reference(1.0, 0.1);
    const auto grid = NoiseGrid::generate(3, g);
    const auto f = noise_factors(grid, 4, 1.5);
    for (std::size_t k = 0; k < g.nx; ++k) {
      const double expect = std::exp(1.5 * grid.increment(4, k) / g.dx - 1.125 * g.dt / g.dx);
      CHECK(f[k] == doctest::Approx(expect).epsilon(1e-14));
    }
  }

  TEST_CASE("semigroup, positivity and light cone") {
    const Geometry g = reference(2.0, 0.1);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto grid = NoiseGrid::generate(seed, g);
      CHECK(chapman_kolmogorov_residual(grid, 1.0, 5, 40, g.nt) <= 1e-12);
      const auto prop = green_field(grid, 1.0, 10, 30);
      for (std::size_t k = 0; k < g.nx; ++k) {
        for (std::size_t l = 0; l < g.nx; ++l) {
          const std::size_t d = k > l ? k - l : l - k;
          if (d > 20) {
            CHECK(prop(k, l) == 0.0);
          } else {
            CHECK(prop(k, l) > 0.0);
          }
        }
      }
    }
  }

  TEST_CASE("matrix, vector and adjoint solves agree") {
    const Geometry g = reference(2.0, 0.1);
    const auto grid = NoiseGrid::generate(7, g);
    const auto prop = green_field(grid, 0.8, 0, g.nt);
    const MeasureIC mu = MeasureIC::delta(0.3, 2.0);
    const auto a = solve_from_measure(prop, mu, Direction::Forward);
    const auto b = solve_from_measure(grid, 0.8, 0, g.nt, mu, Direction::Forward);
    for (std::size_t k = 0; k < g.nx; ++k) CHECK(a.values[k] == doctest::Approx(b.values[k]).epsilon(1e-12));

    std::vector<double> v(g.nx, 0.0);
    v[g.space_index(-0.2)] = 1.0;
    propagate_adjoint(grid, 0.8, 0, g.nt, v);
    const std::size_t x = g.space_index(-0.2);
    for (std::size_t l = 0; l < g.nx; ++l) CHECK(v[l] == doctest::Approx(prop(x, l)).epsilon(1e-12));

    const MeasureIC leb = MeasureIC::lebesgue(g);
    double direct = 0.0;
    for (std::size_t k = 0; k < g.nx; ++k) direct += g.dx * a.values[k];
    CHECK(partition_function(prop, mu, leb) == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("negating the noise flips beta") {
    const Geometry g = reference(2.0, 0.1);
    const auto grid = NoiseGrid::generate(5, g);
    const auto a = green_field(grid, 1.2, 0, g.nt);
    const auto b = green_field(grid.negate(), -1.2, 0, g.nt);
    CHECK(a.matrix() == b.matrix());
  }

  TEST_CASE("normalized field") {
    const Geometry g = reference(3.0, 0.5);
    const auto grid = NoiseGrid::generate(1, g);
    const auto prop = green_field(grid, 0.0, 0, g.nt);
    const auto n = normalized_field(prop);
    const std::size_t y = g.space_index(0.0);
    CHECK(n(y, y) == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(normalized_value(grid, 0.0, 0, g.nt, y, y) == doctest::Approx(n(y, y)).epsilon(1e-12));
    CHECK_THROWS_AS((void)normalized_field(green_field(grid, 0.0, 3, 3)), Error);
  }

  TEST_CASE("measure validation") {
    const Geometry g = reference(1.0, 0.1);
    CHECK_THROWS_AS(MeasureIC::delta(0.0, -1.0).validate(g), Error);
    CHECK_THROWS_AS(MeasureIC::from_density({1.0, 2.0}).validate(g), Error);
    CHECK(MeasureIC::lebesgue(g).total_mass(g) == doctest::Approx(g.nx * g.dx));
  }

  TEST_CASE("hopf-cole and slopes of an exact exponential profile") {
    GridFunction f;
    f.x_min = -10.0;
    f.dx = 0.1;
    for (std::size_t k = 0; k < 200; ++k) {
      const double x = f.x(k);
      f.values.push_back(std::exp(x < 0 ? -2.0 * x : 3.0 * x) + 1e-300);
    }
    const auto kpz = hopf_cole(f);
    CHECK(kpz.h[5] == doctest::Approx(std::log(f.values[5])));
    const auto slopes = slope_limits(kpz, 20);
    CHECK(slopes.lambda_minus == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(slopes.lambda_plus == doctest::Approx(3.0).epsilon(1e-9));
    const auto u = burgers_derivative(kpz);
    CHECK(u.values[110] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(u.values[90] == doctest::Approx(-2.0).epsilon(1e-9));
    // At equal times the profile is returned as given.
    const auto same = hopf_cole(f, f);
    CHECK(same.h == f.values);
  }

  TEST_CASE("mild residual splits into heat and noise parts") {
    const Geometry g = reference(3.0, 0.25);
    const auto grid = NoiseGrid::generate(2, g);
    const auto r0 = mild_residual(grid, 0.0, 0, g.nt, g.space_index(0.0));
    CHECK(r0.noise == 0.0);
    CHECK(r0.total == doctest::Approx(r0.heat));
    const auto r1 = mild_residual(grid, 0.05, 0, g.nt, g.space_index(0.0));
    CHECK(r1.total <= r1.heat + r1.noise + 1e-12);
  }

  TEST_CASE("ICM test functions and metrics") {
    CHECK(icm_test_function(1, 0.0) >= 0.0);
    const Geometry g = reference(3.0, 0.1);
    const MeasureIC a = MeasureIC::delta(0.0);
    CHECK(metric_d_ICM(a, a, g) == 0.0);
    CHECK(metric_d_ICM(a, MeasureIC::delta(0.5), g) > 0.0);
    CHECK(icmm_member(a, MeasureIC::lebesgue(g), g, 1.0, 2.0));
    CHECK(integrate_measure(MeasureIC::lebesgue(g), g, [](double) { return 1.0; }) ==
          doctest::Approx(g.nx * g.dx));
  }
}

TEST_SUITE("solver") {
  TEST_CASE("single-step mild residual by hand") {
    const Geometry g = Geometry::centered(1.0, 0.1, 0.005, 0.005);
    REQUIRE(g.nt == 1);
    const auto grid = NoiseGrid::generate(21, g);
    const std::size_t y = g.space_index(0.0);
    const double beta = 0.7;
    // One step of the lazy walk keeps weight 1/2 at the start cell.
    const double e = beta * grid.xi(0, y) * std::sqrt(g.dt / g.dx);
    const double d = std::exp(e - beta * beta * g.dt / (2.0 * g.dx));
    const double kern = 1.0 / std::sqrt(2.0 * M_PI * g.dt);
    const double expect = std::fabs(0.5 * d / g.dx - kern - 0.5 * e / g.dx);
    const auto r = mild_residual(grid, beta, 0, 1, y, std::make_pair(y, y + 1));
    CHECK(r.total == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.heat == doctest::Approx(std::fabs(0.5 / g.dx - kern)).epsilon(1e-12));
    CHECK(r.noise == doctest::Approx(std::fabs((d - 1.0 - e) * 0.5 / g.dx)).epsilon(1e-12));
  }

  TEST_CASE("mild residual shrinks under refinement") {
    auto mean_total = [](double dx) {
      double sum = 0.0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Geometry g = Geometry::centered(3.0, dx, 0.25, dx * dx / 2.0);
        const auto grid = NoiseGrid::generate(300 + seed, g);
        sum += mild_residual(grid, 0.05, 0, g.nt, g.space_index(0.0)).total;
      }
      return sum / 20.0;
    };
    const double coarse = mean_total(0.1);
    const double fine = mean_total(0.1 / std::sqrt(2.0));
    CHECK(coarse / fine >= 1.3);
    const Geometry a = Geometry::centered(3.0, 0.1, 0.25, 0.005);
    const Geometry b = Geometry::centered(3.0, 0.05, 0.25, 0.00125);
    const double ha = mild_residual(NoiseGrid::generate(1, a), 0.0, 0, a.nt, a.space_index(0.0)).heat;
    const double hb = mild_residual(NoiseGrid::generate(1, b), 0.0, 0, b.nt, b.space_index(0.0)).heat;
    CHECK(hb < ha);
  }

  TEST_CASE("gaussian-growth data: divergence only above the threshold") {
    // The heat flow of exp(a y^2) dy is finite at time tau iff a < 1 / (2 tau); tau = 0.25 puts the threshold at 2.
    // Every domain reads the central columns of one large noise grid.
    const Geometry big = Geometry::centered(5.0, 0.05, 0.25, 0.00125);
    const auto noise = NoiseGrid::generate(17, big);
    auto value = [&](double a, double half, double beta) {
      const Geometry g = Geometry::centered(half, 0.05, 0.25, 0.00125);
      std::vector<double> density(g.nx);
      for (std::size_t k = 0; k < g.nx; ++k) density[k] = std::exp(a * g.x(k) * g.x(k));
      const std::size_t offset = (big.nx - g.nx) / 2;
      std::vector<double> xi(g.nt * g.nx);
      for (std::size_t j = 0; j < g.nt; ++j)
        for (std::size_t k = 0; k < g.nx; ++k) xi[j * g.nx + k] = noise.xi(j, k + offset);
      const auto grid = NoiseGrid::from_values(17, g, std::move(xi));
      const auto f = solve_from_measure(grid, beta, 0, g.nt, MeasureIC::from_density(density), Direction::Forward);
      return f.values[g.space_index(0.0)];
    };
    for (double beta : {0.0, 1.0}) {
      CAPTURE(beta);
      const double below3 = value(1.0, 3.0, beta), below5 = value(1.0, 5.0, beta);
      CHECK(std::fabs(below5 / below3 - 1.0) < 1e-3);
      const double above3 = value(3.0, 3.0, beta), above4 = value(3.0, 4.0, beta), above5 = value(3.0, 5.0, beta);
      CHECK(above4 / above3 > 10.0);
      CHECK(above5 / above4 > 10.0);
    }
  }
}
