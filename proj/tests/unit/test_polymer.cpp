#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pam/error.hpp"
#include "pam/polymer.hpp"

using namespace pam;

namespace {
Geometry small() { return Geometry::centered(2.0, 0.1, 0.3, 0.005); }

PolymerSpec spec(double beta, const Geometry& g) {
  PolymerSpec s;
  s.beta = beta;
  s.t_index = g.nt;
  s.start = Endpoint::at(0.0);
  s.end = Endpoint::spread(MeasureIC::lebesgue(g));
  return s;
}
}  // namespace

TEST_SUITE("polymer") {
  TEST_CASE("finite-dimensional laws are consistent") {
    const Geometry g = small();
    const auto grid = NoiseGrid::generate(4, g);
    const auto sp = spec(1.0, g);
    const auto two = fdd(grid, sp, {20, 40});
    const double total = std::accumulate(two.p.begin(), two.p.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const auto one = one_point_law(grid, sp, 20);
    const auto marg = two.marginal(0);
    for (std::size_t k = 0; k < g.nx; ++k) CHECK(marg[k] == doctest::Approx(one[k]).epsilon(1e-10));
    const auto reduced = two.sum_out(1);
    CHECK(reduced.dims() == 1);
    for (std::size_t k = 0; k < g.nx; ++k) CHECK(reduced.p[k] == doctest::Approx(one[k]).epsilon(1e-10));
  }

  TEST_CASE("deterministic polymer is the random-walk bridge law") {
    const Geometry g = small();
    const auto grid = NoiseGrid::generate(1, g);
    const auto law = one_point_law(grid, spec(0.0, g), g.nt / 2);
    double mean = 0.0;
    for (std::size_t k = 0; k < g.nx; ++k) mean += law[k] * g.x(k);
    CHECK(std::fabs(mean) < 1e-12);
  }

  TEST_CASE("one-point determinant is the field") {
    const Geometry g = small();
    const auto grid = NoiseGrid::generate(2, g);
    const auto prop = green_field(grid, 1.0, 0, g.nt);
    const double d = km_determinant(prop, {0.0}, {0.2});
    CHECK(d == doctest::Approx(prop.density(g.space_index(0.2), g.space_index(0.0))).epsilon(1e-12));
    CHECK(km_determinant(prop, {-0.5, 0.5}, {-0.4, 0.6}) > 0.0);
    CHECK_THROWS_AS((void)km_determinant(prop, {0.5, -0.5}, {-0.4, 0.6}), Error);
  }

  TEST_CASE("stochastic dominance of ordered starts") {
    const Geometry g = small();
    const auto grid = NoiseGrid::generate(3, g);
    for (double beta : {0.0, 1.0, 1.5}) {
      const auto rep = stochastic_dominance_check(grid, beta, 0, g.nt, -0.4, 0.3, MeasureIC::lebesgue(g), g.nt / 2);
      CHECK(rep.dominated);
      CHECK(rep.max_excess <= 1e-12);
    }
  }

  TEST_CASE("TV bound with equal pairs is tight at zero") {
    const Geometry g = small();
    const auto grid = NoiseGrid::generate(5, g);
    const auto pair = std::make_pair(MeasureIC::delta(0.0), MeasureIC::lebesgue(g));
    const auto rep = tv_bound_check(grid, 1.0, 0, g.nt, pair, pair, {g.nt / 2});
    CHECK(rep.tv_lhs == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.satisfied);
  }

  TEST_CASE("sampled paths") {
    const Geometry g = small();
    const auto grid = NoiseGrid::generate(6, g);
    const PolymerSampler sampler(grid, spec(1.0, g), 4, {0.25});
    const auto a = sampler.sample(1, 17);
    const auto b = sampler.sample(1, 17);
    CHECK(a.positions == b.positions);
    CHECK(a.positions.front() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.times.size() == sampler.time_indices().size());
    for (std::size_t i = 1; i < a.cells.size(); ++i) {
      const std::size_t d = a.cells[i] > a.cells[i - 1] ? a.cells[i] - a.cells[i - 1] : a.cells[i - 1] - a.cells[i];
      CHECK(d <= 4);
    }
    CHECK(a.holder_stats.count(0.25) == 1);
  }

  TEST_CASE("holder seminorm of a known path") {
    PolymerPath p;
    p.times = {0.0, 1.0, 2.0};
    p.positions = {0.0, 1.0, 0.0};
    CHECK(holder_seminorm(p, 0.75) == doctest::Approx(1.0));
    CHECK(holder_seminorm(p, 0.5) == doctest::Approx(1.0));
  }
}
