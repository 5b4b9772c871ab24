#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pam/error.hpp"
#include "pam/noise.hpp"
#include "pam/stats.hpp"

using namespace pam;

namespace {
Geometry small() { return Geometry::centered(1.0, 0.1, 0.2, 0.005); }
}  // namespace

TEST_SUITE("noise") {
  TEST_CASE("geometry") {
    const Geometry g = small();
    CHECK(g.nx == 21);
    CHECK(g.nt == 40);
    CHECK(g.x(10) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g.space_index(0.0) == 10);
    CHECK(g.time_index(0.1) == 20);
    CHECK_THROWS_AS((void)g.space_index(5.0), Error);
    CHECK_THROWS_AS((void)Geometry::centered(1.0, -0.1, 0.2, 0.005), Error);
  }

  TEST_CASE("generation is a pure function of seed and geometry") {
    const auto a = NoiseGrid::generate(5, small());
    const auto b = NoiseGrid::generate(5, small());
    const auto c = NoiseGrid::generate(6, small());
    CHECK(a.values() == b.values());
    CHECK(a.values() != c.values());
  }

  TEST_CASE("standard normal marginals") {
    const auto grid = NoiseGrid::generate(3, Geometry::centered(10.0, 0.05, 0.5, 0.00125));
    const auto s = stats::summarize(grid.values());
    CHECK(s.n == 401 * 400);
    CHECK(std::fabs(s.mean) < 4.0 / std::sqrt(static_cast<double>(s.n)));
    CHECK(std::fabs(s.variance - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(s.n)));
    const Geometry& g = grid.geometry();
    CHECK(grid.increment(3, 4) == doctest::Approx(grid.xi(3, 4) * std::sqrt(g.dt * g.dx)));
  }

  TEST_CASE("transforms relabel cells") {
    const auto grid = NoiseGrid::generate(9, small());
    const Geometry& g = grid.geometry();
    const auto sh = grid.shift(2, -3);
    const auto rt = grid.reflect_time();
    const auto rs = grid.reflect_space();
    const auto ng = grid.negate();
    for (std::size_t j = 0; j + 2 < g.nt; ++j) {
      for (std::size_t k = 3; k < g.nx; ++k) CHECK(sh.xi(j, k) == grid.xi(j + 2, k - 3));
    }
    for (std::size_t j = 0; j < g.nt; ++j) {
      for (std::size_t k = 0; k < g.nx; ++k) {
        CHECK(rt.xi(j, k) == grid.xi(g.nt - 1 - j, k));
        CHECK(rs.xi(j, k) == grid.xi(j, g.nx - 1 - k));
        CHECK(ng.xi(j, k) == -grid.xi(j, k));
        CHECK(grid.extended(static_cast<std::int64_t>(j), static_cast<std::int64_t>(k)) == grid.xi(j, k));
      }
    }
    CHECK(rt.reflect_time().values() == grid.values());
    CHECK(rs.reflect_space().values() == grid.values());
    CHECK(grid.shift(0, 0).values() == grid.values());
  }

  TEST_CASE("shifted cells beyond the grid come from the same lattice") {
    const auto grid = NoiseGrid::generate(4, small());
    const auto a = grid.shift(5, 0);
    const auto b = a.shift(-5, 0);
    CHECK(b.values() == grid.values());
  }

  TEST_CASE("dilation and shear") {
    const auto grid = NoiseGrid::generate(2, small());
    const auto d = grid.dilate(2);
    CHECK(d.geometry().dx == doctest::Approx(grid.geometry().dx / 2.0));
    CHECK(d.geometry().dt == doctest::Approx(grid.geometry().dt / 4.0));
    CHECK(d.nt() == grid.nt());
    CHECK(d.nx() == grid.nx());
    CHECK_THROWS_AS((void)grid.dilate_by(1.5), Error);
    CHECK_THROWS_AS((void)grid.shear_by(0.5), Error);
    const auto q = grid.shear(1);
    for (std::size_t j = 0; j < 5; ++j) CHECK(q.xi(j, 2) == grid.extended(static_cast<std::int64_t>(j), 2 + static_cast<std::int64_t>(j)));
  }

  TEST_CASE("binary dump round-trips") {
    const auto grid = NoiseGrid::generate(12, small()).reflect_space();
    std::stringstream buf;
    grid.dump(buf);
    const auto back = NoiseGrid::load(buf);
    CHECK(back.values() == grid.values());
    CHECK(back.geometry() == grid.geometry());
    CHECK(back.seed() == grid.seed());
    std::stringstream junk("nope");
    CHECK_THROWS_AS((void)NoiseGrid::load(junk), Error);
  }

  TEST_CASE("pairing with a test function") {
    const auto grid = NoiseGrid::generate(8, small());
    const Geometry& g = grid.geometry();
    double direct = 0.0;
    for (std::size_t j = 0; j < g.nt; ++j)
      for (std::size_t k = 0; k < g.nx; ++k) direct += std::cos(g.x(k)) * grid.increment(j, k);
    CHECK(integrate(grid, [](double, double x) { return std::cos(x); }) == doctest::Approx(direct).epsilon(1e-13));
  }
}
