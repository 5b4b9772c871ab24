#include <doctest.h>

#include <cmath>

#include "pam/error.hpp"
#include "pam/verify.hpp"

using namespace pam;
using namespace pam::verify;

TEST_SUITE("verify") {
  TEST_CASE("symmetries hold pathwise") {
    SymmetryConfig cfg;
    cfg.half_width = 2.0;
    cfg.nt = 40;
    cfg.s_index = 5;
    cfg.t_index = 30;
    for (auto kind : {SymmetryKind::Shift, SymmetryKind::ReflectTime, SymmetryKind::ReflectSpace, SymmetryKind::Negate}) {
      CAPTURE(to_string(kind));
      for (std::uint64_t seed : {1u, 2u}) {
        cfg.seed = seed;
        const auto rep = symmetry_test(kind, cfg);
        CHECK(rep.pass);
      }
      CHECK(parse_symmetry(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS((void)parse_symmetry("rotate"), Error);
  }

  TEST_CASE("appendix rows are all satisfied") {
    const auto rows = appendix_c_rows(4, 77);
    CHECK(rows.size() == 40);
    for (const auto& r : rows) {
      CAPTURE(r.lemma);
      CHECK(r.ok);
    }
  }

  TEST_CASE("mollified delta is a probability on the grid") {
    const Geometry g = Geometry::centered(2.0, 0.05, 0.1, 0.00125);
    for (double w : {0.025, 0.05, 0.4}) {
      const auto m = mollified_delta(g, w);
      const auto masses = m.cell_masses(g);
      double total = 0.0, first = 0.0;
      for (std::size_t k = 0; k < g.nx; ++k) {
        total += masses[k];
        first += masses[k] * g.x(k);
        CHECK(masses[k] >= 0.0);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::fabs(first) < 1e-12);
    }
    CHECK_THROWS_AS((void)mollified_delta(g, 0.0), Error);
  }

  TEST_CASE("holder estimator rejects short fits") {
    HolderConfig cfg;
    cfg.n_seeds = 2;
    cfg.lags = {1, 2};
    CHECK_THROWS_AS((void)holder_exponent_estimate(cfg), Error);
    cfg.lags = {};
    cfg.horizon = 0.05;
    CHECK_THROWS_AS((void)holder_exponent_estimate(cfg), Error);
  }

  TEST_CASE("criterion metadata and reports") {
    CHECK(criterion_name(1) == "appendix_c_oracles");
    CHECK(criterion_name(15) == "continuity_modulus");
    CHECK_THROWS_AS((void)run_criterion(0, Profile::Fast), Error);
    const auto a = run_criterion(2, Profile::Fast);
    const auto b = run_criterion(2, Profile::Fast);
    CHECK(a.to_json().dump() == b.to_json().dump());
    const auto j = a.to_json();
    for (const char* key : {"test_name", "config", "statistics", "pass", "seeds"}) CHECK(j.contains(key));
  }
}

TEST_SUITE("verify") {
  TEST_CASE("stationarity in the end point") {
    StationarityConfig cfg;
    cfg.n_seeds = 100;
    cfg.dx = 0.1;
    const auto rep = stationarity_test(cfg);
    CHECK(rep.pass);
    CHECK(rep.n_seeds == 100);
  }

  TEST_CASE("polynomial growth bound is stable under window doubling") {
    GrowthConfig cfg;
    const auto rep = growth_bound_test(cfg);
    CHECK(rep.pass);
    cfg.beta = 0.0;
    const auto flat = growth_bound_test(cfg);
    CHECK(flat.statistics["direct"]["q99_doubled"].get<double>() <= 1.0);
  }
}
