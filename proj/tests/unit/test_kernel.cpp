#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pam/error.hpp"
#include "pam/kernel.hpp"

using namespace pam;

// Reference values from an independent scipy quadrature of the same integrands, with the space
// integral centred on the bridge peak and r = a + (b - a) sin^2(theta) in time.
TEST_SUITE("kernel") {
  TEST_CASE("gaussian density") {
    CHECK(rho(1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(rho(0.5, 0.3) == doctest::Approx(std::exp(-0.09) / std::sqrt(std::numbers::pi)).epsilon(1e-14));
    CHECK(rho(0.0, 1.0) == 0.0);
    CHECK(log_rho(2.0, 1.0) == doctest::Approx(std::log(rho(2.0, 1.0))).epsilon(1e-14));
  }

  TEST_CASE("identity lemmas against frozen quadrature") {
    struct Case {
      LemmaId id;
      LemmaParams p;
      double expected;
    };
    const Case cases[] = {
        {LemmaId::Int2, {.t = 1.3, .r = 0.4, .x = 0.7}, 0.536062581881724},
        {LemmaId::Int1, {.t = 0.8, .x = -1.1}, 0.792665459521179},
        {LemmaId::Int3, {.t = 1.2, .h = 0.5, .x = 0.3}, 0.733842610011181},
        {LemmaId::Int4bd, {.t = 1.2, .h = 0.5, .x = 0.3}, 0.42165593078224},
        {LemmaId::Diffhspace, {.t = 1.0, .r = 0.35, .h = 0.6, .x = 1.4}, 0.54498204027922},
    };
    for (const auto& c : cases) {
      CAPTURE(to_string(c.id));
      CHECK(appendix_c_closed_form(c.id, c.p) == doctest::Approx(c.expected).epsilon(1e-11));
      CHECK(appendix_c_quadrature(c.id, c.p) == doctest::Approx(c.expected).epsilon(1e-9));
    }
  }

  TEST_CASE("int1 does not depend on the end point") {
    const double a = appendix_c_closed_form(LemmaId::Int1, {.t = 0.6, .x = 0.0});
    const double b = appendix_c_quadrature(LemmaId::Int1, {.t = 0.6, .x = 2.5});
    CHECK(a == doctest::Approx(std::sqrt(0.6 * std::numbers::pi) / 2.0).epsilon(1e-14));
    CHECK(b == doctest::Approx(a).epsilon(1e-9));
  }

  TEST_CASE("int3 and int4bd add up to int1 at t + h") {
    for (double h : {0.01, 0.3, 2.0}) {
      const LemmaParams p{.t = 0.9, .h = h, .x = 0.4};
      const double whole = appendix_c_closed_form(LemmaId::Int1, {.t = 0.9 + h, .x = 0.4});
      CHECK(appendix_c_closed_form(LemmaId::Int3, p) + appendix_c_closed_form(LemmaId::Int4bd, p) ==
            doctest::Approx(whole).epsilon(1e-13));
    }
  }

  TEST_CASE("inequality lemmas hold with positive slack") {
    const LemmaParams xy{.t = 0.7, .x = 0.2, .y = -0.5};
    for (LemmaId id : {LemmaId::Xybd, LemmaId::XybdCorollary}) {
      const auto rep = check_inequality_bounds(id, xy);
      CHECK(rep.satisfied);
      CHECK(rep.slack() > 0.0);
    }
    const auto gap = check_inequality_bounds(LemmaId::Withgap, {.t = 1.0, .h = 0.4, .x = 0.5, .delta = 0.3, .T = 2.0});
    CHECK(gap.satisfied);
    const auto nogap = check_inequality_bounds(LemmaId::Nogap, {.t = 0.5, .h = 0.2, .x = 1.0, .T = 2.0, .K = 2.0});
    CHECK(nogap.satisfied);
  }

  TEST_CASE("domain and label errors") {
    CHECK_THROWS_AS(check_lemma_domain(LemmaId::Int3, {.t = 1.0, .h = 0.0}), Error);
    CHECK_THROWS_AS((void)appendix_c_closed_form(LemmaId::Xybd, {}), Error);
    CHECK_THROWS_AS((void)parse_lemma_id("lem:nothing"), Error);
    for (LemmaId id : all_lemmas()) CHECK(parse_lemma_id(to_string(id)) == id);
  }

  TEST_CASE("adaptive quadrature") {
    double err = 0.0;
    const double v = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13, &err);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(err <= 1e-12);
  }
}
