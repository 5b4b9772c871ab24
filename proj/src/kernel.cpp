#include "pam/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pam/error.hpp"

namespace pam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double rho(double t, double x) noexcept {
  if (!(t > 0.0)) return 0.0;
  return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

double log_rho(double t, double x) noexcept {
  if (!(t > 0.0)) return -std::numeric_limits<double>::infinity();
  return -x * x / (2.0 * t) - 0.5 * std::log(t) - kLogSqrt2Pi;
}

std::string_view to_string(LemmaId id) noexcept {
  switch (id) {
    case LemmaId::Int2: return "lem:int2";
    case LemmaId::Int1: return "lem:int1";
    case LemmaId::Int3: return "lem:int3";
    case LemmaId::Int4bd: return "lem:int4bd";
    case LemmaId::Xybd: return "lem:xybd";
    case LemmaId::XybdCorollary: return "corollary_after_xybd";
    case LemmaId::Diffhspace: return "lem:diffhspace";
    case LemmaId::Withgap: return "lem:withgap";
    case LemmaId::Near0: return "lem:near0";
    case LemmaId::Nogap: return "prop:nogap";
  }
  return "unknown";
}

LemmaId parse_lemma_id(std::string_view label) {
  for (LemmaId id : all_lemmas()) {
    if (label == to_string(id)) return id;
  }
  throw Error(ErrorKind::Configuration, "unknown lemma id '" + std::string(label) + "'");
}

const std::vector<LemmaId>& all_lemmas() {
  static const std::vector<LemmaId> ids{LemmaId::Int2,       LemmaId::Int1,     LemmaId::Int3,
                                        LemmaId::Int4bd,     LemmaId::Xybd,     LemmaId::XybdCorollary,
                                        LemmaId::Diffhspace, LemmaId::Withgap,  LemmaId::Near0,
                                        LemmaId::Nogap};
  return ids;
}

bool is_identity(LemmaId id) noexcept {
  switch (id) {
    case LemmaId::Int2:
    case LemmaId::Int1:
    case LemmaId::Int3:
    case LemmaId::Int4bd:
    case LemmaId::Diffhspace:
      return true;
    default:
      return false;
  }
}

std::string LemmaParams::describe(LemmaId id) const {
  std::vector<std::pair<const char*, double>> used;
  switch (id) {
    case LemmaId::Int2: used = {{"t", t}, {"r", r}, {"x", x}}; break;
    case LemmaId::Int1: used = {{"t", t}, {"x", x}}; break;
    case LemmaId::Int3:
    case LemmaId::Int4bd: used = {{"t", t}, {"h", h}, {"x", x}}; break;
    case LemmaId::Xybd:
    case LemmaId::XybdCorollary: used = {{"t", t}, {"x", x}, {"y", y}}; break;
    case LemmaId::Diffhspace: used = {{"t", t}, {"h", h}, {"r", r}, {"x", x}}; break;
    case LemmaId::Withgap: used = {{"t", t}, {"h", h}, {"x", x}, {"delta", delta}, {"T", T}}; break;
    case LemmaId::Near0: used = {{"t", t}, {"h", h}, {"x", x}, {"alpha", alpha}}; break;
    case LemmaId::Nogap: used = {{"t", t}, {"h", h}, {"x", x}, {"T", T}, {"K", K}, {"delta", delta}}; break;
  }
  std::string out;
  for (const auto& [name, value] : used) {
    if (!out.empty()) out += ';';
    out += name;
    out += '=';
    out += shortest(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypotheses
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void domain_fail(LemmaId id, const std::string& hypothesis) {
  throw Error(ErrorKind::Domain, std::string(to_string(id)) + " requires " + hypothesis);
}

bool finite_all(const LemmaParams& p) {
  return std::isfinite(p.t) && std::isfinite(p.r) && std::isfinite(p.h) && std::isfinite(p.x) &&
         std::isfinite(p.y) && std::isfinite(p.delta) && std::isfinite(p.T) && std::isfinite(p.K) &&
         std::isfinite(p.alpha);
}

}  // namespace

void check_lemma_domain(LemmaId id, const LemmaParams& p) {
  if (!finite_all(p)) domain_fail(id, "finite parameters");
  switch (id) {
    case LemmaId::Int2:
    case LemmaId::Int1:
    case LemmaId::Xybd:
    case LemmaId::XybdCorollary:
      if (!(p.t > 0.0)) domain_fail(id, "t > 0");
      break;
    case LemmaId::Int3:
    case LemmaId::Int4bd:
      if (!(p.t > 0.0)) domain_fail(id, "t > 0");
      if (!(p.h > 0.0)) domain_fail(id, "h > 0");
      break;
    case LemmaId::Diffhspace:
      if (!(p.t > 0.0)) domain_fail(id, "t > 0");
      if (!(p.h >= 0.0)) domain_fail(id, "h >= 0");
      break;
    case LemmaId::Withgap:
      if (!(p.delta > 0.0 && p.delta < 1.0)) domain_fail(id, "0 < delta < 1");
      if (!(p.T > 1.0)) domain_fail(id, "T > 1");
      if (!(p.h >= 0.0)) domain_fail(id, "h >= 0");
      if (!(p.delta <= p.t && p.t + p.h <= p.T)) domain_fail(id, "delta <= t <= t+h <= T");
      break;
    case LemmaId::Near0:
      if (!(p.h >= 0.0 && p.h <= 1.0)) domain_fail(id, "h in [0,1]");
      if (!(p.alpha > 0.0 && p.alpha <= 1.0)) domain_fail(id, "alpha in (0,1]");
      if (!(p.t >= 0.0 && p.t <= std::pow(p.h, p.alpha))) domain_fail(id, "t in [0, h^alpha]");
      break;
    case LemmaId::Nogap:
      if (!(p.T > 1.0 && p.K > 1.0)) domain_fail(id, "T > 1 and K > 1");
      if (!(p.t >= 0.0 && p.t <= p.T)) domain_fail(id, "t in [0,T]");
      if (!(std::fabs(p.x) <= p.K)) domain_fail(id, "x in [-K,K]");
      if (!(p.h >= 0.0 && p.h <= 1.0)) domain_fail(id, "h in [0,1]");
      if (p.delta < 0.0) domain_fail(id, "delta >= 0");
      if (p.delta > 0.0 && !(p.t >= p.delta && p.t + p.h <= p.T)) {
        domain_fail(id, "t, t+h in [delta, T] for the gap bound");
      }
      break;
  }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

double appendix_c_closed_form(LemmaId id, const LemmaParams& p) {
  check_lemma_domain(id, p);
  const double t = p.t;
  const double h = p.h;
  const double r = p.r;
  switch (id) {
    case LemmaId::Int2:
      if (!(r > 0.0 && r < t)) return 0.0;
      return std::sqrt(t) / (2.0 * std::sqrt(kPi * (t - r) * r));
    case LemmaId::Int1:
      return std::sqrt(t * kPi) / 2.0;
    case LemmaId::Int3:
      return std::sqrt(t + h) / (2.0 * std::sqrt(kPi)) * (std::asin(1.0 - 2.0 * h / (t + h)) + kPi / 2.0);
    case LemmaId::Int4bd:
      return std::sqrt(t + h) / (2.0 * std::sqrt(kPi)) * (kPi / 2.0 - std::asin(1.0 - 2.0 * h / (t + h)));
    case LemmaId::Diffhspace: {
      if (!(r > 0.0 && r < t)) return 0.0;
      const double mix = (t + h) * (t - r) + t * (t + h - r);
      const double pre = std::sqrt(t * (t + h)) / std::sqrt(2.0 * kPi * r * mix);
      const double expo = -(p.x * p.x / (2.0 * t)) * h * h * r / ((t + h) * mix);
      return pre * std::exp(expo);
    }
    default:
      throw Error(ErrorKind::Domain, std::string(to_string(id)) + " is an inequality, not an identity");
  }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          double* error_out) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(b > a)) {
    if (error_out) *error_out = 0.0;
    return 0.0;
  }
  double pilot_err = 0.0;
  double l1 = 0.0;
  (void)gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &pilot_err, &l1);
  const double rel = std::clamp(abs_tol / std::max(l1, 1e-300), 1e-12, 0.1);
  double err = 0.0;
  const double value = gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel, &err);
  if (error_out) *error_out = err;
  if (!std::isfinite(value) || err > abs_tol) {
    std::ostringstream msg;
    msg << "achieved error " << err << " exceeds tolerance " << abs_tol;
    throw Error(ErrorKind::QuadratureFailure, msg.str());
  }
  return value;
}

namespace {

/// Time split r + rem = tau, with rem carried separately to avoid cancellation near tau.
struct Split {
  double r;
  double rem;
};

/// rho(rem, end - z) rho(r, z) / rho(r + rem, end), evaluated in log space.
double bridge(double tau, double end, Split s, double z) {
  if (!(s.r > 0.0) || !(s.rem > 0.0)) return 0.0;
  return std::exp(log_rho(s.rem, end - z) + log_rho(s.r, z) - log_rho(tau, end));
}

struct Peak {
  double mean;
  double sd;
};

Peak bridge_peak(double tau, double end, Split s) {
  if (!(s.r > 0.0) || !(s.rem > 0.0)) return {0.0, 0.0};
  return {end * s.r / tau, std::sqrt(s.r * s.rem / tau)};
}

/// Location and width of the product of two Gaussian bumps.
Peak product_peak(const Peak& a, const Peak& b) {
  const double va = a.sd * a.sd;
  const double vb = b.sd * b.sd;
  if (!(va > 0.0) || !(vb > 0.0)) return {a.mean, 0.0};
  return {(a.mean * vb + b.mean * va) / (va + vb), std::sqrt(va * vb / (va + vb))};
}

std::vector<Peak> pair_peaks(const Peak& a, const Peak& b) { return {a, b, product_peak(a, b)}; }

/// Fixed-order rule on windows scaled to each Gaussian peak, so the result is smooth in the
/// peak parameters. Accuracy is ~1e-13 relative to the peak mass.
double integrate_line(const std::function<double(double)>& f, const std::vector<Peak>& peaks) {
  using boost::math::quadrature::gauss_kronrod;
  static constexpr double kOffsets[] = {-14.0, -8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0, 14.0};
  std::vector<double> cuts;
  for (const Peak& pk : peaks) {
    if (!(pk.sd > 0.0)) continue;
    for (double o : kOffsets) cuts.push_back(pk.mean + o * pk.sd);
  }
  if (cuts.empty()) return 0.0;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 0, 0.0);
  }
  if (!std::isfinite(total)) throw Error(ErrorKind::QuadratureFailure, "non-finite space integrand");
  return total;
}

/// ∫_a^b g(r, b - r) dr with r = a + (b-a) sin^2(θ), absorbing inverse square-root endpoint
/// singularities.
double integrate_time(const std::function<double(Split)>& g, double a, double b, double abs_tol,
                      double* err_out) {
  const double len = b - a;
  if (!(len > 0.0)) {
    *err_out = 0.0;
    return 0.0;
  }
  auto integrand = [&](double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return g({a + len * s * s, len * c * c}) * 2.0 * len * s * c;
  };
  return integrate_adaptive(integrand, 0.0, kPi / 2.0, abs_tol, err_out);
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

QuadResult quadrature_impl(LemmaId id, const LemmaParams& p, double tol) {
  check_lemma_domain(id, p);
  const double t = p.t;
  const double h = p.h;
  const double x = p.x;
  QuadResult out;

  // Single space integrals at a fixed r in (0, t).
  if (id == LemmaId::Int2 || id == LemmaId::Diffhspace) {
    if (!(p.r > 0.0 && p.r < t)) return out;
    const Split at_t{p.r, t - p.r};
    if (id == LemmaId::Int2) {
      out.value = integrate_line(
          [&](double z) {
            const double q = bridge(t, x, at_t, z);
            return q * q;
          },
          {bridge_peak(t, x, at_t)});
    } else {
      const Split at_th{p.r, t + h - p.r};
      out.value = integrate_line(
          [&](double z) { return bridge(t + h, x, at_th, z) * bridge(t, x, at_t, z); },
          pair_peaks(bridge_peak(t + h, x, at_th), bridge_peak(t, x, at_t)));
    }
    return out;
  }

  // Double integrals; the time range is (0, t) except for lem:int4bd.
  double a = 0.0;
  double b = t;
  std::function<double(Split)> outer;
  switch (id) {
    case LemmaId::Int1:
      outer = [&](Split s) {
        return integrate_line(
            [&](double z) {
              const double q = bridge(t, x, s, z);
              return q * q;
            },
            {bridge_peak(t, x, s)});
      };
      break;
    case LemmaId::Int3:
      outer = [&](Split s) {
        const Split sh{s.r, s.rem + h};
        return integrate_line(
            [&](double z) {
              const double q = bridge(t + h, x, sh, z);
              return q * q;
            },
            {bridge_peak(t + h, x, sh)});
      };
      break;
    case LemmaId::Int4bd:
      a = t;
      b = t + h;
      outer = [&](Split s) {
        return integrate_line(
            [&](double z) {
              const double q = bridge(t + h, x, s, z);
              return q * q;
            },
            {bridge_peak(t + h, x, s)});
      };
      break;
    case LemmaId::Xybd:
      outer = [&](Split s) {
        return integrate_line([&](double z) { return bridge(t, p.y, s, z) * bridge(t, x, s, z); },
                              pair_peaks(bridge_peak(t, p.y, s), bridge_peak(t, x, s)));
      };
      break;
    case LemmaId::XybdCorollary:
      outer = [&](Split s) {
        return integrate_line(
            [&](double z) {
              const double d = bridge(t, p.y, s, z) - bridge(t, x, s, z);
              return d * d;
            },
            pair_peaks(bridge_peak(t, p.y, s), bridge_peak(t, x, s)));
      };
      break;
    case LemmaId::Withgap:
      outer = [&](Split s) {
        const Split sh{s.r, s.rem + h};
        return integrate_line([&](double z) { return bridge(t + h, x, sh, z) * bridge(t, x, s, z); },
                              pair_peaks(bridge_peak(t + h, x, sh), bridge_peak(t, x, s)));
      };
      break;
    case LemmaId::Near0:
    case LemmaId::Nogap:
      if (!(t > 0.0) || h == 0.0) return out;
      outer = [&](Split s) {
        const Split sh{s.r, s.rem + h};
        return integrate_line(
            [&](double z) {
              const double d = bridge(t + h, x, sh, z) - bridge(t, x, s, z);
              return d * d;
            },
            pair_peaks(bridge_peak(t + h, x, sh), bridge_peak(t, x, s)));
      };
      break;
    default:
      break;
  }
  out.value = integrate_time(outer, a, b, tol, &out.error);
  return out;
}

}  // namespace

double appendix_c_quadrature(LemmaId id, const LemmaParams& p, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::Domain, "quadrature tolerance must be positive");
  return quadrature_impl(id, p, tol).value;
}

// ---------------------------------------------------------------------------
// Inequalities
// ---------------------------------------------------------------------------

double InequalityReport::slack() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& [name, v] : lower_bounds) s = std::min(s, lhs - v);
  for (const auto& [name, v] : upper_bounds) s = std::min(s, v - lhs);
  return s;
}

InequalityReport check_inequality_bounds(LemmaId id, const LemmaParams& p, double tol) {
  if (is_identity(id)) {
    throw Error(ErrorKind::Domain, std::string(to_string(id)) + " is an identity, not an inequality");
  }
  const QuadResult q = quadrature_impl(id, p, tol);
  InequalityReport rep;
  rep.id = id;
  rep.lhs = q.value;
  rep.quadrature_error = q.error;
  const double t = p.t;
  const double h = p.h;
  switch (id) {
    case LemmaId::Xybd:
      rep.lower_bounds.emplace_back("sqrt(pi t)/2 - |x-y|/2", std::sqrt(kPi * t) / 2.0 - std::fabs(p.x - p.y) / 2.0);
      rep.upper_bounds.emplace_back("sqrt(pi t)/2", std::sqrt(kPi * t) / 2.0);
      break;
    case LemmaId::XybdCorollary:
      rep.upper_bounds.emplace_back("|x-y|", std::fabs(p.x - p.y));
      break;
    case LemmaId::Withgap: {
      const double lower = std::sqrt(kPi * t) / 2.0 - p.T / (p.delta * std::sqrt(kPi)) * std::sqrt(h) -
                           h * std::sqrt(kPi) * std::pow(p.T, 1.5) / (8.0 * std::pow(p.delta, 3)) * p.x * p.x;
      rep.lower_bounds.emplace_back("gap lower bound", lower);
      rep.upper_bounds.emplace_back("sqrt(pi t)/2", std::sqrt(kPi * t) / 2.0);
      break;
    }
    case LemmaId::Near0:
      rep.upper_bounds.emplace_back("10 h^(alpha/2)", 10.0 * std::pow(h, p.alpha / 2.0));
      break;
    case LemmaId::Nogap:
      rep.upper_bounds.emplace_back("10 T^(3/2) K^2 h^(1/7)", 10.0 * std::pow(p.T, 1.5) * p.K * p.K * std::pow(h, 1.0 / 7.0));
      if (p.delta > 0.0) {
        rep.upper_bounds.emplace_back("10/delta^3 T^(3/2) K^2 sqrt(h)",
                                      10.0 / std::pow(p.delta, 3) * std::pow(p.T, 1.5) * p.K * p.K * std::sqrt(h));
      }
      break;
    default:
      break;
  }
  // Bounds that hold with equality (x = y in lem:xybd) are judged up to the quadrature error.
  rep.satisfied = rep.slack() >= -std::max(q.error, tol);
  return rep;
}

}  // namespace pam
