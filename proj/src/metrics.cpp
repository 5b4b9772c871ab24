#include <algorithm>
#include <array>
#include <cmath>

#include "pam/error.hpp"
#include "pam/solver.hpp"

namespace pam {

namespace {

constexpr int kTerms = 32;

struct Level {
  int count;
  double half_width;
  double first_centre;
};

// 5 + 7 + 9 + 11 = 32 bumps, finer and more concentrated at each level.
constexpr std::array<Level, 4> kLevels{{{5, 4.0, -8.0}, {7, 2.0, -6.0}, {9, 1.0, -4.0}, {11, 0.5, -2.5}}};

double gaussian_weight(int m, double x) { return std::exp(-x * x / static_cast<double>(m)); }

void check_same_mesh(const GridFunction& f, const GridFunction& g) {
  if (f.size() != g.size() || f.x_min != g.x_min || f.dx != g.dx) {
    throw Error(ErrorKind::Domain, "grid functions live on different meshes");
  }
}

}  // namespace

double icm_test_function(int j, double x) {
  if (j < 1 || j > kTerms) throw Error(ErrorKind::Range, "test function index must be in 1..32");
  int idx = j - 1;
  for (const Level& lv : kLevels) {
    if (idx < lv.count) {
      const double centre = lv.first_centre + lv.half_width * static_cast<double>(idx);
      return std::max(0.0, 1.0 - std::abs(x - centre) / lv.half_width);
    }
    idx -= lv.count;
  }
  return 0.0;
}

double integrate_measure(const MeasureIC& mu, const Geometry& g, const std::function<double(double)>& phi) {
  double total = 0.0;
  for (const auto& [loc, mass] : mu.atoms) total += phi(loc) * mass;
  if (!mu.density.empty()) {
    if (mu.density.size() != g.nx) throw Error(ErrorKind::InvalidMeasure, "density size does not match nx");
    for (std::size_t k = 0; k < g.nx; ++k) total += phi(g.x(k)) * mu.density[k] * g.dx;
  }
  return total;
}

double metric_d_ICM(const MeasureIC& mu, const MeasureIC& zeta, const Geometry& g) {
  mu.validate(g);
  zeta.validate(g);
  double d = 0.0;
  for (int j = 1; j <= kTerms; ++j) {
    const auto phi = [j](double x) { return icm_test_function(j, x); };
    const double diff = std::abs(integrate_measure(mu, g, phi) - integrate_measure(zeta, g, phi));
    d += std::ldexp(std::min(1.0, diff), -j);
  }
  for (int m = 1; m <= kTerms; ++m) {
    const auto w = [m](double x) { return gaussian_weight(m, x); };
    const double diff = std::abs(integrate_measure(mu, g, w) - integrate_measure(zeta, g, w));
    d += std::ldexp(std::min(1.0, diff), -m);
  }
  return d;
}

double metric_d_CICM(const GridFunction& f, const GridFunction& g, double x_lo, double x_hi) {
  check_same_mesh(f, g);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f.values[k] > 0.0) || !(g.values[k] > 0.0)) {
      throw Error(ErrorKind::Domain, "d_CICM needs strictly positive functions");
    }
  }
  double d = 0.0;
  for (int m = 1; m <= kTerms; ++m) {
    double sup = 0.0;
    double integral = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double x = f.x(k);
      const double a = f.values[k];
      const double b = g.values[k];
      integral += gaussian_weight(m, x) * (a - b) * f.dx;
      if (std::abs(x) <= m && x >= x_lo && x <= x_hi) {
        sup = std::max(sup, std::abs(a - b) + std::abs(1.0 / a - 1.0 / b));
      }
    }
    d += std::ldexp(std::min(1.0, sup), -m) + std::ldexp(std::min(1.0, std::abs(integral)), -m);
  }
  return d;
}

bool icmm_member(const MeasureIC& mu, const MeasureIC& zeta, const Geometry& g, double a, double p) {
  if (!(a > 0.0) || !(p >= 0.0)) throw Error(ErrorKind::Domain, "need a > 0 and p >= 0");
  mu.validate(g);
  zeta.validate(g);
  std::vector<std::pair<double, double>> w_pts, z_pts;
  const auto collect = [&g](const MeasureIC& m, std::vector<std::pair<double, double>>& pts) {
    for (const auto& atom : m.atoms) pts.push_back(atom);
    if (!m.density.empty()) {
      for (std::size_t k = 0; k < g.nx; ++k) pts.emplace_back(g.x(k), m.density[k] * g.dx);
    }
  };
  collect(mu, w_pts);
  collect(zeta, z_pts);
  double total = 0.0;
  for (const auto& [w, mw] : w_pts) {
    for (const auto& [z, mz] : z_pts) {
      total += std::exp(-a * (w - z) * (w - z)) * (1.0 + std::pow(std::abs(w), p) + std::pow(std::abs(z), p)) * mw * mz;
    }
  }
  return std::isfinite(total) && total > 0.0;
}

}  // namespace pam
