#include "pam/chaos.hpp"

#include <cmath>
#include <numbers>

#include "pam/error.hpp"
#include "pam/kernel.hpp"

namespace pam {

namespace {

void heat_step(const std::vector<double>& u, std::vector<double>& out, double side, double centre) {
  const std::size_t n = u.size();
  if (n == 1) {
    out[0] = centre * u[0];
    return;
  }
  out[0] = side * u[1] + centre * u[0];
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = side * (u[k - 1] + u[k + 1]) + centre * u[k];
  out[n - 1] = side * u[n - 2] + centre * u[n - 1];
}

void check_endpoints(const Geometry& g, const ChaosEndpoints& at) {
  if (at.s_index >= at.t_index || at.t_index > g.nt) {
    throw Error(ErrorKind::Range, "chaos terms need s_index < t_index <= nt");
  }
  if (at.x_cell >= g.nx || at.y_cell >= g.nx) throw Error(ErrorKind::Range, "endpoint cell outside the grid");
  if (g.dt > g.dx * g.dx / 2.0) throw Error(ErrorKind::Configuration, "explicit heat step unstable");
}

void check_order(int k) {
  if (k < 0) throw Error(ErrorKind::Range, "chaos order must be nonnegative");
  if (k > kMaxChaosOrder) {
    throw Error(ErrorKind::Budget, "chaos order " + std::to_string(k) + " exceeds the cap of " +
                                       std::to_string(kMaxChaosOrder));
  }
}

}  // namespace

std::vector<ChaosTerm> chaos_terms(const NoiseGrid& grid, int K, const ChaosEndpoints& at) {
  check_order(K);
  const Geometry& g = grid.geometry();
  check_endpoints(g, at);
  const std::size_t n = g.nx;
  const double side = g.dt / (2.0 * g.dx * g.dx);
  const double centre = 1.0 - 2.0 * side;
  const double scale = std::sqrt(g.dt / g.dx);

  // levels[m] holds the order-m iterated sum, carried forward one step at a time.
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(K) + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> heated(levels.size(), std::vector<double>(n, 0.0));
  levels[0][at.y_cell] = 1.0;
  for (std::size_t j = at.s_index; j < at.t_index; ++j) {
    for (std::size_t m = 0; m < levels.size(); ++m) heat_step(levels[m], heated[m], side, centre);
    const auto row = grid.row(j);
    for (std::size_t m = levels.size(); m-- > 1;) {
      for (std::size_t k = 0; k < n; ++k) levels[m][k] = heated[m][k] + row[k] * scale * heated[m - 1][k];
    }
    levels[0].swap(heated[0]);
  }

  const double base = levels[0][at.x_cell];
  if (!(base > 0.0)) throw Error(ErrorKind::BandConnectivity, "endpoints are outside the discrete light cone");
  std::vector<ChaosTerm> out;
  for (std::size_t m = 0; m < levels.size(); ++m) {
    out.push_back({static_cast<int>(m), at, m == 0 ? 1.0 : levels[m][at.x_cell] / base});
  }
  return out;
}

double chaos_term(const NoiseGrid& grid, int k, const ChaosEndpoints& at) {
  return chaos_terms(grid, k, at).back().value;
}

double chaos_partial_sum(const NoiseGrid& grid, int K, double beta, const ChaosEndpoints& at) {
  double sum = 0.0;
  double power = 1.0;
  for (const ChaosTerm& term : chaos_terms(grid, K, at)) {
    sum += power * term.value;
    power *= beta;
  }
  return sum;
}

double first_order_variance(const Geometry& g, const ChaosEndpoints& at) {
  check_endpoints(g, at);
  const std::size_t n = g.nx;
  const double side = g.dt / (2.0 * g.dx * g.dx);
  const double centre = 1.0 - 2.0 * side;
  const std::size_t steps = at.t_index - at.s_index;

  // forward[i] = H^(i+1) e_y, the heated start just before the noise of step s + i.
  std::vector<std::vector<double>> forward(steps, std::vector<double>(n));
  std::vector<double> u(n, 0.0), tmp(n);
  u[at.y_cell] = 1.0;
  for (std::size_t i = 0; i < steps; ++i) {
    heat_step(u, tmp, side, centre);
    u.swap(tmp);
    forward[i] = u;
  }
  const double base = u[at.x_cell];
  if (!(base > 0.0)) throw Error(ErrorKind::BandConnectivity, "endpoints are outside the discrete light cone");

  // back = H^(steps-1-i) e_x, walked from the last step backwards.
  std::vector<double> back(n, 0.0);
  back[at.x_cell] = 1.0;
  double total = 0.0;
  for (std::size_t i = steps; i-- > 0;) {
    for (std::size_t k = 0; k < n; ++k) {
      const double w = back[k] * forward[i][k];
      total += w * w;
    }
    heat_step(back, tmp, side, centre);
    back.swap(tmp);
  }
  return total * (g.dt / g.dx) / (base * base);
}

double second_moment_coefficient(int k, double t, double tol) {
  if (k < 0 || k > kMaxSecondMomentOrder) {
    throw Error(ErrorKind::Budget, "second-moment order must lie in 0..8");
  }
  if (!(t > 0.0)) throw Error(ErrorKind::Domain, "second-moment coefficient needs t > 0");
  // simplex[m] = integral over 0 < r_1 < ... < r_m < 1 of prod over the m+1 gaps of gap^(-1/2).
  // Parabolic scaling reduces each level to one integral: the inner level at time r equals
  // r^((m-2)/2) times its value at 1, and r = sin^2(theta) absorbs both endpoint singularities.
  double simplex = 1.0;
  for (int m = 1; m <= k; ++m) {
    const double power = static_cast<double>(m) - 1.0;
    const auto integrand = [power](double theta) { return 2.0 * std::pow(std::sin(theta), power); };
    simplex *= integrate_adaptive(integrand, 0.0, std::numbers::pi / 2.0, tol);
  }
  // The squared normalized chain integrates in space to 2 sqrt(pi t) / prod(2 sqrt(pi gap)).
  const double two_sqrt_pi = 2.0 * std::sqrt(std::numbers::pi);
  return two_sqrt_pi * std::sqrt(t) * std::pow(two_sqrt_pi, -(k + 1)) *
         std::pow(t, (static_cast<double>(k) - 1.0) / 2.0) * simplex;
}

double second_moment_series(double beta, double t, int K) {
  if (K < 0 || K > kMaxSecondMomentOrder) throw Error(ErrorKind::Budget, "series order must lie in 0..8");
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k <= K; ++k) {
    sum += power * second_moment_coefficient(k, t);
    power *= beta * beta;
  }
  return sum;
}

}  // namespace pam
