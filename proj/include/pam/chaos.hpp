#pragma once

#include <cstddef>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/noise.hpp"

namespace pam {

/// Largest order evaluated pathwise, and largest order of the second-moment series.
inline constexpr int kMaxChaosOrder = 3;
inline constexpr int kMaxSecondMomentOrder = 8;

/// Endpoints of a point-to-point normalized field, as grid indices.
struct ChaosEndpoints {
  std::size_t s_index = 0;
  std::size_t y_cell = 0;
  std::size_t t_index = 0;
  std::size_t x_cell = 0;
};

struct ChaosTerm {
  int k = 0;
  ChaosEndpoints at;
  double value = 0.0;
};

/// Discrete k-fold Ito integrals over strictly increasing time indices, k = 0..K, each divided
/// by the discrete heat kernel between the endpoints (so the k = 0 term is exactly 1).
[[nodiscard]] std::vector<ChaosTerm> chaos_terms(const NoiseGrid& grid, int K, const ChaosEndpoints& at);
[[nodiscard]] double chaos_term(const NoiseGrid& grid, int k, const ChaosEndpoints& at);
/// Sum over k <= K of beta^k times the k-th term.
[[nodiscard]] double chaos_partial_sum(const NoiseGrid& grid, int K, double beta, const ChaosEndpoints& at);

/// Exact variance of the first-order term over the noise law, for the given geometry.
[[nodiscard]] double first_order_variance(const Geometry& g, const ChaosEndpoints& at);

/// k-th coefficient of E[Z^2] in powers of beta^2, by recursive quadrature over the time simplex.
[[nodiscard]] double second_moment_coefficient(int k, double t, double tol = 1e-12);
/// Sum over k <= K of beta^(2k) times the k-th coefficient.
[[nodiscard]] double second_moment_series(double beta, double t, int K);

}  // namespace pam
