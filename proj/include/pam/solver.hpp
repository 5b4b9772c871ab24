#pragma once

#include <Eigen/Dense>
#include <limits>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pam/geometry.hpp"
#include "pam/noise.hpp"

namespace pam {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A real function sampled at the cell centres of a geometry's space axis.
struct GridFunction {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] double x(std::size_t k) const noexcept { return x_min + (static_cast<double>(k) + 0.5) * dx; }
  [[nodiscard]] static GridFunction on(const Geometry& g, std::vector<double> values);
};

/// Positive measure: point masses plus an optional density sampled at cell centres.
struct MeasureIC {
  std::vector<std::pair<double, double>> atoms;  // (location, mass)
  std::vector<double> density;                   // empty, or one value per cell

  [[nodiscard]] static MeasureIC delta(double x, double mass = 1.0);
  [[nodiscard]] static MeasureIC lebesgue(const Geometry& g);
  [[nodiscard]] static MeasureIC from_density(std::vector<double> density);

  /// Throws Error(InvalidMeasure) for negative masses, size mismatch, or zero total mass.
  void validate(const Geometry& g) const;
  /// Cell masses: atoms binned to the nearest cell, density times dx.
  [[nodiscard]] std::vector<double> cell_masses(const Geometry& g) const;
  [[nodiscard]] double total_mass(const Geometry& g) const;
};

enum class Direction { Forward, Backward };

/// Throws Error(Configuration) unless dt <= dx^2/2.
void check_stability(const Geometry& g);

/// diag(D_j): exp(beta * dW / dx - beta^2 dt / (2 dx)) per cell.
[[nodiscard]] std::vector<double> noise_factors(const NoiseGrid& grid, std::size_t j, double beta);

/// Dense D_j H for one step; intended for inspection and small grids.
[[nodiscard]] Matrix step_matrix(const NoiseGrid& grid, std::size_t j, double beta);

/// Discrete Green's function for the window [s_index, t_index].
class Propagator {
 public:
  Propagator(Geometry geometry, double beta, std::size_t s_index, std::size_t t_index, Matrix p)
      : geometry_(geometry), beta_(beta), s_index_(s_index), t_index_(t_index), p_(std::move(p)) {}

  [[nodiscard]] const Geometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] std::size_t s_index() const noexcept { return s_index_; }
  [[nodiscard]] std::size_t t_index() const noexcept { return t_index_; }
  [[nodiscard]] std::size_t steps() const noexcept { return t_index_ - s_index_; }
  [[nodiscard]] double s() const noexcept { return geometry_.t(s_index_); }
  [[nodiscard]] double t() const noexcept { return geometry_.t(t_index_); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return p_; }
  [[nodiscard]] double operator()(std::size_t k, std::size_t l) const { return p_(k, l); }
  /// Z(t, x_k | s, y_l) = P[k][l] / dx.
  [[nodiscard]] double density(std::size_t k, std::size_t l) const { return p_(k, l) / geometry_.dx; }

 private:
  Geometry geometry_;
  double beta_;
  std::size_t s_index_;
  std::size_t t_index_;
  Matrix p_;
};

[[nodiscard]] Propagator green_field(const NoiseGrid& grid, double beta, std::size_t s_index,
                                     std::size_t t_index);

/// max|P(s,t) - P(r,t) P(s,r)| / max|P(s,t)|.
[[nodiscard]] double chapman_kolmogorov_residual(const NoiseGrid& grid, double beta, std::size_t s_index,
                                                 std::size_t r_index, std::size_t t_index);

/// u <- P(s,t) u, one step at a time (cell masses in, cell masses out).
void propagate(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
               std::vector<double>& u);
/// v <- P(s,t)^T v.
void propagate_adjoint(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                       std::vector<double>& v);

/// Forward: x -> Z(t, x | s; mu). Backward: y -> Z(t; zeta | s, y).
[[nodiscard]] GridFunction solve_from_measure(const Propagator& prop, const MeasureIC& ic, Direction direction);
/// Same result without building the matrix.
[[nodiscard]] GridFunction solve_from_measure(const NoiseGrid& grid, double beta, std::size_t s_index,
                                              std::size_t t_index, const MeasureIC& ic, Direction direction);

/// Z(t; zeta | s; mu) = sum_k sum_l zeta_k P[k][l] mu_l / dx.
[[nodiscard]] double partition_function(const Propagator& prop, const MeasureIC& mu, const MeasureIC& zeta);

/// P[k][l] / (dx rho(t-s, x_k - x_l)); NaN where rho underflows. Error(Range) at equal times.
[[nodiscard]] Matrix normalized_field(const Propagator& prop);
/// Normalized value at one pair of cells, from a single forward solve.
[[nodiscard]] double normalized_value(const NoiseGrid& grid, double beta, std::size_t s_index,
                                      std::size_t t_index, std::size_t k_x, std::size_t l_y);
/// Column of normalized values x -> Z(t,x|s,y_l) / rho, from a single forward solve.
[[nodiscard]] std::vector<double> normalized_column(const NoiseGrid& grid, double beta, std::size_t s_index,
                                                    std::size_t t_index, std::size_t l_y);

// ---------------------------------------------------------------------------
// KPZ profiles
// ---------------------------------------------------------------------------

struct SlopePair {
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
};

struct KPZField {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<double> h;
  std::optional<SlopePair> slopes;

  [[nodiscard]] double x(std::size_t k) const noexcept { return x_min + (static_cast<double>(k) + 0.5) * dx; }
};

/// h = log(field). With `at_equal_times`, returns that profile unchanged (the s = t convention).
[[nodiscard]] KPZField hopf_cole(const GridFunction& field, const std::optional<GridFunction>& at_equal_times = {});
/// Centred difference, one-sided at the two ends.
[[nodiscard]] GridFunction burgers_derivative(const KPZField& kpz);
/// Least-squares slopes over cells [margin, 2 margin) from each end.
[[nodiscard]] SlopePair slope_limits(const KPZField& kpz, std::size_t margin);

// ---------------------------------------------------------------------------
// Mild-equation residual
// ---------------------------------------------------------------------------

struct MildResidual {
  double heat = 0.0;   // |H^n delta - rho|: deterministic discretisation error
  double noise = 0.0;  // Wick exponential minus its first-order (Ito) term, propagated
  double total = 0.0;  // |Z - rho - beta * sum_j H^{n-1-j}(dW_j/dx * H u_j)|
};

/// Sup norms over cells [window.first, window.second) (all cells when empty); delta start at cell l_y.
[[nodiscard]] MildResidual mild_residual(const NoiseGrid& grid, double beta, std::size_t s_index,
                                         std::size_t t_index, std::size_t l_y,
                                         std::optional<std::pair<std::size_t, std::size_t>> window = {});

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Test function phi_j, j = 1..32: unit triangular bumps on four dyadic levels.
[[nodiscard]] double icm_test_function(int j, double x);
[[nodiscard]] double metric_d_ICM(const MeasureIC& mu, const MeasureIC& zeta, const Geometry& g);
/// Supremum terms range over cells with |x| <= m that also lie in [x_lo, x_hi].
[[nodiscard]] double metric_d_CICM(const GridFunction& f, const GridFunction& g,
                                   double x_lo = -std::numeric_limits<double>::infinity(),
                                   double x_hi = std::numeric_limits<double>::infinity());
/// The double integral of exp(-a (w-z)^2) (1 + |w|^p + |z|^p) is finite and positive.
[[nodiscard]] bool icmm_member(const MeasureIC& mu, const MeasureIC& zeta, const Geometry& g, double a,
                               double p = 0.0);
/// Integral of phi against the measure: atoms at their exact locations, density by the midpoint rule.
[[nodiscard]] double integrate_measure(const MeasureIC& mu, const Geometry& g,
                                       const std::function<double(double)>& phi);

}  // namespace pam
