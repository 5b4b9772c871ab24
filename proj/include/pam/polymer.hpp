#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pam/noise.hpp"
#include "pam/philox.hpp"
#include "pam/solver.hpp"

namespace pam {

/// One end of a polymer: a grid point or a positive measure.
struct Endpoint {
  std::optional<double> point;
  MeasureIC measure;

  [[nodiscard]] static Endpoint at(double x);
  [[nodiscard]] static Endpoint spread(MeasureIC m);
  [[nodiscard]] bool is_point() const noexcept { return point.has_value(); }
  /// Cell masses; a point endpoint is a unit mass at its cell.
  [[nodiscard]] std::vector<double> masses(const Geometry& g) const;
};

struct PolymerSpec {
  double beta = 0.0;
  std::size_t s_index = 0;
  std::size_t t_index = 0;
  Endpoint start;
  Endpoint end;
};

/// Joint law of (X_{t_1}, ..., X_{t_k}) on grid cells, stored row-major with the last time fastest.
struct FddTable {
  std::vector<std::size_t> time_indices;
  std::size_t nx = 0;
  std::vector<double> p;
  double partition = 0.0;  // sum of the unnormalised weights, in cell-mass units

  [[nodiscard]] std::size_t dims() const noexcept { return time_indices.size(); }
  [[nodiscard]] double at(const std::vector<std::size_t>& cells) const;
  /// One-time marginal of coordinate `which`.
  [[nodiscard]] std::vector<double> marginal(std::size_t which) const;
  /// Sum over coordinate `which`, giving a table on the remaining times.
  [[nodiscard]] FddTable sum_out(std::size_t which) const;
};

/// Largest table fdd() will allocate.
inline constexpr std::size_t kMaxFddEntries = std::size_t{1} << 26;

[[nodiscard]] FddTable fdd(const NoiseGrid& grid, const PolymerSpec& spec, const std::vector<std::size_t>& times);
/// Law of X_r alone, without materialising any matrix.
[[nodiscard]] std::vector<double> one_point_law(const NoiseGrid& grid, const PolymerSpec& spec, std::size_t r_index);

struct PolymerPath {
  std::vector<double> times;
  std::vector<std::size_t> cells;
  std::vector<double> positions;
  std::map<double, double> holder_stats;  // eta -> seminorm
};

/// max over sampled pairs of |X_u - X_v| / |u - v|^eta.
[[nodiscard]] double holder_seminorm(const PolymerPath& path, double eta);

/// Sequential sampler: each step draws the next position from the one-window kernel weighted by
/// the backward partition function of the remaining window.
class PolymerSampler {
 public:
  PolymerSampler(const NoiseGrid& grid, PolymerSpec spec, std::size_t stride, std::vector<double> etas = {});

  [[nodiscard]] PolymerPath sample(std::uint64_t seed, std::uint64_t path_index) const;
  [[nodiscard]] const std::vector<std::size_t>& time_indices() const noexcept { return times_; }
  /// Sample only the cell sequence, up to and including time position `last`.
  [[nodiscard]] std::vector<std::size_t> sample_cells(std::uint64_t seed, std::uint64_t path_index,
                                                      std::size_t last) const;
  /// As sample_cells, but with the start cell given instead of drawn.
  [[nodiscard]] std::vector<std::size_t> sample_cells_from(std::size_t start_cell, std::uint64_t seed,
                                                           std::uint64_t path_index, std::size_t last) const;

 private:
  void walk(UniformStream& rng, std::vector<std::size_t>& cells, std::size_t last) const;

  Geometry geometry_;
  PolymerSpec spec_;
  std::vector<std::size_t> times_;
  std::vector<Matrix> windows_;              // P(t_i, t_{i+1})
  std::vector<std::vector<double>> backward_;  // P(t_i, t)^T zeta
  std::vector<double> start_weights_;
  std::vector<double> etas_;
};

[[nodiscard]] PolymerPath sample_path(const NoiseGrid& grid, const PolymerSpec& spec, std::uint64_t seed,
                                      std::size_t stride);

// ---------------------------------------------------------------------------
// Determinants and comparison checks
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxDeterminantSize = 6;

/// det[Z(t, x_j | s, y_i)] for strictly increasing ys and xs (positions on the propagator's grid).
[[nodiscard]] double km_determinant(const Propagator& prop, const std::vector<double>& ys,
                                    const std::vector<double>& xs);
[[nodiscard]] double km_determinant(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                                    const std::vector<double>& ys, const std::vector<double>& xs);

struct NonIntersectionReport {
  double determinant_formula = 0.0;
  double monte_carlo = 0.0;
  double stderr_mc = 0.0;
  std::size_t samples = 0;
  bool expected_mismatch = false;  // starting points given in decreasing order
  bool agree = false;              // |formula - mc| <= 3 stderr + allowance * formula
};

/// Boxes are closed intervals [a, b], coordinate-wise ordered.
[[nodiscard]] NonIntersectionReport non_intersection_check(
    const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t r_index, std::size_t t_index,
    const std::vector<double>& ys, const MeasureIC& zeta, const std::vector<std::pair<double, double>>& boxes,
    std::size_t samples, std::uint64_t seed, double allowance = 0.03);

struct DominanceReport {
  std::vector<double> cdf1;
  std::vector<double> cdf2;
  double max_excess = 0.0;  // max over cells of cdf2 - cdf1
  bool dominated = false;
};

/// Exact CDFs of X_r for polymers from (s, y1) and (s, y2) to (t; zeta).
[[nodiscard]] DominanceReport stochastic_dominance_check(const NoiseGrid& grid, double beta, std::size_t s_index,
                                                         std::size_t t_index, double y1, double y2,
                                                         const MeasureIC& zeta, std::size_t r_index,
                                                         double slack = 1e-12);
/// Same check with one matrix and one backward vector shared across many start pairs.
[[nodiscard]] DominanceReport stochastic_dominance_check(const Propagator& early, const std::vector<double>& backward,
                                                         std::size_t y1_cell, std::size_t y2_cell,
                                                         double slack = 1e-12);

struct TVReport {
  double tv_lhs = 0.0;
  double bound_rhs = 0.0;
  std::vector<double> bound_terms;
  bool satisfied = false;
  [[nodiscard]] double slack() const noexcept { return bound_rhs - tv_lhs; }
};

[[nodiscard]] TVReport tv_bound_check(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                                      const std::pair<MeasureIC, MeasureIC>& pair1,
                                      const std::pair<MeasureIC, MeasureIC>& pair2,
                                      const std::vector<std::size_t>& times);

}  // namespace pam
