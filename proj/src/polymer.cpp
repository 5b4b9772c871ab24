#include "pam/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pam/error.hpp"
#include "pam/philox.hpp"

namespace pam {

namespace {

void check_spec(const NoiseGrid& grid, const PolymerSpec& spec) {
  if (spec.s_index >= spec.t_index || spec.t_index > grid.nt()) {
    throw Error(ErrorKind::Range, "polymer needs s_index < t_index <= nt");
  }
}

void check_interior_times(const PolymerSpec& spec, const std::vector<std::size_t>& times) {
  if (times.empty()) throw Error(ErrorKind::Range, "at least one intermediate time is required");
  std::size_t prev = spec.s_index;
  for (std::size_t t : times) {
    if (t <= prev) throw Error(ErrorKind::Range, "times must satisfy s < t_1 < ... < t_k < t");
    prev = t;
  }
  if (prev >= spec.t_index) throw Error(ErrorKind::Range, "times must satisfy s < t_1 < ... < t_k < t");
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::size_t draw(UniformStream& rng, const double* weights, std::size_t lo, std::size_t hi, std::size_t step) {
  double total = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) total += weights[k * step];
  if (!(total > 0.0)) throw Error(ErrorKind::PositivityViolation, "transition weights vanish");
  double target = rng.next() * total;
  for (std::size_t k = lo; k <= hi; ++k) {
    target -= weights[k * step];
    if (target < 0.0) return k;
  }
  for (std::size_t k = hi + 1; k-- > lo;) {
    if (weights[k * step] > 0.0) return k;
  }
  return hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Endpoints and finite-dimensional laws
// ---------------------------------------------------------------------------

Endpoint Endpoint::at(double x) {
  Endpoint e;
  e.point = x;
  return e;
}

Endpoint Endpoint::spread(MeasureIC m) {
  Endpoint e;
  e.measure = std::move(m);
  return e;
}

std::vector<double> Endpoint::masses(const Geometry& g) const {
  if (point) {
    std::vector<double> out(g.nx, 0.0);
    out[g.space_index(*point)] = 1.0;
    return out;
  }
  measure.validate(g);
  return measure.cell_masses(g);
}

double FddTable::at(const std::vector<std::size_t>& cells) const {
  if (cells.size() != dims()) throw Error(ErrorKind::Range, "wrong number of cells for this table");
  std::size_t idx = 0;
  for (std::size_t c : cells) {
    if (c >= nx) throw Error(ErrorKind::Range, "cell outside the grid");
    idx = idx * nx + c;
  }
  return p[idx];
}

std::vector<double> FddTable::marginal(std::size_t which) const {
  if (which >= dims()) throw Error(ErrorKind::Range, "marginal index out of range");
  std::vector<double> out(nx, 0.0);
  std::size_t inner = 1;
  for (std::size_t d = which + 1; d < dims(); ++d) inner *= nx;
  for (std::size_t idx = 0; idx < p.size(); ++idx) out[(idx / inner) % nx] += p[idx];
  return out;
}

FddTable FddTable::sum_out(std::size_t which) const {
  if (which >= dims() || dims() < 2) throw Error(ErrorKind::Range, "cannot sum out this coordinate");
  FddTable out;
  out.nx = nx;
  out.partition = partition;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (d != which) out.time_indices.push_back(time_indices[d]);
  }
  std::size_t inner = 1;
  for (std::size_t d = which + 1; d < dims(); ++d) inner *= nx;
  out.p.assign(p.size() / nx, 0.0);
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    const std::size_t hi = idx / (inner * nx);
    const std::size_t lo = idx % inner;
    out.p[hi * inner + lo] += p[idx];
  }
  return out;
}

FddTable fdd(const NoiseGrid& grid, const PolymerSpec& spec, const std::vector<std::size_t>& times) {
  check_spec(grid, spec);
  check_interior_times(spec, times);
  const Geometry& g = grid.geometry();
  const std::size_t n = g.nx;
  std::size_t entries = 1;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (entries > kMaxFddEntries / n) throw Error(ErrorKind::Budget, "fdd table too large");
    entries *= n;
  }

  auto table = spec.start.masses(g);
  propagate(grid, spec.beta, spec.s_index, times.front(), table);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const Propagator window = green_field(grid, spec.beta, times[i - 1], times[i]);
    const Matrix& w = window.matrix();
    const std::size_t band = times[i] - times[i - 1];
    std::vector<double> next(table.size() * n, 0.0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
      const double v = table[idx];
      if (v == 0.0) continue;
      const std::size_t z = idx % n;
      const std::size_t lo = z >= band ? z - band : 0;
      const std::size_t hi = std::min(n - 1, z + band);
      for (std::size_t zn = lo; zn <= hi; ++zn) {
        next[idx * n + zn] = v * w(static_cast<Eigen::Index>(zn), static_cast<Eigen::Index>(z));
      }
    }
    table.swap(next);
  }
  auto back = spec.end.masses(g);
  propagate_adjoint(grid, spec.beta, times.back(), spec.t_index, back);
  for (std::size_t idx = 0; idx < table.size(); ++idx) table[idx] *= back[idx % n];

  const double total = sum_of(table);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::PositivityViolation, "polymer partition function is not positive");
  }
  for (double& v : table) v /= total;
  return FddTable{times, n, std::move(table), total};
}

std::vector<double> one_point_law(const NoiseGrid& grid, const PolymerSpec& spec, std::size_t r_index) {
  check_spec(grid, spec);
  check_interior_times(spec, {r_index});
  const Geometry& g = grid.geometry();
  auto f = spec.start.masses(g);
  propagate(grid, spec.beta, spec.s_index, r_index, f);
  auto b = spec.end.masses(g);
  propagate_adjoint(grid, spec.beta, r_index, spec.t_index, b);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] *= b[k];
  const double total = sum_of(f);
  if (!(total > 0.0)) throw Error(ErrorKind::PositivityViolation, "polymer partition function is not positive");
  for (double& v : f) v /= total;
  return f;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

double holder_seminorm(const PolymerPath& path, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorKind::Domain, "Hoelder exponent must lie in (0, 1)");
  double best = 0.0;
  const std::size_t n = path.times.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::abs(path.times[j] - path.times[i]);
      if (gap <= 0.0) continue;
      best = std::max(best, std::abs(path.positions[j] - path.positions[i]) / std::pow(gap, eta));
    }
  }
  return best;
}

PolymerSampler::PolymerSampler(const NoiseGrid& grid, PolymerSpec spec, std::size_t stride, std::vector<double> etas)
    : geometry_(grid.geometry()), spec_(std::move(spec)), etas_(std::move(etas)) {
  check_spec(grid, spec_);
  if (stride == 0) throw Error(ErrorKind::Configuration, "stride must be at least 1");
  for (std::size_t t = spec_.s_index; t < spec_.t_index; t += stride) times_.push_back(t);
  times_.push_back(spec_.t_index);

  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    windows_.push_back(green_field(grid, spec_.beta, times_[i], times_[i + 1]).matrix());
  }
  backward_.resize(times_.size());
  backward_.back() = spec_.end.masses(geometry_);
  for (std::size_t i = windows_.size(); i-- > 0;) {
    const Eigen::Map<const Eigen::VectorXd> b(backward_[i + 1].data(), static_cast<Eigen::Index>(geometry_.nx));
    const Eigen::VectorXd prev = windows_[i].transpose() * b;
    backward_[i].assign(prev.data(), prev.data() + prev.size());
  }
  start_weights_ = spec_.start.masses(geometry_);
  for (std::size_t k = 0; k < geometry_.nx; ++k) start_weights_[k] *= backward_[0][k];
  if (!(sum_of(start_weights_) > 0.0)) {
    throw Error(ErrorKind::PositivityViolation, "polymer partition function is not positive");
  }
}

void PolymerSampler::walk(UniformStream& rng, std::vector<std::size_t>& cells, std::size_t last) const {
  const std::size_t n = geometry_.nx;
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < last; ++i) {
    const std::size_t z = cells.back();
    const std::size_t band = times_[i + 1] - times_[i];
    const std::size_t lo = z >= band ? z - band : 0;
    const std::size_t hi = std::min(n - 1, z + band);
    const Matrix& w = windows_[i];
    for (std::size_t zn = lo; zn <= hi; ++zn) {
      weights[zn] = w(static_cast<Eigen::Index>(zn), static_cast<Eigen::Index>(z)) * backward_[i + 1][zn];
    }
    cells.push_back(draw(rng, weights.data(), lo, hi, 1));
  }
}

std::vector<std::size_t> PolymerSampler::sample_cells(std::uint64_t seed, std::uint64_t path_index,
                                                      std::size_t last) const {
  if (last >= times_.size()) throw Error(ErrorKind::Range, "time position beyond the path");
  UniformStream rng(seed, path_index);
  std::vector<std::size_t> cells;
  cells.reserve(last + 1);
  cells.push_back(draw(rng, start_weights_.data(), 0, geometry_.nx - 1, 1));
  walk(rng, cells, last);
  return cells;
}

std::vector<std::size_t> PolymerSampler::sample_cells_from(std::size_t start_cell, std::uint64_t seed,
                                                           std::uint64_t path_index, std::size_t last) const {
  if (last >= times_.size()) throw Error(ErrorKind::Range, "time position beyond the path");
  if (start_cell >= geometry_.nx || !(backward_[0][start_cell] > 0.0)) {
    throw Error(ErrorKind::PositivityViolation, "start cell carries no weight");
  }
  UniformStream rng(seed, path_index);
  std::vector<std::size_t> cells;
  cells.reserve(last + 1);
  cells.push_back(start_cell);
  walk(rng, cells, last);
  return cells;
}

PolymerPath PolymerSampler::sample(std::uint64_t seed, std::uint64_t path_index) const {
  PolymerPath path;
  path.cells = sample_cells(seed, path_index, times_.size() - 1);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    path.times.push_back(geometry_.t(times_[i]));
    path.positions.push_back(geometry_.x(path.cells[i]));
  }
  for (double eta : etas_) path.holder_stats[eta] = holder_seminorm(path, eta);
  return path;
}

PolymerPath sample_path(const NoiseGrid& grid, const PolymerSpec& spec, std::uint64_t seed, std::size_t stride) {
  return PolymerSampler(grid, spec, stride, {0.25, 0.4, 0.5}).sample(seed, 0);
}

// ---------------------------------------------------------------------------
// Determinants
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> ordered_cells(const Geometry& g, const std::vector<double>& pts, const char* what) {
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0 && !(pts[i] > pts[i - 1])) {
      throw Error(ErrorKind::Domain, std::string(what) + " must be strictly increasing");
    }
    cells.push_back(g.space_index(pts[i]));
    if (i > 0 && cells[i] == cells[i - 1]) {
      throw Error(ErrorKind::Domain, std::string(what) + " share a grid cell");
    }
  }
  return cells;
}

}  // namespace

double km_determinant(const Propagator& prop, const std::vector<double>& ys, const std::vector<double>& xs) {
  const std::size_t n = ys.size();
  if (n == 0 || n != xs.size()) throw Error(ErrorKind::Domain, "need equally many start and end points");
  if (n > kMaxDeterminantSize) throw Error(ErrorKind::Budget, "determinant size capped at 6");
  const Geometry& g = prop.geometry();
  const auto ly = ordered_cells(g, ys, "start points");
  const auto kx = ordered_cells(g, xs, "end points");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t gap = ly[i] > kx[j] ? ly[i] - kx[j] : kx[j] - ly[i];
      if (gap > prop.steps()) {
        std::ostringstream msg;
        msg << "cells " << ly[i] << " and " << kx[j] << " are " << gap << " apart after " << prop.steps()
            << " steps";
        throw Error(ErrorKind::BandConnectivity, msg.str());
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = prop.density(kx[j], ly[i]);
    }
  }
  return m.fullPivLu().determinant();
}

double km_determinant(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                      const std::vector<double>& ys, const std::vector<double>& xs) {
  return km_determinant(green_field(grid, beta, s_index, t_index), ys, xs);
}

// ---------------------------------------------------------------------------
// Non-intersection
// ---------------------------------------------------------------------------

NonIntersectionReport non_intersection_check(const NoiseGrid& grid, double beta, std::size_t s_index,
                                             std::size_t r_index, std::size_t t_index,
                                             const std::vector<double>& ys, const MeasureIC& zeta,
                                             const std::vector<std::pair<double, double>>& boxes,
                                             std::size_t samples, std::uint64_t seed, double allowance) {
  const std::size_t n = ys.size();
  if (n == 0 || n > 3 || boxes.size() != n) throw Error(ErrorKind::Domain, "need 1 to 3 start points, one box each");
  if (!(s_index < r_index && r_index < t_index)) throw Error(ErrorKind::Range, "need s < r < t");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(boxes[i].first <= boxes[i].second)) throw Error(ErrorKind::Domain, "box with a > b");
    if (i > 0 && !(boxes[i - 1].second < boxes[i].first)) throw Error(ErrorKind::Domain, "boxes overlap or are unordered");
  }
  bool increasing = true, decreasing = true;
  for (std::size_t i = 1; i < n; ++i) {
    increasing = increasing && ys[i] > ys[i - 1];
    decreasing = decreasing && ys[i] < ys[i - 1];
  }
  if (n > 1 && !increasing && !decreasing) throw Error(ErrorKind::Domain, "start points must be strictly ordered");

  const Geometry& g = grid.geometry();
  std::vector<std::size_t> starts;
  for (double y : ys) starts.push_back(g.space_index(y));
  std::vector<std::vector<std::size_t>> box_cells(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < g.nx; ++k) {
      if (g.x(k) >= boxes[j].first && g.x(k) <= boxes[j].second) box_cells[j].push_back(k);
    }
  }

  NonIntersectionReport report;
  report.expected_mismatch = n > 1 && decreasing;
  report.samples = samples;

  // Determinant of one-point box probabilities: the integral of the determinant over the boxes.
  zeta.validate(g);
  auto back = zeta.cell_masses(g);
  propagate_adjoint(grid, beta, r_index, t_index, back);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f(g.nx, 0.0);
    f[starts[i]] = 1.0;
    propagate(grid, beta, s_index, r_index, f);
    double total = 0.0;
    for (std::size_t k = 0; k < g.nx; ++k) total += f[k] * back[k];
    for (std::size_t j = 0; j < n; ++j) {
      double mass = 0.0;
      for (std::size_t k : box_cells[j]) mass += f[k] * back[k];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mass / total;
    }
  }
  report.determinant_formula = n == 1 ? m(0, 0) : m.fullPivLu().determinant();

  // Independent point-to-measure polymers, one time step at a time up to r. On [s, r] the law
  // is that of a polymer ending at the measure back(z) dz, so one sampler serves every start.
  std::vector<double> end_density(back);
  for (double& v : end_density) v /= g.dx;
  const PolymerSpec spec{beta, s_index, r_index, Endpoint::at(ys.front()),
                         Endpoint::spread(MeasureIC::from_density(std::move(end_density)))};
  const PolymerSampler sampler(grid, spec, 1);
  const std::size_t last = r_index - s_index;
  std::size_t hits = 0;
  std::vector<std::vector<std::size_t>> paths(n);
  for (std::size_t trial = 0; trial < samples; ++trial) {
    for (std::size_t i = 0; i < n; ++i) paths[i] = sampler.sample_cells_from(starts[i], seed, trial * n + i, last);
    bool ok = true;
    for (std::size_t i = 0; ok && i < n; ++i) {
      const std::size_t end_cell = paths[i][last];
      ok = std::binary_search(box_cells[i].begin(), box_cells[i].end(), end_cell);
    }
    // Linear interpolation between step times: consecutive paths meet iff their gap reaches 0.
    for (std::size_t i = 0; ok && i + 1 < n; ++i) {
      const double sign = paths[i + 1][0] > paths[i][0] ? 1.0 : -1.0;
      for (std::size_t step = 1; ok && step <= last; ++step) {
        const double gap = static_cast<double>(paths[i + 1][step]) - static_cast<double>(paths[i][step]);
        ok = gap * sign > 0.0;
      }
    }
    if (ok) ++hits;
  }
  const double p = samples > 0 ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
  report.monte_carlo = p;
  report.stderr_mc = samples > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(samples)) : 0.0;
  report.agree = std::abs(report.determinant_formula - p) <=
                 3.0 * report.stderr_mc + allowance * std::abs(report.determinant_formula);
  return report;
}

// ---------------------------------------------------------------------------
// Stochastic monotonicity
// ---------------------------------------------------------------------------

DominanceReport stochastic_dominance_check(const Propagator& early, const std::vector<double>& backward,
                                           std::size_t y1_cell, std::size_t y2_cell, double slack) {
  const std::size_t n = backward.size();
  if (y1_cell >= n || y2_cell >= n) throw Error(ErrorKind::Range, "start cell outside the grid");
  const auto cdf = [&](std::size_t y) {
    std::vector<double> c(n);
    double run = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      run += early(k, y) * backward[k];
      c[k] = run;
    }
    if (!(run > 0.0)) throw Error(ErrorKind::PositivityViolation, "polymer partition function is not positive");
    for (double& v : c) v /= run;
    return c;
  };
  DominanceReport report{cdf(y1_cell), cdf(y2_cell), -1.0, true};
  for (std::size_t k = 0; k < n; ++k) report.max_excess = std::max(report.max_excess, report.cdf2[k] - report.cdf1[k]);
  report.dominated = report.max_excess <= slack;
  return report;
}

DominanceReport stochastic_dominance_check(const NoiseGrid& grid, double beta, std::size_t s_index,
                                           std::size_t t_index, double y1, double y2, const MeasureIC& zeta,
                                           std::size_t r_index, double slack) {
  if (!(s_index < r_index && r_index < t_index)) throw Error(ErrorKind::Range, "need s < r < t");
  const Geometry& g = grid.geometry();
  zeta.validate(g);
  auto back = zeta.cell_masses(g);
  propagate_adjoint(grid, beta, r_index, t_index, back);
  return stochastic_dominance_check(green_field(grid, beta, s_index, r_index), back, g.space_index(y1),
                                    g.space_index(y2), slack);
}

// ---------------------------------------------------------------------------
// Total variation
// ---------------------------------------------------------------------------

TVReport tv_bound_check(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                        const std::pair<MeasureIC, MeasureIC>& pair1, const std::pair<MeasureIC, MeasureIC>& pair2,
                        const std::vector<std::size_t>& times) {
  if (times.size() > 4) throw Error(ErrorKind::Budget, "total variation uses at most 4 times");
  const Geometry& g = grid.geometry();
  const PolymerSpec spec1{beta, s_index, t_index, Endpoint::spread(pair1.first), Endpoint::spread(pair1.second)};
  const PolymerSpec spec2{beta, s_index, t_index, Endpoint::spread(pair2.first), Endpoint::spread(pair2.second)};
  const FddTable p1 = fdd(grid, spec1, times);
  const FddTable p2 = fdd(grid, spec2, times);

  TVReport report;
  for (std::size_t i = 0; i < p1.p.size(); ++i) report.tv_lhs += std::abs(p1.p[i] - p2.p[i]);
  report.tv_lhs *= 0.5;

  const auto mu1 = pair1.first.cell_masses(g);
  const auto zeta1 = pair1.second.cell_masses(g);
  const auto mu2 = pair2.first.cell_masses(g);
  const auto zeta2 = pair2.second.cell_masses(g);
  std::vector<double> dzeta(g.nx), dmu(g.nx);
  for (std::size_t k = 0; k < g.nx; ++k) {
    dzeta[k] = std::abs(zeta2[k] - zeta1[k]);
    dmu[k] = std::abs(mu2[k] - mu1[k]);
  }
  const auto pairing = [&](const std::vector<double>& z, std::vector<double> m) {
    propagate(grid, beta, s_index, t_index, m);
    double total = 0.0;
    for (std::size_t k = 0; k < g.nx; ++k) total += z[k] * m[k];
    return total / g.dx;
  };
  const double z11 = pairing(zeta1, mu1);
  const double z21 = pairing(zeta2, mu1);
  const double z22 = pairing(zeta2, mu2);
  report.bound_terms = {pairing(dzeta, mu1) / z11, z21 * std::abs(1.0 / z11 - 1.0 / z21),
                        pairing(zeta2, dmu) / z21, z22 * std::abs(1.0 / z21 - 1.0 / z22)};
  report.bound_rhs = std::accumulate(report.bound_terms.begin(), report.bound_terms.end(), 0.0);
  report.satisfied = report.tv_lhs <= report.bound_rhs * (1.0 + 1e-12) + 1e-15;
  return report;
}

}  // namespace pam
