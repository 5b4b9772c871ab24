#include "pam/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pam/error.hpp"
#include "pam/kernel.hpp"

namespace pam {

namespace {

struct HeatCoeffs {
  double side;    // dt / (2 dx^2)
  double centre;  // 1 - 2 * side
};

HeatCoeffs heat_coeffs(const Geometry& g) {
  const double side = g.dt / (2.0 * g.dx * g.dx);
  return {side, 1.0 - 2.0 * side};
}

// Neighbour-symmetric form so that mirrored inputs give mirrored outputs bit for bit.
void heat_apply(const double* u, double* out, std::size_t n, HeatCoeffs c) {
  if (n == 1) {
    out[0] = c.centre * u[0];
    return;
  }
  out[0] = c.side * u[1] + c.centre * u[0];
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = c.side * (u[k - 1] + u[k + 1]) + c.centre * u[k];
  out[n - 1] = c.side * u[n - 2] + c.centre * u[n - 1];
}

void check_window(const NoiseGrid& grid, std::size_t s_index, std::size_t t_index) {
  if (s_index > t_index || t_index > grid.nt()) {
    std::ostringstream msg;
    msg << "time window [" << s_index << ", " << t_index << "] outside [0, " << grid.nt() << "]";
    throw Error(ErrorKind::Range, msg.str());
  }
}

void fill_factors(const NoiseGrid& grid, std::size_t j, double beta, std::vector<double>& d) {
  const Geometry& g = grid.geometry();
  const double scale = std::sqrt(g.dt / g.dx);
  const double wick = beta * beta * g.dt / (2.0 * g.dx);
  const auto row = grid.row(j);
  d.resize(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) d[k] = std::exp(beta * (row[k] * scale) - wick);
}

Matrix build_band(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index) {
  const Geometry& g = grid.geometry();
  const std::size_t n = g.nx;
  const HeatCoeffs c = heat_coeffs(g);
  Matrix p = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> prev(n), cur(n), d;
  for (std::size_t j = s_index; j < t_index; ++j) {
    const std::size_t m = j - s_index + 1;  // band half-width after this step
    std::fill(prev.begin(), prev.end(), 0.0);
    std::fill(cur.begin(), cur.end(), 0.0);
    if (beta != 0.0) fill_factors(grid, j, beta, d);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t lo = k >= m ? k - m : 0;
      const std::size_t hi = std::min(n - 1, k + m);
      double* row = p.data() + k * n;
      std::copy(row + lo, row + hi + 1, cur.begin() + static_cast<std::ptrdiff_t>(lo));
      if (k + 1 < n) {
        const double* next = row + n;
        if (k == 0) {
          for (std::size_t l = lo; l <= hi; ++l) row[l] = c.side * next[l] + c.centre * cur[l];
        } else {
          for (std::size_t l = lo; l <= hi; ++l) row[l] = c.side * (prev[l] + next[l]) + c.centre * cur[l];
        }
      } else if (k > 0) {
        for (std::size_t l = lo; l <= hi; ++l) row[l] = c.side * prev[l] + c.centre * cur[l];
      } else {
        for (std::size_t l = lo; l <= hi; ++l) row[l] = c.centre * cur[l];
      }
      if (beta != 0.0) {
        const double dk = d[k];
        for (std::size_t l = lo; l <= hi; ++l) row[l] *= dk;
      }
      std::swap(prev, cur);
    }
  }
  return p;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double separation(std::size_t k, std::size_t l, double dx) {
  return (static_cast<double>(k) - static_cast<double>(l)) * dx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid functions and measures
// ---------------------------------------------------------------------------

GridFunction GridFunction::on(const Geometry& g, std::vector<double> values) {
  if (values.size() != g.nx) throw Error(ErrorKind::Range, "grid function size does not match nx");
  return GridFunction{g.x_min, g.dx, std::move(values)};
}

MeasureIC MeasureIC::delta(double x, double mass) {
  MeasureIC m;
  m.atoms.emplace_back(x, mass);
  return m;
}

MeasureIC MeasureIC::lebesgue(const Geometry& g) {
  MeasureIC m;
  m.density.assign(g.nx, 1.0);
  return m;
}

MeasureIC MeasureIC::from_density(std::vector<double> density) {
  MeasureIC m;
  m.density = std::move(density);
  return m;
}

void MeasureIC::validate(const Geometry& g) const {
  if (!density.empty() && density.size() != g.nx) {
    throw Error(ErrorKind::InvalidMeasure, "density has " + std::to_string(density.size()) +
                                               " values for " + std::to_string(g.nx) + " cells");
  }
  for (const auto& [loc, mass] : atoms) {
    if (!std::isfinite(loc) || !std::isfinite(mass) || mass < 0.0) {
      throw Error(ErrorKind::InvalidMeasure, "atom masses must be finite and nonnegative");
    }
  }
  for (double v : density) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidMeasure, "density must be finite and nonnegative");
  }
  if (!(total_mass(g) > 0.0)) throw Error(ErrorKind::InvalidMeasure, "measure has zero mass on the grid");
}

std::vector<double> MeasureIC::cell_masses(const Geometry& g) const {
  std::vector<double> out(g.nx, 0.0);
  if (!density.empty()) {
    if (density.size() != g.nx) throw Error(ErrorKind::InvalidMeasure, "density size does not match nx");
    for (std::size_t k = 0; k < g.nx; ++k) out[k] = density[k] * g.dx;
  }
  for (const auto& [loc, mass] : atoms) out[g.space_index(loc)] += mass;
  return out;
}

double MeasureIC::total_mass(const Geometry& g) const {
  double total = 0.0;
  for (double v : cell_masses(g)) total += v;
  return total;
}

// ---------------------------------------------------------------------------
// Steps and propagators
// ---------------------------------------------------------------------------

void check_stability(const Geometry& g) {
  g.validate();
  if (g.dt > g.dx * g.dx / 2.0) {
    std::ostringstream msg;
    msg << "explicit heat step unstable: dt=" << g.dt << " > dx^2/2=" << g.dx * g.dx / 2.0;
    throw Error(ErrorKind::Configuration, msg.str());
  }
}

std::vector<double> noise_factors(const NoiseGrid& grid, std::size_t j, double beta) {
  if (j >= grid.nt()) throw Error(ErrorKind::Range, "step index outside the grid");
  std::vector<double> d;
  fill_factors(grid, j, beta, d);
  return d;
}

Matrix step_matrix(const NoiseGrid& grid, std::size_t j, double beta) {
  check_stability(grid.geometry());
  const auto d = noise_factors(grid, j, beta);
  const std::size_t n = grid.nx();
  const HeatCoeffs c = heat_coeffs(grid.geometry());
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    m(i, i) = d[k] * c.centre;
    if (k > 0) m(i, i - 1) = d[k] * c.side;
    if (k + 1 < n) m(i, i + 1) = d[k] * c.side;
  }
  return m;
}

Propagator green_field(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index) {
  check_window(grid, s_index, t_index);
  check_stability(grid.geometry());
  return Propagator(grid.geometry(), beta, s_index, t_index, build_band(grid, beta, s_index, t_index));
}

double chapman_kolmogorov_residual(const NoiseGrid& grid, double beta, std::size_t s_index,
                                   std::size_t r_index, std::size_t t_index) {
  if (r_index < s_index || r_index > t_index) throw Error(ErrorKind::Range, "split point outside [s, t]");
  check_window(grid, s_index, t_index);
  const Propagator full = green_field(grid, beta, s_index, t_index);
  const Propagator late = green_field(grid, beta, r_index, t_index);
  const Propagator early = green_field(grid, beta, s_index, r_index);
  Matrix product;
  product.noalias() = late.matrix() * early.matrix();
  const double norm = max_abs(full.matrix());
  return max_abs(full.matrix() - product) / norm;
}

void propagate(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
               std::vector<double>& u) {
  check_window(grid, s_index, t_index);
  check_stability(grid.geometry());
  const std::size_t n = grid.nx();
  if (u.size() != n) throw Error(ErrorKind::Range, "vector size does not match nx");
  const HeatCoeffs c = heat_coeffs(grid.geometry());
  std::vector<double> tmp(n), d;
  for (std::size_t j = s_index; j < t_index; ++j) {
    heat_apply(u.data(), tmp.data(), n, c);
    if (beta != 0.0) {
      fill_factors(grid, j, beta, d);
      for (std::size_t k = 0; k < n; ++k) tmp[k] *= d[k];
    }
    u.swap(tmp);
  }
}

void propagate_adjoint(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                       std::vector<double>& v) {
  check_window(grid, s_index, t_index);
  check_stability(grid.geometry());
  const std::size_t n = grid.nx();
  if (v.size() != n) throw Error(ErrorKind::Range, "vector size does not match nx");
  const HeatCoeffs c = heat_coeffs(grid.geometry());
  std::vector<double> tmp(n), d;
  for (std::size_t j = t_index; j-- > s_index;) {
    if (beta != 0.0) {
      fill_factors(grid, j, beta, d);
      for (std::size_t k = 0; k < n; ++k) v[k] *= d[k];
    }
    heat_apply(v.data(), tmp.data(), n, c);
    v.swap(tmp);
  }
}

GridFunction solve_from_measure(const Propagator& prop, const MeasureIC& ic, Direction direction) {
  const Geometry& g = prop.geometry();
  ic.validate(g);
  const auto masses = ic.cell_masses(g);
  const Eigen::Map<const Eigen::VectorXd> m(masses.data(), static_cast<Eigen::Index>(masses.size()));
  Eigen::VectorXd out = direction == Direction::Forward ? Eigen::VectorXd(prop.matrix() * m)
                                                        : Eigen::VectorXd(prop.matrix().transpose() * m);
  out /= g.dx;
  return GridFunction::on(g, std::vector<double>(out.data(), out.data() + out.size()));
}

GridFunction solve_from_measure(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                                const MeasureIC& ic, Direction direction) {
  const Geometry& g = grid.geometry();
  ic.validate(g);
  auto u = ic.cell_masses(g);
  if (direction == Direction::Forward) {
    propagate(grid, beta, s_index, t_index, u);
  } else {
    propagate_adjoint(grid, beta, s_index, t_index, u);
  }
  for (double& v : u) v /= g.dx;
  return GridFunction::on(g, std::move(u));
}

double partition_function(const Propagator& prop, const MeasureIC& mu, const MeasureIC& zeta) {
  const Geometry& g = prop.geometry();
  zeta.validate(g);
  const auto forward = solve_from_measure(prop, mu, Direction::Forward);
  const auto z = zeta.cell_masses(g);
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) total += z[k] * forward.values[k];
  return total;
}

Matrix normalized_field(const Propagator& prop) {
  if (prop.steps() == 0) {
    throw Error(ErrorKind::Range, "normalized field undefined at equal times (convention: identically 1)");
  }
  const Geometry& g = prop.geometry();
  const double tau = prop.t() - prop.s();
  const auto n = static_cast<std::size_t>(prop.matrix().rows());
  Matrix out(prop.matrix().rows(), prop.matrix().cols());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double kern = rho(tau, separation(k, l, g.dx)) * g.dx;
      const auto ik = static_cast<Eigen::Index>(k);
      const auto il = static_cast<Eigen::Index>(l);
      out(ik, il) = kern > 0.0 ? prop.matrix()(ik, il) / kern : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

std::vector<double> normalized_column(const NoiseGrid& grid, double beta, std::size_t s_index,
                                      std::size_t t_index, std::size_t l_y) {
  if (t_index == s_index) throw Error(ErrorKind::Range, "normalized field undefined at equal times");
  const Geometry& g = grid.geometry();
  if (l_y >= g.nx) throw Error(ErrorKind::Range, "start cell outside the grid");
  std::vector<double> u(g.nx, 0.0);
  u[l_y] = 1.0;
  propagate(grid, beta, s_index, t_index, u);
  const double tau = g.t(t_index) - g.t(s_index);
  for (std::size_t k = 0; k < g.nx; ++k) {
    const double kern = rho(tau, separation(k, l_y, g.dx)) * g.dx;
    u[k] = kern > 0.0 ? u[k] / kern : std::numeric_limits<double>::quiet_NaN();
  }
  return u;
}

double normalized_value(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                        std::size_t k_x, std::size_t l_y) {
  if (k_x >= grid.nx()) throw Error(ErrorKind::Range, "end cell outside the grid");
  return normalized_column(grid, beta, s_index, t_index, l_y)[k_x];
}

// ---------------------------------------------------------------------------
// KPZ
// ---------------------------------------------------------------------------

KPZField hopf_cole(const GridFunction& field, const std::optional<GridFunction>& at_equal_times) {
  if (at_equal_times) return KPZField{at_equal_times->x_min, at_equal_times->dx, at_equal_times->values, {}};
  KPZField out{field.x_min, field.dx, {}, {}};
  out.h.resize(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double v = field.values[k];
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "field value " << v << " at x=" << field.x(k) << " is not strictly positive";
      throw Error(ErrorKind::PositivityViolation, msg.str());
    }
    out.h[k] = std::log(v);
  }
  return out;
}

GridFunction burgers_derivative(const KPZField& kpz) {
  const std::size_t n = kpz.h.size();
  GridFunction u{kpz.x_min, kpz.dx, std::vector<double>(n, 0.0)};
  if (n < 2) return u;
  const auto& h = kpz.h;
  u.values[0] = (h[1] - h[0]) / kpz.dx;
  u.values[n - 1] = (h[n - 1] - h[n - 2]) / kpz.dx;
  for (std::size_t k = 1; k + 1 < n; ++k) u.values[k] = (h[k + 1] - h[k - 1]) / (2.0 * kpz.dx);
  return u;
}

namespace {

double least_squares_slope(const KPZField& kpz, std::size_t first, std::size_t count) {
  double mx = 0.0, mh = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    mx += kpz.x(first + i);
    mh += kpz.h[first + i];
  }
  mx /= static_cast<double>(count);
  mh /= static_cast<double>(count);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dxv = kpz.x(first + i) - mx;
    sxy += dxv * (kpz.h[first + i] - mh);
    sxx += dxv * dxv;
  }
  return sxy / sxx;
}

}  // namespace

SlopePair slope_limits(const KPZField& kpz, std::size_t margin) {
  const std::size_t n = kpz.h.size();
  if (margin < 1 || 4 * margin >= n) {
    throw Error(ErrorKind::Range, "margin must satisfy 1 <= margin < nx/4");
  }
  if (margin < 2) throw Error(ErrorKind::Range, "slope window has a single cell");
  return {least_squares_slope(kpz, margin, margin), least_squares_slope(kpz, n - 2 * margin, margin)};
}

// ---------------------------------------------------------------------------
// Mild residual
// ---------------------------------------------------------------------------

MildResidual mild_residual(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                           std::size_t l_y, std::optional<std::pair<std::size_t, std::size_t>> window) {
  check_window(grid, s_index, t_index);
  check_stability(grid.geometry());
  if (t_index == s_index) throw Error(ErrorKind::Range, "mild residual needs t_index > s_index");
  const Geometry& g = grid.geometry();
  const std::size_t n = g.nx;
  if (l_y >= n) throw Error(ErrorKind::Range, "start cell outside the grid");
  const auto [w_lo, w_hi] = window.value_or(std::pair<std::size_t, std::size_t>{0, n});
  if (w_lo >= w_hi || w_hi > n) throw Error(ErrorKind::Range, "residual window outside the grid");

  const HeatCoeffs c = heat_coeffs(g);
  const double scale = std::sqrt(g.dt / g.dx);  // dW / dx per unit xi
  const double wick = beta * beta * g.dt / (2.0 * g.dx);

  std::vector<double> u(n, 0.0), heat(n, 0.0), ito(n, 0.0), rest(n, 0.0), hu(n), tmp(n);
  u[l_y] = 1.0 / g.dx;
  heat[l_y] = 1.0 / g.dx;
  for (std::size_t j = s_index; j < t_index; ++j) {
    heat_apply(u.data(), hu.data(), n, c);
    heat_apply(heat.data(), tmp.data(), n, c);
    heat.swap(tmp);
    heat_apply(ito.data(), tmp.data(), n, c);
    ito.swap(tmp);
    heat_apply(rest.data(), tmp.data(), n, c);
    rest.swap(tmp);
    const auto row = grid.row(j);
    for (std::size_t k = 0; k < n; ++k) {
      const double e = beta * (row[k] * scale);
      const double d = std::exp(e - wick);
      ito[k] += e * hu[k];
      rest[k] += (d - 1.0 - e) * hu[k];
      u[k] = d * hu[k];
    }
  }

  const double tau = g.t(t_index) - g.t(s_index);
  MildResidual out;
  for (std::size_t k = w_lo; k < w_hi; ++k) {
    const double kern = rho(tau, separation(k, l_y, g.dx));
    out.heat = std::max(out.heat, std::abs(heat[k] - kern));
    out.noise = std::max(out.noise, std::abs(rest[k]));
    out.total = std::max(out.total, std::abs(u[k] - kern - ito[k]));
  }
  return out;
}

}  // namespace pam
