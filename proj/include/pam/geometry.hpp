#pragma once

#include <cstddef>

namespace pam {

/// Rectangular space-time mesh. Time levels sit at t_min + j*dt (j = 0..nt); space cells
/// are centred at x_min + (k + 1/2)*dx (k = 0..nx-1). Noise cell (j, k) drives the step
/// from level j to level j + 1 at space cell k.
struct Geometry {
  double t_min = 0.0;
  double x_min = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  std::size_t nt = 0;
  std::size_t nx = 0;

  [[nodiscard]] double t(std::size_t j) const noexcept { return t_min + static_cast<double>(j) * dt; }
  [[nodiscard]] double x(std::size_t k) const noexcept {
    return x_min + (static_cast<double>(k) + 0.5) * dx;
  }
  [[nodiscard]] double t_max() const noexcept { return t(nt); }
  [[nodiscard]] double x_lo() const noexcept { return x_min; }
  [[nodiscard]] double x_hi() const noexcept { return x_min + static_cast<double>(nx) * dx; }

  /// Throws Error(InvalidGeometry) unless both mesh widths are positive and both counts nonzero.
  void validate() const;

  /// Index of the cell whose centre is nearest to x; Error(Range) outside the domain.
  [[nodiscard]] std::size_t space_index(double x) const;
  /// Index of the time level nearest to t; Error(Range) outside [t_min, t_max].
  [[nodiscard]] std::size_t time_index(double t) const;

  /// Symmetric domain with a cell centred on x = 0 and roughly [-half_width, half_width] covered.
  [[nodiscard]] static Geometry centered(double half_width, double dx, double horizon, double dt,
                                         double t_min = 0.0);

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

}  // namespace pam
