#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pam/geometry.hpp"

namespace pam {

/// Affine relabelling of grid cells onto the infinite noise lattice:
/// (j, k) -> (j0 + sj*j, k0 + sk*k + shear*j).
struct LatticeMap {
  std::int64_t j0 = 0;
  std::int64_t k0 = 0;
  int sj = 1;
  int sk = 1;
  std::int64_t shear = 0;
};

/// One realization of discrete space-time white noise. Immutable after construction.
class NoiseGrid {
 public:
  [[nodiscard]] static NoiseGrid generate(std::uint64_t seed, const Geometry& geometry);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const Geometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] std::size_t nt() const noexcept { return geometry_.nt; }
  [[nodiscard]] std::size_t nx() const noexcept { return geometry_.nx; }

  [[nodiscard]] double xi(std::size_t j, std::size_t k) const noexcept { return xi_[j * geometry_.nx + k]; }
  [[nodiscard]] double increment(std::size_t j, std::size_t k) const noexcept;
  [[nodiscard]] std::span<const double> row(std::size_t j) const noexcept {
    return {xi_.data() + j * geometry_.nx, geometry_.nx};
  }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return xi_; }

  /// Value at an arbitrary (possibly off-grid) cell; in-range cells agree with xi().
  [[nodiscard]] double extended(std::int64_t j, std::int64_t k) const;

  // Transforms. Each returns a new grid; the receiver is untouched.
  [[nodiscard]] NoiseGrid shift(std::int64_t dj, std::int64_t dk) const;
  [[nodiscard]] NoiseGrid reflect_time() const;
  [[nodiscard]] NoiseGrid reflect_space() const;
  [[nodiscard]] NoiseGrid negate() const;
  /// Parabolic relabelling: same draws on a mesh m^2 finer in time and m finer in space.
  [[nodiscard]] NoiseGrid dilate(std::int64_t m) const;
  /// Cell (j, k) reads the source cell (j, k + q*j); the velocity is q*dx/dt.
  [[nodiscard]] NoiseGrid shear(std::int64_t q) const;

  /// Real-parameter entry points; non-integers raise Error(UnsupportedTransform).
  [[nodiscard]] NoiseGrid dilate_by(double m) const;
  [[nodiscard]] NoiseGrid shear_by(double q) const;

  void dump(std::ostream& out) const;
  void dump(const std::string& path) const;
  [[nodiscard]] static NoiseGrid load(std::istream& in);
  [[nodiscard]] static NoiseGrid load(const std::string& path);

  /// Wraps an explicit array; cells outside it come from a stream derived from `seed`.
  [[nodiscard]] static NoiseGrid from_values(std::uint64_t seed, const Geometry& geometry,
                                             std::vector<double> xi);

 private:
  struct Source {
    std::uint64_t key = 0;
    std::shared_ptr<const std::vector<double>> base;  // null: pure lattice
    std::size_t base_nt = 0;
    std::size_t base_nx = 0;
    [[nodiscard]] double value(std::int64_t j, std::int64_t k) const;
  };

  NoiseGrid(std::uint64_t seed, Geometry geometry, Source source, LatticeMap map, double sign);
  void materialize();

  std::uint64_t seed_ = 0;
  Geometry geometry_{};
  Source source_{};
  LatticeMap map_{};
  double sign_ = 1.0;
  std::vector<double> xi_;
};

/// Σ f(t_j + dt/2, x_k) ΔW_{j,k} over all cells.
[[nodiscard]] double integrate(const NoiseGrid& grid, const std::function<double(double, double)>& f);
/// Same pairing with f given row-major at cell centres.
[[nodiscard]] double integrate(const NoiseGrid& grid, std::span<const double> f_at_centres);

}  // namespace pam
