#include "pam/noise.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pam/error.hpp"
#include "pam/philox.hpp"

namespace pam {

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

void Geometry::validate() const {
  if (!(dt > 0.0) || !(dx > 0.0) || !std::isfinite(dt) || !std::isfinite(dx)) {
    throw Error(ErrorKind::InvalidGeometry, "mesh widths must be positive and finite");
  }
  if (nt == 0 || nx == 0) {
    throw Error(ErrorKind::InvalidGeometry, "cell counts must be at least 1");
  }
  if (!std::isfinite(t_min) || !std::isfinite(x_min)) {
    throw Error(ErrorKind::InvalidGeometry, "grid origin must be finite");
  }
}

std::size_t Geometry::space_index(double xv) const {
  const double pos = (xv - x_min) / dx - 0.5;
  const double idx = std::round(pos);
  if (!(idx >= 0.0) || idx > static_cast<double>(nx - 1)) {
    std::ostringstream msg;
    msg << "x=" << xv << " outside [" << x(0) << ", " << x(nx - 1) << "]";
    throw Error(ErrorKind::Range, msg.str());
  }
  return static_cast<std::size_t>(idx);
}

std::size_t Geometry::time_index(double tv) const {
  const double idx = std::round((tv - t_min) / dt);
  if (!(idx >= 0.0) || idx > static_cast<double>(nt)) {
    std::ostringstream msg;
    msg << "t=" << tv << " outside [" << t_min << ", " << t_max() << "]";
    throw Error(ErrorKind::Range, msg.str());
  }
  return static_cast<std::size_t>(idx);
}

Geometry Geometry::centered(double half_width, double dx_, double horizon, double dt_,
                            double t_min_) {
  if (!(half_width > 0.0) || !(dx_ > 0.0) || !(horizon > 0.0) || !(dt_ > 0.0)) {
    throw Error(ErrorKind::InvalidGeometry, "centered geometry needs positive sizes");
  }
  Geometry g;
  g.dx = dx_;
  g.dt = dt_;
  g.nx = 2 * static_cast<std::size_t>(std::llround(half_width / dx_)) + 1;
  g.nt = static_cast<std::size_t>(std::llround(horizon / dt_));
  if (g.nt == 0) g.nt = 1;
  g.x_min = -(static_cast<double>(g.nx) * dx_) / 2.0;
  g.t_min = t_min_;
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// NoiseGrid
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kArrayFallbackSalt = 0xA5A5F00DC0FFEE11ull;

double lattice_normal(std::uint64_t key, std::int64_t j, std::int64_t k) {
  const auto pair = normal_pair(key, j, floor_half(k));
  return pair[static_cast<std::size_t>(k - 2 * floor_half(k))];
}

}  // namespace

double NoiseGrid::Source::value(std::int64_t j, std::int64_t k) const {
  if (base && j >= 0 && k >= 0 && static_cast<std::size_t>(j) < base_nt &&
      static_cast<std::size_t>(k) < base_nx) {
    return (*base)[static_cast<std::size_t>(j) * base_nx + static_cast<std::size_t>(k)];
  }
  return lattice_normal(key, j, k);
}

NoiseGrid::NoiseGrid(std::uint64_t seed, Geometry geometry, Source source, LatticeMap map,
                     double sign)
    : seed_(seed), geometry_(geometry), source_(std::move(source)), map_(map), sign_(sign) {
  materialize();
}

void NoiseGrid::materialize() {
  const std::size_t nt = geometry_.nt;
  const std::size_t nx = geometry_.nx;
  xi_.assign(nt * nx, 0.0);
  for (std::size_t j = 0; j < nt; ++j) {
    const auto jj = static_cast<std::int64_t>(j);
    const std::int64_t lat_j = map_.j0 + map_.sj * jj;
    const std::int64_t row_k0 = map_.k0 + map_.shear * jj;
    double* out = xi_.data() + j * nx;
    if (source_.base) {
      for (std::size_t k = 0; k < nx; ++k) {
        out[k] = sign_ * source_.value(lat_j, row_k0 + map_.sk * static_cast<std::int64_t>(k));
      }
      continue;
    }
    std::int64_t cached_pair = 0;
    std::array<double, 2> cached{};
    bool have = false;
    for (std::size_t k = 0; k < nx; ++k) {
      const std::int64_t lat_k = row_k0 + map_.sk * static_cast<std::int64_t>(k);
      const std::int64_t p = floor_half(lat_k);
      if (!have || p != cached_pair) {
        cached = normal_pair(source_.key, lat_j, p);
        cached_pair = p;
        have = true;
      }
      out[k] = sign_ * cached[static_cast<std::size_t>(lat_k - 2 * p)];
    }
  }
}

NoiseGrid NoiseGrid::generate(std::uint64_t seed, const Geometry& geometry) {
  geometry.validate();
  Source src;
  src.key = seed;
  return NoiseGrid(seed, geometry, std::move(src), LatticeMap{}, 1.0);
}

NoiseGrid NoiseGrid::from_values(std::uint64_t seed, const Geometry& geometry,
                                 std::vector<double> xi) {
  geometry.validate();
  if (xi.size() != geometry.nt * geometry.nx) {
    throw Error(ErrorKind::InvalidGeometry, "value array does not match nt*nx");
  }
  Source src;
  src.key = mix64(seed ^ kArrayFallbackSalt);
  src.base_nt = geometry.nt;
  src.base_nx = geometry.nx;
  src.base = std::make_shared<const std::vector<double>>(std::move(xi));
  return NoiseGrid(seed, geometry, std::move(src), LatticeMap{}, 1.0);
}

double NoiseGrid::increment(std::size_t j, std::size_t k) const noexcept {
  return xi(j, k) * std::sqrt(geometry_.dt * geometry_.dx);
}

double NoiseGrid::extended(std::int64_t j, std::int64_t k) const {
  if (j >= 0 && k >= 0 && static_cast<std::size_t>(j) < geometry_.nt &&
      static_cast<std::size_t>(k) < geometry_.nx) {
    return xi(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
  }
  return sign_ * source_.value(map_.j0 + map_.sj * j, map_.k0 + map_.sk * k + map_.shear * j);
}

NoiseGrid NoiseGrid::shift(std::int64_t dj, std::int64_t dk) const {
  LatticeMap m = map_;
  m.j0 += m.sj * dj;
  m.k0 += m.sk * dk + m.shear * dj;
  return NoiseGrid(seed_, geometry_, source_, m, sign_);
}

NoiseGrid NoiseGrid::reflect_time() const {
  const auto last = static_cast<std::int64_t>(geometry_.nt) - 1;
  LatticeMap m = map_;
  m.j0 += m.sj * last;
  m.sj = -m.sj;
  m.k0 += m.shear * last;
  m.shear = -m.shear;
  return NoiseGrid(seed_, geometry_, source_, m, sign_);
}

NoiseGrid NoiseGrid::reflect_space() const {
  const auto last = static_cast<std::int64_t>(geometry_.nx) - 1;
  LatticeMap m = map_;
  m.k0 += m.sk * last;
  m.sk = -m.sk;
  return NoiseGrid(seed_, geometry_, source_, m, sign_);
}

NoiseGrid NoiseGrid::negate() const { return NoiseGrid(seed_, geometry_, source_, map_, -sign_); }

NoiseGrid NoiseGrid::dilate(std::int64_t m) const {
  if (m < 1) throw Error(ErrorKind::UnsupportedTransform, "dilation factor must be a positive integer");
  const double lam = static_cast<double>(m);
  Geometry g = geometry_;
  g.t_min /= lam * lam;
  g.x_min /= lam;
  g.dt /= lam * lam;
  g.dx /= lam;
  return NoiseGrid(seed_, g, source_, map_, sign_);
}

NoiseGrid NoiseGrid::shear(std::int64_t q) const {
  LatticeMap m = map_;
  m.shear += m.sk * q;
  return NoiseGrid(seed_, geometry_, source_, m, sign_);
}

namespace {

std::int64_t require_integer(double v, const char* what) {
  if (!std::isfinite(v) || std::floor(v) != v || std::fabs(v) > 1e15) {
    std::ostringstream msg;
    msg << what << " must be an integer on the grid, got " << v;
    throw Error(ErrorKind::UnsupportedTransform, msg.str());
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

NoiseGrid NoiseGrid::dilate_by(double m) const { return dilate(require_integer(m, "dilation factor")); }
NoiseGrid NoiseGrid::shear_by(double q) const { return shear(require_integer(q, "shear slope (cells per step)")); }

// ---------------------------------------------------------------------------
// Binary dump / load
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic{'P', 'A', 'M', 'N'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "truncated noise file");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

}  // namespace

void NoiseGrid::dump(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, seed_);
  put_le<double>(out, geometry_.t_min);
  put_le<double>(out, geometry_.x_min);
  put_le<double>(out, geometry_.dt);
  put_le<double>(out, geometry_.dx);
  put_le<std::uint64_t>(out, geometry_.nt);
  put_le<std::uint64_t>(out, geometry_.nx);
  for (double v : xi_) put_le<double>(out, v);
  if (!out) throw Error(ErrorKind::Io, "failed writing noise grid");
}

void NoiseGrid::dump(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  dump(out);
}

NoiseGrid NoiseGrid::load(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorKind::Io, "bad magic, not a PAMN noise file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw Error(ErrorKind::Io, "unsupported noise file version");
  const auto seed = get_le<std::uint64_t>(in);
  Geometry g;
  g.t_min = get_le<double>(in);
  g.x_min = get_le<double>(in);
  g.dt = get_le<double>(in);
  g.dx = get_le<double>(in);
  g.nt = get_le<std::uint64_t>(in);
  g.nx = get_le<std::uint64_t>(in);
  g.validate();
  std::vector<double> xi(g.nt * g.nx);
  for (double& v : xi) v = get_le<double>(in);
  return from_values(seed, g, std::move(xi));
}

NoiseGrid NoiseGrid::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return load(in);
}

// ---------------------------------------------------------------------------
// Pairing with test functions
// ---------------------------------------------------------------------------

double integrate(const NoiseGrid& grid, const std::function<double(double, double)>& f) {
  const Geometry& g = grid.geometry();
  const double scale = std::sqrt(g.dt * g.dx);
  double total = 0.0;
  for (std::size_t j = 0; j < g.nt; ++j) {
    const double tc = g.t(j) + 0.5 * g.dt;
    const auto row = grid.row(j);
    for (std::size_t k = 0; k < g.nx; ++k) total += f(tc, g.x(k)) * row[k];
  }
  return total * scale;
}

double integrate(const NoiseGrid& grid, std::span<const double> f_at_centres) {
  const Geometry& g = grid.geometry();
  if (f_at_centres.size() != g.nt * g.nx) {
    throw Error(ErrorKind::InvalidGeometry, "test function array does not match grid size");
  }
  const auto& xi = grid.values();
  double total = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) total += f_at_centres[i] * xi[i];
  return total * std::sqrt(g.dt * g.dx);
}

}  // namespace pam
