#include "pam/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pam/error.hpp"
#include "pam/parallel.hpp"
#include "pam/philox.hpp"
#include "pam/stats.hpp"

namespace pam::verify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double uniform(UniformStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.next(); }

Geometry reference(double half_width, double dx, double horizon) {
  return Geometry::centered(half_width, dx, horizon, dx * dx / 2.0);
}

double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = b.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

// Max relative difference over finite entries of two normalized fields restricted to a block.
double block_diff(const Matrix& a, const Matrix& b, std::size_t rows, std::size_t col0, std::size_t cols) {
  double worst = 0.0;
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t l = col0; l < col0 + cols; ++l) {
      const double x = a(k, l);
      const double y = b(k, l);
      if (!std::isfinite(x) && !std::isfinite(y)) continue;
      worst = std::max(worst, std::fabs(x - y) / std::max(1.0, std::fabs(y)));
    }
  }
  return worst;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

json Report::to_json() const {
  json out;
  out["test_name"] = test_name;
  out["config"] = config;
  out["statistics"] = statistics;
  out["pass"] = pass;
  out["seeds"] = {{"base", seed_base}, {"count", n_seeds}};
  return out;
}

// ---------------------------------------------------------------------------
// Appendix C
// ---------------------------------------------------------------------------

namespace {

LemmaParams draw_params(LemmaId id, UniformStream& rng) {
  LemmaParams p;
  p.t = uniform(rng, 0.1, 5.0);
  p.r = p.t * uniform(rng, 0.05, 0.95);
  p.h = uniform(rng, 0.01, 3.0);
  p.x = uniform(rng, -3.0, 3.0);
  p.y = uniform(rng, -3.0, 3.0);
  switch (id) {
    case LemmaId::Withgap: {
      p.delta = uniform(rng, 0.05, 0.95);
      p.T = uniform(rng, 1.1, 4.0);
      p.t = uniform(rng, p.delta, p.T - 0.01);
      p.h = uniform(rng, 0.0, std::min(1.0, p.T - p.t));
      break;
    }
    case LemmaId::Near0: {
      p.h = uniform(rng, 0.001, 1.0);
      p.alpha = uniform(rng, 0.1, 1.0);
      const double cap = std::pow(p.h, p.alpha);
      p.t = uniform(rng, 0.01 * cap, cap);
      break;
    }
    case LemmaId::Nogap: {
      p.T = uniform(rng, 1.1, 4.0);
      p.K = uniform(rng, 1.1, 4.0);
      p.x = uniform(rng, -p.K, p.K);
      p.h = uniform(rng, 0.001, 1.0);
      if (rng.next() < 0.5) {
        p.delta = 0.0;
        p.t = uniform(rng, 0.0, p.T);
      } else {
        p.delta = uniform(rng, 0.05, 0.5);
        p.t = uniform(rng, p.delta, std::max(p.delta, p.T - p.h));
        if (p.t + p.h > p.T) p.h = p.T - p.t;
      }
      break;
    }
    default:
      break;
  }
  return p;
}

}  // namespace

std::vector<AppendixRow> appendix_c_rows(std::size_t points_per_lemma, std::uint64_t seed, double identity_tol) {
  const auto& lemmas = all_lemmas();
  std::vector<std::vector<AppendixRow>> per_lemma(lemmas.size());
  parallel_for(lemmas.size(), [&](std::size_t li) {
    const LemmaId id = lemmas[li];
    UniformStream rng(seed, li);
    for (std::size_t i = 0; i < points_per_lemma; ++i) {
      const LemmaParams p = draw_params(id, rng);
      check_lemma_domain(id, p);
      AppendixRow row;
      row.lemma = std::string(to_string(id));
      row.params = p.describe(id);
      if (is_identity(id)) {
        row.closed_form = appendix_c_closed_form(id, p);
        row.quadrature = appendix_c_quadrature(id, p);
        row.abs_err = std::fabs(row.closed_form - row.quadrature);
        row.ok = row.abs_err <= identity_tol;
        row.bound_slack = kNaN;
        if (id == LemmaId::Int4bd) {
          row.bound_slack = 4.0 * std::sqrt(p.h) - row.quadrature;
          row.ok = row.ok && row.bound_slack >= 0.0;
        }
      } else {
        const InequalityReport rep = check_inequality_bounds(id, p);
        row.closed_form = kNaN;
        row.quadrature = rep.lhs;
        row.abs_err = kNaN;
        row.bound_slack = rep.slack();
        row.ok = rep.satisfied;
      }
      per_lemma[li].push_back(std::move(row));
    }
  });
  std::vector<AppendixRow> rows;
  for (auto& block : per_lemma) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

Report appendix_c_suite(std::size_t points_per_lemma, std::uint64_t seed) {
  Report rep;
  rep.test_name = "appendix_c";
  rep.seed_base = seed;
  rep.n_seeds = 1;
  rep.config = {{"points_per_lemma", points_per_lemma}, {"identity_tol", 1e-7}};
  const auto rows = appendix_c_rows(points_per_lemma, seed);
  json per = json::object();
  bool all_ok = true;
  for (const auto& row : rows) {
    json& entry = per[row.lemma];
    if (entry.is_null()) entry = {{"points", 0}, {"failures", 0}, {"max_abs_err", 0.0}, {"min_slack", nullptr}};
    entry["points"] = entry["points"].get<int>() + 1;
    if (!row.ok) entry["failures"] = entry["failures"].get<int>() + 1;
    if (std::isfinite(row.abs_err)) {
      entry["max_abs_err"] = std::max(entry["max_abs_err"].get<double>(), row.abs_err);
    }
    if (std::isfinite(row.bound_slack)) {
      const double prev = entry["min_slack"].is_null() ? row.bound_slack : entry["min_slack"].get<double>();
      entry["min_slack"] = std::min(prev, row.bound_slack);
    }
    all_ok = all_ok && row.ok;
  }
  rep.statistics = {{"lemmas", per}, {"rows", rows.size()}};
  rep.pass = all_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Symmetries
// ---------------------------------------------------------------------------

std::string to_string(SymmetryKind kind) {
  switch (kind) {
    case SymmetryKind::Shift: return "shift";
    case SymmetryKind::ReflectTime: return "reflect_time";
    case SymmetryKind::ReflectSpace: return "reflect_space";
    case SymmetryKind::Negate: return "negate";
  }
  return "unknown";
}

SymmetryKind parse_symmetry(const std::string& name) {
  for (auto k : {SymmetryKind::Shift, SymmetryKind::ReflectTime, SymmetryKind::ReflectSpace, SymmetryKind::Negate}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::UnsupportedTransform, "unknown symmetry '" + name + "'");
}

Report symmetry_test(SymmetryKind kind, const SymmetryConfig& cfg) {
  Report rep;
  rep.test_name = "symmetry_" + to_string(kind);
  rep.seed_base = cfg.seed;
  rep.n_seeds = 1;
  rep.config = {{"beta", cfg.beta}, {"dx", cfg.dx},         {"half_width", cfg.half_width},
                {"nt", cfg.nt},     {"s_index", cfg.s_index}, {"t_index", cfg.t_index},
                {"tol", cfg.tol}};
  const Geometry g = reference(cfg.half_width, cfg.dx, static_cast<double>(cfg.nt) * cfg.dx * cfg.dx / 2.0);
  if (cfg.s_index >= cfg.t_index || cfg.t_index > g.nt) throw Error(ErrorKind::Range, "window outside the grid");
  const NoiseGrid grid = NoiseGrid::generate(cfg.seed, g);
  const std::size_t n = g.nx;
  const std::size_t s = cfg.s_index;
  const std::size_t t = cfg.t_index;
  double diff = 0.0;

  switch (kind) {
    case SymmetryKind::Negate: {
      const Matrix a = normalized_field(green_field(grid.negate(), cfg.beta, s, t));
      const Matrix b = normalized_field(green_field(grid, -cfg.beta, s, t));
      diff = block_diff(a, b, n, 0, n);
      break;
    }
    case SymmetryKind::ReflectSpace: {
      const Matrix a = normalized_field(green_field(grid.reflect_space(), cfg.beta, s, t));
      const Matrix b = normalized_field(green_field(grid, cfg.beta, s, t));
      const Matrix flipped = b.colwise().reverse().rowwise().reverse();
      diff = block_diff(a, flipped, n, 0, n);
      break;
    }
    case SymmetryKind::Shift: {
      rep.config["shift_j"] = cfg.shift_j;
      rep.config["shift_k"] = cfg.shift_k;
      const auto sj = static_cast<std::int64_t>(s) + cfg.shift_j;
      const auto tj = static_cast<std::int64_t>(t) + cfg.shift_j;
      if (sj < 0 || tj > static_cast<std::int64_t>(g.nt)) {
        throw Error(ErrorKind::UnsupportedTransform, "time shift leaves the grid");
      }
      const std::size_t steps = t - s;
      const std::size_t reach = steps + static_cast<std::size_t>(std::llabs(cfg.shift_k));
      if (2 * reach + 1 > n) throw Error(ErrorKind::UnsupportedTransform, "no wall-free columns for this shift");
      const Matrix a = normalized_field(green_field(grid.shift(cfg.shift_j, cfg.shift_k), cfg.beta, s, t));
      const Matrix b = normalized_field(
          green_field(grid, cfg.beta, static_cast<std::size_t>(sj), static_cast<std::size_t>(tj)));
      // Columns whose light cone avoids the walls of both grids; rows follow the shift.
      for (std::size_t l = reach; l + reach < n; ++l) {
        const auto lb = static_cast<std::size_t>(static_cast<std::int64_t>(l) + cfg.shift_k);
        for (std::size_t k = l - steps; k <= l + steps; ++k) {
          const auto kb = static_cast<std::size_t>(static_cast<std::int64_t>(k) + cfg.shift_k);
          const double x = a(k, l);
          const double y = b(kb, lb);
          if (!std::isfinite(x) && !std::isfinite(y)) continue;
          diff = std::max(diff, std::fabs(x - y) / std::max(1.0, std::fabs(y)));
        }
      }
      rep.statistics["columns_compared"] = n - 2 * reach;
      break;
    }
    case SymmetryKind::ReflectTime: {
      // Reversing time reverses the order of the step product: H P' = P^T H on the reflected grid.
      const std::size_t s2 = g.nt - t;
      const std::size_t t2 = g.nt - s;
      const Matrix p = green_field(grid, cfg.beta, s, t).matrix();
      const Matrix q = green_field(grid.reflect_time(), cfg.beta, s2, t2).matrix();
      const double side = g.dt / (2.0 * g.dx * g.dx);
      Matrix h = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        h(i, i) = 1.0 - 2.0 * side;
        if (k > 0) h(i, i - 1) = side;
        if (k + 1 < n) h(i, i + 1) = side;
      }
      const Matrix lhs = h * q;
      const Matrix rhs = p.transpose() * h;
      diff = rel_diff(lhs, rhs);
      break;
    }
  }
  rep.statistics["max_relative_difference"] = diff;
  rep.pass = diff <= cfg.tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Stationarity
// ---------------------------------------------------------------------------

Report stationarity_test(const StationarityConfig& cfg) {
  Report rep;
  rep.test_name = "stationarity";
  rep.seed_base = cfg.seed_base;
  rep.n_seeds = cfg.n_seeds;
  rep.config = {{"beta", cfg.beta}, {"t_minus_s", cfg.horizon}, {"dx", cfg.dx}, {"window", cfg.window},
                {"probes", cfg.probes}};
  if (cfg.n_seeds < 2 || cfg.probes < 2) throw Error(ErrorKind::Configuration, "need at least two seeds and probes");
  const double half = cfg.window + 4.0 * std::sqrt(cfg.horizon) + 1.0;
  const Geometry g = reference(half, cfg.dx, cfg.horizon);
  const std::size_t y = g.space_index(0.0);
  const std::size_t k_lo = g.space_index(-cfg.window);
  const std::size_t k_hi = g.space_index(cfg.window);

  std::vector<std::size_t> probe_cells(cfg.probes);
  for (std::size_t i = 0; i < cfg.probes; ++i) {
    const double x = -cfg.window + 2.0 * cfg.window * static_cast<double>(i) / static_cast<double>(cfg.probes - 1);
    probe_cells[i] = g.space_index(x);
  }
  std::vector<double> slopes(cfg.n_seeds), means(cfg.n_seeds), variances(cfg.n_seeds);
  std::vector<std::vector<double>> at_probe(cfg.probes, std::vector<double>(cfg.n_seeds));
  parallel_for(cfg.n_seeds, [&](std::size_t i) {
    const NoiseGrid grid = NoiseGrid::generate(cfg.seed_base + i, g);
    const auto col = normalized_column(grid, cfg.beta, 0, g.nt, y);
    std::vector<double> xs, zs;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      xs.push_back(g.x(k));
      zs.push_back(col[k]);
    }
    const auto fit = stats::linear_fit(xs, zs);
    const auto sum = stats::summarize(zs);
    slopes[i] = fit.slope;
    means[i] = sum.mean;
    variances[i] = sum.variance;
    for (std::size_t p = 0; p < cfg.probes; ++p) at_probe[p][i] = col[probe_cells[p]];
  });

  const auto slope = stats::summarize(slopes);
  const auto mean = stats::summarize(means);
  const auto var = stats::summarize(variances);
  const bool no_trend = std::fabs(slope.mean) <= 3.0 * slope.stderr_mean;
  json probe_stats = json::array();
  bool means_ok = true;
  for (std::size_t p = 0; p < cfg.probes; ++p) {
    const auto s = stats::summarize(at_probe[p]);
    const bool ok = std::fabs(s.mean - 1.0) <= 3.0 * s.stderr_mean;
    means_ok = means_ok && ok;
    probe_stats.push_back({{"x", g.x(probe_cells[p])}, {"mean", s.mean}, {"stderr", s.stderr_mean}, {"within_3se", ok}});
  }
  rep.statistics = {{"slope_mean", slope.mean},   {"slope_stderr", slope.stderr_mean},
                    {"no_trend", no_trend},       {"spatial_mean", mean.mean},
                    {"spatial_mean_stderr", mean.stderr_mean}, {"spatial_variance", var.mean},
                    {"probes", probe_stats},      {"pointwise_means_within_3se", means_ok}};
  rep.pass = no_trend;
  return rep;
}

// ---------------------------------------------------------------------------
// Moment scaling
// ---------------------------------------------------------------------------

Report moment_scaling_test(const ScalingConfig& cfg) {
  Report rep;
  rep.test_name = "moment_scaling";
  rep.seed_base = cfg.seed_base;
  rep.n_seeds = 2 * cfg.n_seeds;
  if (cfg.inverse_lambda < 1) throw Error(ErrorKind::Configuration, "lambda must be 1/m for a positive integer m");
  if (cfg.batches == 0 || cfg.n_seeds < 2 * cfg.batches) {
    throw Error(ErrorKind::Configuration, "need at least two seeds per batch");
  }
  const double lambda = 1.0 / static_cast<double>(cfg.inverse_lambda);
  const double beta_b = cfg.beta / std::sqrt(lambda);
  const double t_b = lambda * lambda * cfg.t;
  rep.config = {{"beta", cfg.beta}, {"t", cfg.t},         {"lambda", lambda}, {"beta_scaled", beta_b},
                {"t_scaled", t_b},  {"dx", cfg.dx},       {"batches", cfg.batches},
                {"seeds_per_sample", cfg.n_seeds}};

  const Geometry ga = reference(4.0 * std::sqrt(cfg.t), cfg.dx, cfg.t);
  Geometry gb = ga;
  gb.dx = lambda * ga.dx;
  gb.dt = lambda * lambda * ga.dt;
  gb.x_min = lambda * ga.x_min;
  const std::size_t ya = ga.space_index(0.0);
  const std::size_t yb = gb.space_index(0.0);
  // lambda = 1 reuses the seeds and must reproduce the sample exactly.
  const std::uint64_t base_b = cfg.inverse_lambda == 1 ? cfg.seed_base : cfg.seed_base + cfg.n_seeds;

  std::vector<double> a(cfg.n_seeds), b(cfg.n_seeds);
  parallel_for(cfg.n_seeds, [&](std::size_t i) {
    a[i] = normalized_value(NoiseGrid::generate(cfg.seed_base + i, ga), cfg.beta, 0, ga.nt, ya, ya);
    b[i] = normalized_value(NoiseGrid::generate(base_b + i, gb), beta_b, 0, gb.nt, yb, yb);
  });

  const auto sa = stats::summarize(a);
  const auto sb = stats::summarize(b);
  std::vector<double> a2(a.size()), b2(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a2[i] = a[i] * a[i];
    b2[i] = b[i] * b[i];
  }
  const auto sa2 = stats::summarize(a2);
  const auto sb2 = stats::summarize(b2);
  const double pooled = std::hypot(sa2.stderr_mean, sb2.stderr_mean);
  const bool second_ok = std::fabs(sa2.mean - sb2.mean) <= 3.0 * pooled;
  const bool mean_ok = std::fabs(sa.mean - 1.0) <= 3.0 * sa.stderr_mean;

  json batches = json::array();
  std::size_t passing = 0;
  const std::size_t per = cfg.n_seeds / cfg.batches;
  for (std::size_t bi = 0; bi < cfg.batches; ++bi) {
    std::vector<double> xa(a.begin() + static_cast<std::ptrdiff_t>(bi * per),
                           a.begin() + static_cast<std::ptrdiff_t>((bi + 1) * per));
    std::vector<double> xb(b.begin() + static_cast<std::ptrdiff_t>(bi * per),
                           b.begin() + static_cast<std::ptrdiff_t>((bi + 1) * per));
    const auto ks = stats::ks_two_sample(std::move(xa), std::move(xb));
    if (ks.p_value > 0.01) ++passing;
    batches.push_back({{"statistic", ks.statistic}, {"p_value", ks.p_value}});
  }
  const std::size_t needed = cfg.batches > 1 ? cfg.batches - 1 : 1;
  const bool ks_ok = passing >= needed;
  rep.statistics = {{"mean", sa.mean},
                    {"mean_stderr", sa.stderr_mean},
                    {"mean_within_3se", mean_ok},
                    {"mean_scaled", sb.mean},
                    {"mean_scaled_stderr", sb.stderr_mean},
                    {"second_moment", sa2.mean},
                    {"second_moment_scaled", sb2.mean},
                    {"second_moment_pooled_stderr", pooled},
                    {"second_moments_agree", second_ok},
                    {"ks_batches", batches},
                    {"ks_batches_passing", passing},
                    {"ks_batches_needed", needed}};
  rep.pass = mean_ok && ks_ok && second_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Growth
// ---------------------------------------------------------------------------

namespace {

struct GrowthSample {
  double ratio = 0.0;
  double inverse_ratio = 0.0;
};

GrowthSample growth_sample(std::uint64_t seed, const GrowthConfig& cfg, double window) {
  const Geometry g = reference(window + 3.0 + 4.0 * std::sqrt(cfg.horizon), cfg.dx, cfg.horizon);
  const NoiseGrid grid = NoiseGrid::generate(seed, g);
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.5 / g.dx)));
  const std::size_t reach = static_cast<std::size_t>(std::floor(cfg.max_separation / g.dx));
  const std::size_t lo = g.space_index(-window);
  const std::size_t hi = g.space_index(window);
  const std::size_t centre = g.space_index(0.0);
  GrowthSample out;
  for (std::size_t l = lo; l <= hi; ++l) {
    // Start cells on a lattice through the origin.
    if ((l > centre ? l - centre : centre - l) % stride != 0) continue;
    const auto col = normalized_column(grid, cfg.beta, 0, g.nt, l);
    const double y4 = std::pow(g.x(l), 4);
    const std::size_t k0 = std::max(lo, l >= reach ? l - reach : 0);
    const std::size_t k1 = std::min(hi, l + reach);
    for (std::size_t k = k0; k <= k1; ++k) {
      const double weight = 1.0 + std::pow(g.x(k), 4) + y4;
      out.ratio = std::max(out.ratio, col[k] / weight);
      out.inverse_ratio = std::max(out.inverse_ratio, 1.0 / (col[k] * weight));
    }
  }
  return out;
}

}  // namespace

Report growth_bound_test(const GrowthConfig& cfg) {
  Report rep;
  rep.test_name = "growth_bound";
  rep.seed_base = cfg.seed_base;
  rep.n_seeds = cfg.n_seeds;
  rep.config = {{"beta", cfg.beta},     {"t_minus_s", cfg.horizon},         {"window", cfg.half_width},
                {"doubled", 2.0 * cfg.half_width}, {"max_separation", cfg.max_separation}, {"dx", cfg.dx}};
  std::vector<GrowthSample> small(cfg.n_seeds), large(cfg.n_seeds);
  parallel_for(cfg.n_seeds, [&](std::size_t i) {
    small[i] = growth_sample(cfg.seed_base + i, cfg, cfg.half_width);
    large[i] = growth_sample(cfg.seed_base + i, cfg, 2.0 * cfg.half_width);
  });
  auto column = [](const std::vector<GrowthSample>& v, bool inverse) {
    std::vector<double> out;
    for (const auto& s : v) out.push_back(inverse ? s.inverse_ratio : s.ratio);
    return out;
  };
  json stats_out;
  bool ok = true;
  for (bool inverse : {false, true}) {
    const auto a = column(small, inverse);
    const auto b = column(large, inverse);
    const double qa = quantile(a, 0.99);
    const double qb = quantile(b, 0.99);
    const bool finite = std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); }) &&
                        std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); });
    const double change = std::fabs(qb - qa) / qa;
    const bool stable = finite && change < 0.5;
    ok = ok && stable;
    stats_out[inverse ? "inverse" : "direct"] = {
        {"q99_window", qa}, {"q99_doubled", qb}, {"relative_change", change}, {"finite", finite}, {"stable", stable}};
  }
  rep.statistics = stats_out;
  rep.pass = ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Hoelder exponents
// ---------------------------------------------------------------------------

std::string to_string(HolderDirection d) {
  switch (d) {
    case HolderDirection::Space: return "space";
    case HolderDirection::Time: return "time";
    case HolderDirection::Beta: return "beta";
  }
  return "unknown";
}

HolderEstimate holder_exponent_estimate(const HolderConfig& cfg) {
  if (cfg.horizon < 0.1) throw Error(ErrorKind::InvalidGeometry, "time gap below 0.1");
  std::vector<double> lags = cfg.lags;
  if (lags.empty()) {
    switch (cfg.direction) {
      case HolderDirection::Space: lags = {1, 2, 4, 8}; break;
      case HolderDirection::Time: lags = {8, 16, 32, 64}; break;
      case HolderDirection::Beta: lags = {0.01, 0.02, 0.04, 0.08}; break;
    }
  }
  std::sort(lags.begin(), lags.end());
  if (lags.size() < 4 || !(lags.front() > 0.0) || std::log2(lags.back() / lags.front()) < 3.0 - 1e-12) {
    throw Error(ErrorKind::InvalidGeometry, "Hoelder fit needs at least four lags spanning three octaves");
  }

  HolderEstimate est;
  est.direction = cfg.direction;
  est.octaves = std::log2(lags.back() / lags.front());

  const double max_time_lag = cfg.direction == HolderDirection::Time ? lags.back() : 0.0;
  if (!(cfg.dt_ratio > 0.0 && cfg.dt_ratio <= 0.5)) throw Error(ErrorKind::Configuration, "dt_ratio must lie in (0, 1/2]");
  const double dt = cfg.dt_ratio * cfg.dx * cfg.dx;
  const double end_time = cfg.horizon + max_time_lag * dt;
  const double probe_half = 1.0;
  const double max_space_lag = cfg.direction == HolderDirection::Space ? lags.back() * cfg.dx : 0.0;
  const Geometry g =
      Geometry::centered(probe_half + max_space_lag + 4.0 * std::sqrt(end_time) + 1.0, cfg.dx, end_time, dt);
  const std::size_t y = g.space_index(0.0);
  const std::size_t base_step = static_cast<std::size_t>(std::llround(cfg.horizon / g.dt));
  const std::size_t p_lo = g.space_index(-probe_half);
  const std::size_t p_hi = g.space_index(probe_half);

  for (double lag : lags) {
    switch (cfg.direction) {
      case HolderDirection::Space:
        if (std::fabs(lag - std::round(lag)) > 1e-9) throw Error(ErrorKind::InvalidGeometry, "space lags are cell counts");
        est.lags.push_back(lag * g.dx);
        break;
      case HolderDirection::Time:
        if (std::fabs(lag - std::round(lag)) > 1e-9) throw Error(ErrorKind::InvalidGeometry, "time lags are step counts");
        est.lags.push_back(lag * g.dt);
        break;
      case HolderDirection::Beta: est.lags.push_back(lag); break;
    }
  }

  std::vector<std::vector<double>> sq(cfg.n_seeds, std::vector<double>(lags.size(), 0.0));
  std::vector<std::vector<std::size_t>> counts(cfg.n_seeds, std::vector<std::size_t>(lags.size(), 0));
  parallel_for(cfg.n_seeds, [&](std::size_t i) {
    const NoiseGrid grid = NoiseGrid::generate(cfg.seed_base + i, g);
    switch (cfg.direction) {
      case HolderDirection::Space: {
        const auto col = normalized_column(grid, cfg.beta, 0, base_step, y);
        for (std::size_t li = 0; li < lags.size(); ++li) {
          const auto m = static_cast<std::size_t>(std::llround(lags[li]));
          for (std::size_t k = p_lo; k <= p_hi; ++k) {
            const double d = col[k + m] - col[k];
            sq[i][li] += d * d;
            ++counts[i][li];
          }
        }
        break;
      }
      case HolderDirection::Time: {
        const auto base = normalized_column(grid, cfg.beta, 0, base_step, y);
        for (std::size_t li = 0; li < lags.size(); ++li) {
          const auto m = static_cast<std::size_t>(std::llround(lags[li]));
          const auto later = normalized_column(grid, cfg.beta, 0, base_step + m, y);
          for (std::size_t k = p_lo; k <= p_hi; ++k) {
            const double d = later[k] - base[k];
            sq[i][li] += d * d;
            ++counts[i][li];
          }
        }
        break;
      }
      case HolderDirection::Beta: {
        const auto base = normalized_column(grid, cfg.beta, 0, base_step, y);
        for (std::size_t li = 0; li < lags.size(); ++li) {
          const auto moved = normalized_column(grid, cfg.beta + lags[li], 0, base_step, y);
          for (std::size_t k = p_lo; k <= p_hi; ++k) {
            const double d = moved[k] - base[k];
            sq[i][li] += d * d;
            ++counts[i][li];
          }
        }
        break;
      }
    }
  });

  std::vector<double> log_lag, log_rms;
  for (std::size_t li = 0; li < lags.size(); ++li) {
    double total = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < cfg.n_seeds; ++i) {
      total += sq[i][li];
      n += counts[i][li];
    }
    const double rms = std::sqrt(total / static_cast<double>(n));
    est.rms.push_back(rms);
    log_lag.push_back(std::log(est.lags[li]));
    log_rms.push_back(std::log(rms));
  }
  const auto fit = stats::linear_fit(log_lag, log_rms);
  est.exponent_hat = fit.slope;
  est.r_squared = fit.r_squared;
  return est;
}

// ---------------------------------------------------------------------------
// Continuity modulus
// ---------------------------------------------------------------------------

std::vector<double> continuity_modulus(const NoiseGrid& grid, double beta, std::size_t s_index, std::size_t t_index,
                                       const std::vector<MeasureIC>& sequence, const MeasureIC& limit, double x_lo,
                                       double x_hi) {
  const GridFunction target = solve_from_measure(grid, beta, s_index, t_index, limit, Direction::Forward);
  std::vector<double> out(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const GridFunction f = solve_from_measure(grid, beta, s_index, t_index, sequence[i], Direction::Forward);
    out[i] = metric_d_CICM(f, target, x_lo, x_hi);
  }
  return out;
}

MeasureIC mollified_delta(const Geometry& g, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidMeasure, "mollifier width must be positive");
  // Distribution function of the unit hat on [-width, width].
  auto cdf = [width](double x) {
    if (x <= -width) return 0.0;
    if (x >= width) return 1.0;
    const double w2 = 2.0 * width * width;
    return x <= 0.0 ? (x + width) * (x + width) / w2 : 1.0 - (width - x) * (width - x) / w2;
  };
  std::vector<double> density(g.nx);
  for (std::size_t k = 0; k < g.nx; ++k) {
    const double a = g.x_min + static_cast<double>(k) * g.dx;
    density[k] = (cdf(a + g.dx) - cdf(a)) / g.dx;
  }
  return MeasureIC::from_density(std::move(density));
}

Report continuity_modulus_test(const ContinuityConfig& cfg) {
  Report rep;
  rep.test_name = "continuity_modulus";
  rep.seed_base = cfg.seed;
  rep.n_seeds = 1;
  rep.config = {{"beta", cfg.beta}, {"t_minus_s", cfg.horizon}, {"dx", cfg.dx}, {"half_width", cfg.half_width},
                {"window", cfg.window}, {"terms", cfg.terms}};
  if (cfg.terms < 2) throw Error(ErrorKind::Configuration, "need at least two terms");
  const Geometry g = reference(cfg.half_width, cfg.dx, cfg.horizon);
  const NoiseGrid grid = NoiseGrid::generate(cfg.seed, g);
  std::vector<MeasureIC> seq;
  json widths = json::array();
  for (std::size_t n = 1; n <= cfg.terms; ++n) {
    const double w = 16.0 * g.dx * std::ldexp(1.0, -static_cast<int>(n));
    seq.push_back(mollified_delta(g, w));
    widths.push_back(w);
  }
  const auto d = continuity_modulus(grid, cfg.beta, 0, g.nt, seq, MeasureIC::delta(0.0), -cfg.window, cfg.window);

  // Non-increasing after a 3-term moving average.
  std::vector<double> smooth;
  for (std::size_t i = 0; i + 2 < d.size(); ++i) smooth.push_back((d[i] + d[i + 1] + d[i + 2]) / 3.0);
  bool monotone = true;
  for (std::size_t i = 1; i < smooth.size(); ++i) monotone = monotone && smooth[i] <= smooth[i - 1];
  const double first = d.front();
  const double last = d.back();
  const bool small_tail = last <= 0.1 * first;
  rep.statistics = {{"widths", widths},
                    {"distances", d},
                    {"smoothed", smooth},
                    {"smoothed_non_increasing", monotone},
                    {"first_over_last", last > 0.0 ? json(first / last) : json("inf")},
                    {"final_within_10pct", small_tail}};
  rep.pass = monotone && small_tail;
  return rep;
}

}  // namespace pam::verify

namespace pam::verify {

Report lyapunov_trend_check(const LyapunovConfig& cfg) {
  Report rep;
  rep.test_name = "lyapunov_trend";
  rep.config = {{"beta", cfg.beta}, {"times", cfg.times}, {"dx", cfg.dx}, {"target", cfg.target}};
  if (cfg.times.empty()) throw Error(ErrorKind::Configuration, "no times requested");
  std::vector<double> times = cfg.times;
  std::sort(times.begin(), times.end());
  const Geometry g = reference(4.0 * std::sqrt(times.back()) + 1.0, cfg.dx, times.back());
  const std::size_t n = g.nx;
  const double side = g.dt / (2.0 * g.dx * g.dx);
  const double centre = 1.0 - 2.0 * side;
  const double diag_boost = std::expm1(cfg.beta * cfg.beta * g.dt / g.dx);
  const std::size_t y = g.space_index(0.0);

  // Rows and columns of M are cells; the mean profile is H^j delta.
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Matrix tmp = m;
  std::vector<double> mean(n, 0.0), next(n);
  m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) = 1.0;
  mean[y] = 1.0;
  auto heat_rows = [&](const Matrix& in, Matrix& out) {
    const auto last = static_cast<Eigen::Index>(n) - 1;
    out.row(0) = centre * in.row(0) + side * in.row(1);
    for (Eigen::Index k = 1; k < last; ++k) out.row(k) = side * (in.row(k - 1) + in.row(k + 1)) + centre * in.row(k);
    out.row(last) = centre * in.row(last) + side * in.row(last - 1);
  };

  json rates = json::array();
  std::size_t next_time = 0;
  double last_rate = 0.0;
  for (std::size_t j = 1; j <= g.nt && next_time < times.size(); ++j) {
    heat_rows(m, tmp);
    tmp.transposeInPlace();
    heat_rows(tmp, m);
    m.diagonal() *= 1.0 + diag_boost;
    next[0] = centre * mean[0] + side * mean[1];
    for (std::size_t k = 1; k + 1 < n; ++k) next[k] = side * (mean[k - 1] + mean[k + 1]) + centre * mean[k];
    next[n - 1] = centre * mean[n - 1] + side * mean[n - 2];
    mean.swap(next);
    const double tj = g.t(j);
    if (std::fabs(tj - times[next_time]) < g.dt / 2.0) {
      const double second = m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) / (mean[y] * mean[y]);
      last_rate = std::log(second) / tj;
      rates.push_back({{"t", tj}, {"second_moment", second}, {"rate", last_rate}});
      ++next_time;
    }
  }
  const bool ok = last_rate >= cfg.target / 2.0 && last_rate <= 2.0 * cfg.target;
  rep.statistics = {{"rates", rates}, {"final_rate", last_rate}, {"within_factor_2", ok}};
  rep.pass = ok;
  return rep;
}

}  // namespace pam::verify
