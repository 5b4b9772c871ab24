#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

#include "pam/chaos.hpp"
#include "pam/error.hpp"
#include "pam/kernel.hpp"
#include "pam/parallel.hpp"
#include "pam/philox.hpp"
#include "pam/polymer.hpp"
#include "pam/stats.hpp"
#include "pam/verify.hpp"

namespace pam::verify {

namespace {

double uniform(UniformStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.next(); }

std::size_t pick(UniformStream& rng, std::size_t lo, std::size_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return std::min(hi, lo + static_cast<std::size_t>(rng.next() * span));
}

Geometry reference(double half_width, double dx, double horizon) {
  return Geometry::centered(half_width, dx, horizon, dx * dx / 2.0);
}

bool fast(Profile p) { return p == Profile::Fast; }

// n sorted points in [lo, hi] with consecutive gaps of at least `gap`, snapped to cell centres.
std::vector<double> ordered_points(UniformStream& rng, const Geometry& g, std::size_t n, double lo, double hi,
                                   double gap) {
  std::vector<double> u(n);
  for (double& v : u) v = uniform(rng, lo, hi - gap * static_cast<double>(n - 1));
  std::sort(u.begin(), u.end());
  for (std::size_t i = 0; i < n; ++i) u[i] = g.x(g.space_index(u[i] + gap * static_cast<double>(i)));
  return u;
}

// Compactly supported C^2 bump.
double bump(double x, double centre, double radius) {
  const double u = (x - centre) / radius;
  if (std::fabs(u) >= 1.0) return 0.0;
  const double v = 1.0 - u * u;
  return v * v * v;
}

// ---------------------------------------------------------------------------

Report criterion_appendix(Profile, std::uint64_t base) {
  Report rep = appendix_c_suite(100, base);
  return rep;
}

Report criterion_semigroup(Profile, std::uint64_t base) {
  Report rep;
  rep.seed_base = base;
  rep.n_seeds = 50;
  const Geometry g = reference(5.0, 0.05, 0.5);
  rep.config = {{"triples", 50}, {"dx", g.dx}, {"dt", g.dt}, {"nx", g.nx}, {"nt", g.nt}, {"beta_range", {-2.0, 2.0}},
                {"tol", 1e-12}};
  std::vector<double> residual(50);
  std::vector<json> rows(50);
  parallel_for(50, [&](std::size_t i) {
    UniformStream rng(base, i);
    const double beta = uniform(rng, -2.0, 2.0);
    std::size_t s = pick(rng, 0, g.nt - 2);
    std::size_t t = pick(rng, s + 2, g.nt);
    const std::size_t r = pick(rng, s + 1, t - 1);
    const NoiseGrid grid = NoiseGrid::generate(base + i, g);
    residual[i] = chapman_kolmogorov_residual(grid, beta, s, r, t);
    rows[i] = {{"beta", beta}, {"s", s}, {"r", r}, {"t", t}, {"residual", residual[i]}};
  });
  const double worst = *std::max_element(residual.begin(), residual.end());
  rep.statistics = {{"max_residual", worst}, {"triples", rows}};
  rep.pass = worst <= 1e-12;
  return rep;
}

Report criterion_heat_limit(Profile, std::uint64_t base) {
  Report rep;
  rep.seed_base = base;
  rep.n_seeds = 1;
  const double dx = 0.05;
  const std::vector<double> gaps = {0.1, 0.25, 0.5, 0.75, 1.0};
  rep.config = {{"beta", 0.0}, {"dx", dx}, {"t_minus_s", gaps}, {"interior", "|x - y| <= 3 sqrt(t - s)"},
                {"tol_reference", 0.02}, {"tol_halved", 0.01}};
  auto worst_error = [&](double tau, double dt) {
    const Geometry g = Geometry::centered(6.0, dx, tau, dt);
    const NoiseGrid grid = NoiseGrid::generate(base, g);
    const std::size_t y = g.space_index(0.0);
    std::vector<double> u(g.nx, 0.0);
    u[y] = 1.0;
    propagate(grid, 0.0, 0, g.nt, u);
    const double span = g.t(g.nt) - g.t(0);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.nx; ++k) {
      const double x = g.x(k);
      if (std::fabs(x) > 3.0 * std::sqrt(span)) continue;
      const double exact = rho(span, x);
      worst = std::max(worst, std::fabs(u[k] / g.dx - exact) / exact);
    }
    return worst;
  };
  json rows = json::array();
  bool ok = true;
  for (double tau : gaps) {
    const double e_ref = worst_error(tau, dx * dx / 2.0);
    const double e_half = worst_error(tau, dx * dx / 4.0);
    const bool row_ok = e_ref <= 0.02 && e_half <= 0.01;
    ok = ok && row_ok;
    rows.push_back({{"t_minus_s", tau},
                    {"relative_error", e_ref},
                    {"relative_error_dt_halved", e_half},
                    {"observed_order", std::log2(e_ref / e_half)},
                    {"pass", row_ok}});
  }
  rep.statistics = {{"rows", rows}};
  rep.pass = ok;
  return rep;
}

Report criterion_chaos(Profile, std::uint64_t base) {
  Report rep;
  const std::size_t seeds = 200;
  const std::size_t var_seeds = 10000;
  rep.seed_base = base;
  rep.n_seeds = seeds + var_seeds;

  // Solver against the third-order chaos sum.
  const double beta = 0.25;
  const Geometry g = reference(3.0, 0.05, 0.25);
  const ChaosEndpoints at{0, g.space_index(0.0), g.nt, g.space_index(0.0)};
  std::vector<double> diff2(seeds);
  parallel_for(seeds, [&](std::size_t i) {
    const NoiseGrid grid = NoiseGrid::generate(base + i, g);
    const double solver = normalized_value(grid, beta, 0, g.nt, at.x_cell, at.y_cell);
    const double chaos = chaos_partial_sum(grid, 3, beta, at);
    diff2[i] = (solver - chaos) * (solver - chaos);
  });
  double total = 0.0;
  for (double v : diff2) total += v;
  const double rms = std::sqrt(total / static_cast<double>(seeds));

  // Variance of the first-order term at t = 1.
  const Geometry gv = reference(4.0, 0.1, 1.0);
  const ChaosEndpoints atv{0, gv.space_index(0.0), gv.nt, gv.space_index(0.0)};
  std::vector<double> first(var_seeds);
  parallel_for(var_seeds, [&](std::size_t i) {
    first[i] = chaos_term(NoiseGrid::generate(base + seeds + i, gv), 1, atv);
  });
  const auto sum = stats::summarize(first);
  const double target = std::sqrt(std::numbers::pi) / 2.0;
  const double rel = std::fabs(sum.variance - target) / target;

  rep.config = {{"beta", beta},         {"t_minus_s", 0.25},   {"K", 3},          {"dx", g.dx},
                {"seeds", seeds},       {"variance_t", 1.0},   {"variance_dx", gv.dx},
                {"variance_seeds", var_seeds}};
  rep.statistics = {{"rms_difference", rms},
                    {"rms_ok", rms <= 0.05},
                    {"first_order_variance", sum.variance},
                    {"first_order_variance_exact_discrete", first_order_variance(gv, atv)},
                    {"target", target},
                    {"relative_error", rel},
                    {"variance_ok", rel <= 0.05}};
  rep.pass = rms <= 0.05 && rel <= 0.05;
  return rep;
}

Report criterion_scaling(Profile profile, std::uint64_t base) {
  ScalingConfig cfg;
  cfg.n_seeds = fast(profile) ? 2000 : 10000;
  cfg.seed_base = base;
  return moment_scaling_test(cfg);
}

Report criterion_symmetry(Profile, std::uint64_t base) {
  Report rep;
  rep.seed_base = base;
  const std::size_t configs = 20;
  rep.n_seeds = 4 * configs;
  rep.config = {{"configurations_per_kind", configs}, {"tol", 1e-10}};
  const std::vector<SymmetryKind> kinds = {SymmetryKind::Negate, SymmetryKind::Shift, SymmetryKind::ReflectSpace,
                                           SymmetryKind::ReflectTime};
  json per = json::object();
  bool ok = true;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    std::vector<double> diffs(configs);
    std::vector<char> passes(configs);
    parallel_for(configs, [&](std::size_t i) {
      UniformStream rng(base + ki, i);
      SymmetryConfig cfg;
      cfg.seed = base + 1000 * ki + i;
      cfg.beta = uniform(rng, -2.0, 2.0);
      cfg.nt = 80;
      cfg.s_index = pick(rng, 0, 30);
      cfg.t_index = pick(rng, cfg.s_index + 10, std::min<std::size_t>(cfg.s_index + 60, cfg.nt));
      const auto s = static_cast<std::int64_t>(cfg.s_index);
      const auto room = static_cast<std::int64_t>(cfg.nt - cfg.t_index);
      cfg.shift_j = static_cast<std::int64_t>(pick(rng, 0, static_cast<std::size_t>(s + room))) - s;
      cfg.shift_k = static_cast<std::int64_t>(pick(rng, 0, 40)) - 20;
      const Report r = symmetry_test(kinds[ki], cfg);
      diffs[i] = r.statistics["max_relative_difference"].get<double>();
      passes[i] = r.pass;
    });
    const double worst = *std::max_element(diffs.begin(), diffs.end());
    const bool all = std::all_of(passes.begin(), passes.end(), [](char c) { return c != 0; });
    ok = ok && all;
    per[to_string(kinds[ki])] = {{"max_relative_difference", worst}, {"all_pass", all}};
  }
  rep.statistics = per;
  rep.pass = ok;
  return rep;
}

Report criterion_total_positivity(Profile profile, std::uint64_t base) {
  Report rep;
  const std::size_t seeds = fast(profile) ? 10 : 50;
  const std::size_t sets = 20;
  rep.seed_base = base;
  rep.n_seeds = seeds;
  const Geometry g = reference(3.0, 0.05, 0.25);
  const std::vector<double> betas = {-2.0, -1.0, 0.0, 1.0, 2.0};
  rep.config = {{"sizes", {2, 3, 4, 5, 6}}, {"betas", betas},        {"determinants_per_cell", seeds * sets},
                {"dx", g.dx},               {"t_minus_s", 0.25},      {"point_range", {-1.5, 1.5}},
                {"min_gap", 0.25}};
  // Each seed's propagator serves every (n, point set) pair; draws depend on (beta, seed) only.
  std::vector<std::vector<double>> minima(betas.size(), std::vector<double>(seeds));
  std::vector<std::vector<std::size_t>> fails(betas.size(), std::vector<std::size_t>(seeds, 0));
  std::vector<std::vector<std::array<double, 5>>> min_by_n(betas.size(),
                                                           std::vector<std::array<double, 5>>(seeds));
  parallel_for(betas.size() * seeds, [&](std::size_t idx) {
    const std::size_t bi = idx / seeds;
    const std::size_t i = idx % seeds;
    const NoiseGrid grid = NoiseGrid::generate(base + i, g);
    const Propagator prop = green_field(grid, betas[bi], 0, g.nt);
    UniformStream rng(base + 7 + bi, i);
    auto& mins = min_by_n[bi][i];
    mins.fill(std::numeric_limits<double>::infinity());
    for (std::size_t n = 2; n <= 6; ++n) {
      for (std::size_t k = 0; k < sets; ++k) {
        const auto ys = ordered_points(rng, g, n, -1.5, 1.5, 0.25);
        const auto xs = ordered_points(rng, g, n, -1.5, 1.5, 0.25);
        const double det = km_determinant(prop, ys, xs);
        mins[n - 2] = std::min(mins[n - 2], det);
        if (!(det > 0.0)) ++fails[bi][i];
      }
    }
  });
  json cells = json::array();
  std::size_t total_fail = 0;
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    for (std::size_t n = 2; n <= 6; ++n) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < seeds; ++i) m = std::min(m, min_by_n[bi][i][n - 2]);
      cells.push_back({{"beta", betas[bi]}, {"n", n}, {"min_determinant", m}});
    }
    for (std::size_t i = 0; i < seeds; ++i) total_fail += fails[bi][i];
  }
  rep.statistics = {{"cells", cells}, {"non_positive", total_fail}};
  rep.pass = total_fail == 0;
  return rep;
}

Report criterion_monotonicity(Profile profile, std::uint64_t base) {
  Report rep;
  const std::size_t seeds = fast(profile) ? 20 : 100;
  const std::size_t pairs = 20;
  const std::vector<double> betas = {0.0, 1.0, 1.5};
  rep.seed_base = base;
  rep.n_seeds = seeds;
  const Geometry g = reference(4.0, 0.05, 0.5);
  const std::size_t r = g.nt / 2;
  rep.config = {{"betas", betas}, {"pairs_per_seed", pairs}, {"dx", g.dx}, {"s", 0.0}, {"r", g.t(r)},
                {"t", g.t(g.nt)}, {"zeta", "lebesgue"}, {"slack", 1e-12}};
  std::vector<double> excess(betas.size() * seeds, -1.0);
  std::vector<std::size_t> failures(betas.size() * seeds, 0);
  parallel_for(betas.size() * seeds, [&](std::size_t idx) {
    const std::size_t bi = idx / seeds;
    const std::size_t i = idx % seeds;
    const NoiseGrid grid = NoiseGrid::generate(base + i, g);
    const Propagator early = green_field(grid, betas[bi], 0, r);
    auto back = MeasureIC::lebesgue(g).cell_masses(g);
    propagate_adjoint(grid, betas[bi], r, g.nt, back);
    UniformStream rng(base + 11 + bi, i);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto ys = ordered_points(rng, g, 2, -2.0, 2.0, g.dx);
      const auto rep1 = stochastic_dominance_check(early, back, g.space_index(ys[0]), g.space_index(ys[1]), 1e-12);
      excess[idx] = std::max(excess[idx], rep1.max_excess);
      if (!rep1.dominated) ++failures[idx];
    }
  });
  json per = json::array();
  std::size_t total = 0;
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    double worst = -1.0;
    std::size_t f = 0;
    for (std::size_t i = 0; i < seeds; ++i) {
      worst = std::max(worst, excess[bi * seeds + i]);
      f += failures[bi * seeds + i];
    }
    total += f;
    per.push_back({{"beta", betas[bi]}, {"max_cdf_excess", worst}, {"failures", f}});
  }
  rep.statistics = {{"per_beta", per}, {"failures", total}};
  rep.pass = total == 0;
  return rep;
}

MeasureIC random_measure(UniformStream& rng, const Geometry& g) {
  MeasureIC m;
  const std::size_t atoms = pick(rng, 0, 3);
  for (std::size_t a = 0; a < atoms; ++a) {
    m.atoms.emplace_back(g.x(g.space_index(uniform(rng, -2.0, 2.0))), uniform(rng, 0.2, 1.0));
  }
  if (atoms == 0 || rng.next() < 0.5) {
    const double centre = uniform(rng, -1.5, 1.5);
    const double radius = uniform(rng, 0.3, 1.5);
    const double height = uniform(rng, 0.2, 2.0);
    m.density.resize(g.nx);
    for (std::size_t k = 0; k < g.nx; ++k) m.density[k] = height * bump(g.x(k), centre, radius);
  }
  return m;
}

MeasureIC perturb(UniformStream& rng, const Geometry& g, const MeasureIC& m) {
  MeasureIC out = m;
  const double eps = std::pow(10.0, uniform(rng, -3.0, 0.0));
  out.atoms.emplace_back(g.x(g.space_index(uniform(rng, -2.0, 2.0))), eps);
  for (auto& atom : out.atoms) atom.second *= 1.0 + eps * uniform(rng, -0.5, 0.5);
  return out;
}

Report criterion_tv(Profile profile, std::uint64_t base) {
  Report rep;
  const std::size_t configs = fast(profile) ? 50 : 200;
  rep.seed_base = base;
  rep.n_seeds = configs;
  const Geometry g = Geometry::centered(3.0, 0.1, 0.5, 0.005);
  rep.config = {{"configurations", configs}, {"dx", g.dx}, {"dt", g.dt}, {"nx", g.nx}, {"nt", g.nt},
                {"times_per_table", {1, 3}}, {"beta_range", {-1.5, 1.5}}};
  std::vector<double> slack(configs), lhs(configs);
  std::vector<char> ok(configs);
  parallel_for(configs, [&](std::size_t i) {
    UniformStream rng(base, i);
    const double beta = uniform(rng, -1.5, 1.5);
    const std::size_t k = pick(rng, 1, 3);
    std::vector<std::size_t> times;
    while (times.size() < k) {
      const std::size_t t = pick(rng, 1, g.nt - 1);
      if (std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    const MeasureIC mu1 = random_measure(rng, g);
    const MeasureIC zeta1 = random_measure(rng, g);
    const bool small = rng.next() < 0.7;
    const MeasureIC mu2 = small ? perturb(rng, g, mu1) : random_measure(rng, g);
    const MeasureIC zeta2 = small ? perturb(rng, g, zeta1) : random_measure(rng, g);
    const NoiseGrid grid = NoiseGrid::generate(base + i, g);
    const TVReport tv = tv_bound_check(grid, beta, 0, g.nt, {mu1, zeta1}, {mu2, zeta2}, times);
    slack[i] = tv.slack();
    lhs[i] = tv.tv_lhs;
    ok[i] = tv.satisfied;
  });
  const std::size_t failures = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 0));
  rep.statistics = {{"failures", failures},
                    {"min_slack", *std::min_element(slack.begin(), slack.end())},
                    {"max_tv", *std::max_element(lhs.begin(), lhs.end())}};
  rep.pass = failures == 0;
  return rep;
}

Report criterion_slopes(Profile, std::uint64_t base) {
  Report rep;
  rep.seed_base = base;
  rep.n_seeds = 1;
  const std::vector<SlopePair> pairs = {{-3, 3},  {3, -3}, {-2, 2},     {2, -2},  {-3, -2},
                                        {2, 3},   {-2, 3}, {2.5, -2.5}, {-2.5, 2}};
  const std::size_t margin = 150;
  const Geometry g = Geometry::centered(20.0, 0.05, 0.25, 0.05 * 0.05 / 2.0);
  json cfg_pairs = json::array();
  for (const auto& p : pairs) cfg_pairs.push_back({p.lambda_minus, p.lambda_plus});
  rep.config = {{"pairs", cfg_pairs}, {"betas", {0.0, 1.0}}, {"t_minus_s", 0.25},     {"domain", {-20.0, 20.0}},
                {"dx", g.dx},         {"margin_cells", margin}, {"tolerance", "10% of |lambda|"}};
  json rows = json::array();
  bool ok = true;
  const NoiseGrid grid = NoiseGrid::generate(base, g);
  for (double beta : {0.0, 1.0}) {
    for (const auto& p : pairs) {
      std::vector<double> f(g.nx);
      for (std::size_t k = 0; k < g.nx; ++k) {
        const double x = g.x(k);
        f[k] = std::exp((x < 0.0 ? p.lambda_minus : p.lambda_plus) * x);
      }
      const GridFunction z =
          solve_from_measure(grid, beta, 0, g.nt, MeasureIC::from_density(std::move(f)), Direction::Forward);
      const SlopePair est = slope_limits(hopf_cole(z), margin);
      const bool row_ok = std::fabs(est.lambda_minus - p.lambda_minus) <= 0.1 * std::fabs(p.lambda_minus) &&
                          std::fabs(est.lambda_plus - p.lambda_plus) <= 0.1 * std::fabs(p.lambda_plus);
      ok = ok && row_ok;
      rows.push_back({{"beta", beta},
                      {"lambda_minus", p.lambda_minus},
                      {"lambda_plus", p.lambda_plus},
                      {"estimate_minus", est.lambda_minus},
                      {"estimate_plus", est.lambda_plus},
                      {"pass", row_ok}});
    }
  }
  rep.statistics = {{"rows", rows}};
  rep.pass = ok;
  return rep;
}

Report criterion_holder(Profile profile, std::uint64_t base) {
  Report rep;
  const std::size_t seeds = fast(profile) ? 30 : 100;
  rep.seed_base = base;
  rep.n_seeds = seeds;
  struct Case {
    HolderDirection dir;
    double beta;
    double lo;
    double hi;
  };
  const std::vector<Case> cases = {{HolderDirection::Space, 1.0, 0.40, 0.60},
                                   {HolderDirection::Time, 1.0, 0.17, 0.33},
                                   {HolderDirection::Beta, 0.1, 0.9, 1.1}};
  json out = json::object();
  bool ok = true;
  for (const auto& c : cases) {
    HolderConfig cfg;
    cfg.direction = c.dir;
    cfg.beta = c.beta;
    cfg.horizon = 0.5;
    cfg.n_seeds = seeds;
    cfg.seed_base = base;
    const HolderEstimate est = holder_exponent_estimate(cfg);
    const bool row_ok = est.exponent_hat >= c.lo && est.exponent_hat <= c.hi && est.r_squared >= 0.95 &&
                        est.octaves >= 3.0 - 1e-12;
    ok = ok && row_ok;
    out[to_string(c.dir)] = {{"beta", c.beta},   {"exponent_hat", est.exponent_hat}, {"interval", {c.lo, c.hi}},
                             {"r_squared", est.r_squared}, {"octaves", est.octaves}, {"lags", est.lags},
                             {"rms", est.rms},   {"pass", row_ok}};
  }
  rep.config = {{"t_minus_s", 0.5}, {"dx", 0.05}, {"dt_over_dx2", HolderConfig{}.dt_ratio}, {"seeds", seeds}};
  rep.statistics = out;
  rep.pass = ok;
  return rep;
}

Report criterion_initial_data(Profile, std::uint64_t base) {
  Report rep;
  rep.seed_base = base;
  rep.n_seeds = 1;
  const std::vector<double> gaps = {0.08, 0.04, 0.02, 0.01};
  const std::vector<double> betas = {0.0, 0.01};
  const Geometry g = reference(6.0, 0.05, 0.08);
  const double interior = 3.0;
  rep.config = {{"t_minus_s", gaps},   {"betas", betas},       {"dx", g.dx},
                {"f", "2 + cos(x)"},   {"interior", interior}, {"tolerance", 0.03},
                {"measure", "0.7 delta(-0.4) + 0.5 delta(0.35) + 0.3 bump(0, 1.5)"},
                {"test_functions", "bump(-0.5, 1), bump(0.3, 1.5), bump(0, 2)"}};
  const NoiseGrid grid = NoiseGrid::generate(base, g);

  std::vector<double> f(g.nx);
  for (std::size_t k = 0; k < g.nx; ++k) f[k] = 2.0 + std::cos(g.x(k));
  const double f_sup = 3.0;
  MeasureIC mu;
  mu.atoms = {{-0.4, 0.7}, {0.35, 0.5}};
  mu.density.resize(g.nx);
  for (std::size_t k = 0; k < g.nx; ++k) mu.density[k] = 0.3 * bump(g.x(k), 0.0, 1.5);
  const std::vector<std::pair<double, double>> phis = {{-0.5, 1.0}, {0.3, 1.5}, {0.0, 2.0}};

  auto decreasing_to = [](const std::vector<double>& e, double tol) {
    for (std::size_t i = 1; i < e.size(); ++i) {
      if (!(e[i] < e[i - 1])) return false;
    }
    return e.back() <= tol;
  };

  json rows = json::array();
  bool ok = true;
  for (double beta : betas) {
    std::vector<double> fn_err;
    std::vector<std::vector<double>> phi_err(phis.size());
    for (double tau : gaps) {
      const auto steps = static_cast<std::size_t>(std::llround(tau / g.dt));
      const GridFunction z = solve_from_measure(grid, beta, 0, steps, MeasureIC::from_density(f), Direction::Forward);
      double worst = 0.0;
      for (std::size_t k = 0; k < g.nx; ++k) {
        if (std::fabs(g.x(k)) <= interior) worst = std::max(worst, std::fabs(z.values[k] - f[k]));
      }
      fn_err.push_back(worst / f_sup);
      const GridFunction zm = solve_from_measure(grid, beta, 0, steps, mu, Direction::Forward);
      for (std::size_t i = 0; i < phis.size(); ++i) {
        const auto [c, rad] = phis[i];
        const auto phi = [c = c, rad = rad](double x) { return bump(x, c, rad); };
        double paired = 0.0;
        for (std::size_t k = 0; k < g.nx; ++k) paired += phi(g.x(k)) * zm.values[k] * g.dx;
        const double exact = integrate_measure(mu, g, phi);
        phi_err[i].push_back(std::fabs(paired - exact) / exact);
      }
    }
    const bool f_ok = decreasing_to(fn_err, 0.03);
    bool m_ok = true;
    json per_phi = json::array();
    for (const auto& e : phi_err) {
      const bool this_ok = decreasing_to(e, 0.03);
      m_ok = m_ok && this_ok;
      per_phi.push_back({{"errors", e}, {"pass", this_ok}});
    }
    ok = ok && f_ok && m_ok;
    rows.push_back({{"beta", beta}, {"function_errors", fn_err}, {"function_pass", f_ok}, {"measure", per_phi}});
  }
  rep.statistics = {{"rows", rows}};
  rep.pass = ok;
  return rep;
}

Report criterion_sampler(Profile profile, std::uint64_t base) {
  Report rep;
  const std::size_t samples = fast(profile) ? 20000 : 100000;
  rep.seed_base = base;
  rep.n_seeds = 4;
  const Geometry g = Geometry::centered(3.0, 0.1, 0.5, 0.005);
  const std::size_t stride = 5;
  const std::size_t r = g.nt / 2;
  const std::vector<std::size_t> pair_times = {g.nt / 4, 3 * g.nt / 4};
  rep.config = {{"samples", samples}, {"dx", g.dx}, {"dt", g.dt}, {"stride", stride}, {"r", g.t(r)},
                {"pair_times", {g.t(pair_times[0]), g.t(pair_times[1])}}, {"p_threshold", 0.001}};

  MeasureIC mu;
  mu.atoms = {{0.5, 0.4}};
  mu.density.resize(g.nx);
  MeasureIC zeta;
  zeta.atoms = {{-1.0, 0.3}};
  zeta.density.resize(g.nx);
  for (std::size_t k = 0; k < g.nx; ++k) {
    mu.density[k] = bump(g.x(k), 0.0, 1.0) * (1.0 + 0.5 * std::sin(3.0 * g.x(k)));
    zeta.density[k] = std::fabs(g.x(k)) <= 2.0 ? 1.0 : 0.0;
  }

  json rows = json::array();
  bool ok = true;
  std::uint64_t case_index = 0;
  for (bool m2m : {false, true}) {
    for (double beta : {0.0, 1.0}) {
      const NoiseGrid grid = NoiseGrid::generate(base + case_index, g);
      PolymerSpec spec;
      spec.beta = beta;
      spec.s_index = 0;
      spec.t_index = g.nt;
      spec.start = m2m ? Endpoint::spread(mu) : Endpoint::at(0.0);
      spec.end = m2m ? Endpoint::spread(zeta) : Endpoint::at(0.5);
      const PolymerSampler sampler(grid, spec, stride);
      const auto& times = sampler.time_indices();
      const auto pos = [&](std::size_t t) {
        return static_cast<std::size_t>(std::find(times.begin(), times.end(), t) - times.begin());
      };
      const std::size_t ir = pos(r);
      const std::size_t i1 = pos(pair_times[0]);
      const std::size_t i2 = pos(pair_times[1]);

      std::vector<std::size_t> one(g.nx, 0), two(g.nx * g.nx, 0);
      std::vector<std::array<std::size_t, 3>> draws(samples);
      parallel_for(samples, [&](std::size_t n) {
        const auto cells = sampler.sample_cells(base + 100 + case_index, n, i2);
        draws[n] = {cells[ir], cells[i1], cells[i2]};
      });
      for (const auto& d : draws) {
        ++one[d[0]];
        ++two[d[1] * g.nx + d[2]];
      }
      const FddTable single = fdd(grid, spec, {r});
      const FddTable joint = fdd(grid, spec, pair_times);
      const auto c1 = stats::chi_square_gof(one, single.p);
      const auto c2 = stats::chi_square_gof(two, joint.p);
      const bool row_ok = c1.p_value > 0.001 && c2.p_value > 0.001;
      ok = ok && row_ok;
      rows.push_back({{"spec", m2m ? "m2m" : "p2p"},
                      {"beta", beta},
                      {"one_point", {{"chi2", c1.statistic}, {"dof", c1.dof}, {"p_value", c1.p_value}}},
                      {"two_point", {{"chi2", c2.statistic}, {"dof", c2.dof}, {"p_value", c2.p_value}}},
                      {"pass", row_ok}});
      ++case_index;
    }
  }
  rep.statistics = {{"rows", rows}};
  rep.pass = ok;
  return rep;
}

Report criterion_bridge(Profile, std::uint64_t base) {
  Report rep;
  const std::size_t paths = 10000;
  rep.seed_base = base;
  rep.n_seeds = paths;
  const Geometry g = reference(4.0, 0.05, 1.0);
  const std::size_t stride = 8;
  rep.config = {{"beta", 0.0}, {"start", {0.0, 0.0}}, {"end", {1.0, 0.0}}, {"dx", g.dx},
                {"stride", stride}, {"paths", paths}, {"target", 0.25}, {"tolerance", 0.05}};
  const NoiseGrid grid = NoiseGrid::generate(base, g);
  PolymerSpec spec{0.0, 0, g.nt, Endpoint::at(0.0), Endpoint::at(0.0)};
  const PolymerSampler sampler(grid, spec, stride);
  const auto& times = sampler.time_indices();
  const std::size_t mid =
      static_cast<std::size_t>(std::find(times.begin(), times.end(), g.nt / 2) - times.begin());
  std::vector<double> x(paths);
  parallel_for(paths, [&](std::size_t n) { x[n] = g.x(sampler.sample_cells(base + 1, n, mid).back()); });
  const auto s = stats::summarize(x);
  const double rel = std::fabs(s.variance - 0.25) / 0.25;
  rep.statistics = {{"midpoint_mean", s.mean}, {"midpoint_variance", s.variance}, {"relative_error", rel},
                    {"variance_stderr", s.variance * std::sqrt(2.0 / static_cast<double>(paths - 1))}};
  rep.pass = rel <= 0.05;
  return rep;
}

Report criterion_continuity(Profile, std::uint64_t base) {
  ContinuityConfig cfg;
  cfg.seed = base;
  Report rep = continuity_modulus_test(cfg);
  const auto& d = rep.statistics["distances"];
  const double first = d.front().get<double>();
  const double fifth = d.at(4).get<double>();
  const bool factor = fifth * 5.0 <= first;
  rep.statistics["decrease_factor_at_least_5"] = factor;
  rep.statistics["first_over_fourth"] = first / d.at(3).get<double>();
  rep.pass = factor;
  return rep;
}

}  // namespace

std::string criterion_name(int id) {
  static const char* names[] = {"appendix_c_oracles",  "semigroup",          "heat_kernel_limit",
                                "chaos_cross_check",   "moment_scaling",     "symmetry_transport",
                                "total_positivity",    "stochastic_monotonicity", "tv_bound",
                                "slope_conservation",  "holder_exponents",   "initial_data",
                                "polymer_sampler",     "brownian_bridge",    "continuity_modulus"};
  if (id < 1 || id > kCriteria) throw Error(ErrorKind::Range, "criterion id must lie in 1..15");
  return names[id - 1];
}

Report run_criterion(int id, Profile profile, std::uint64_t seed) {
  const std::uint64_t base = seed * 0x100000ULL + static_cast<std::uint64_t>(id) * 10000000ULL;
  Report rep;
  switch (id) {
    case 1: rep = criterion_appendix(profile, base); break;
    case 2: rep = criterion_semigroup(profile, base); break;
    case 3: rep = criterion_heat_limit(profile, base); break;
    case 4: rep = criterion_chaos(profile, base); break;
    case 5: rep = criterion_scaling(profile, base); break;
    case 6: rep = criterion_symmetry(profile, base); break;
    case 7: rep = criterion_total_positivity(profile, base); break;
    case 8: rep = criterion_monotonicity(profile, base); break;
    case 9: rep = criterion_tv(profile, base); break;
    case 10: rep = criterion_slopes(profile, base); break;
    case 11: rep = criterion_holder(profile, base); break;
    case 12: rep = criterion_initial_data(profile, base); break;
    case 13: rep = criterion_sampler(profile, base); break;
    case 14: rep = criterion_bridge(profile, base); break;
    case 15: rep = criterion_continuity(profile, base); break;
    default: throw Error(ErrorKind::Range, "criterion id must lie in 1..15");
  }
  const std::string number = (id < 10 ? "0" : "") + std::to_string(id);
  rep.test_name = "criterion_" + number + "_" + criterion_name(id);
  rep.config["profile"] = profile == Profile::Fast ? "fast" : "full";
  return rep;
}

}  // namespace pam::verify
