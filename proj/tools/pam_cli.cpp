// pam: noise, solve, chaos, polymer, verify and report subcommands.
//
// Exit codes: 0 when every requested contract holds, 1 on a contract failure (JSON detail on
// stderr), 2 on a usage error. Every artifact carries the run configuration; no timestamps are
// written, so identical invocations give identical bytes.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pam/chaos.hpp"
#include "pam/error.hpp"
#include "pam/io.hpp"
#include "pam/kernel.hpp"
#include "pam/parallel.hpp"
#include "pam/philox.hpp"
#include "pam/polymer.hpp"
#include "pam/solver.hpp"
#include "pam/stats.hpp"
#include "pam/verify.hpp"

namespace {

using json = pam::verify::json;
using pam::io::format_double;

constexpr int kExitContract = 1;
constexpr int kExitUsage = 2;

/// Raised by a subcommand whose artifacts were written but whose contract did not hold.
struct ContractFailure {
  json detail;
};

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Every option of the parsed subcommand chain, given or defaulted, in declaration order.
json run_config(const CLI::App& app) {
  json cfg = json::object();
  std::string path;
  const CLI::App* cur = &app;
  json options = json::object();
  while (cur != nullptr) {
    for (const CLI::Option* opt : cur->get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        if (opt->get_multi_option_policy() != CLI::MultiOptionPolicy::TakeAll) {
          options[name] = res.back();
        } else {
          options[name] = res;
        }
      } else {
        options[name] = opt->get_default_str();
      }
    }
    for (const CLI::Option* opt : cur->get_options()) {
      if (opt->get_positional() && !opt->get_name().empty() && opt->count() > 0) {
        options[opt->get_name()] = opt->results().front();
      }
    }
    const auto subs = cur->get_subcommands();
    if (subs.empty()) break;
    cur = subs.front();
    path += (path.empty() ? "" : " ") + cur->get_name();
  }
  cfg["subcommand"] = path;
  cfg["options"] = options;
  return cfg;
}

std::string config_line(const json& cfg) { return "run_config " + cfg.dump(); }

/// Writes `text` to `path`, or to stdout when the path is "-".
void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
  } else {
    pam::io::write_file(path, text);
  }
}

// ---------------------------------------------------------------------------
// Shared geometry and measure options
// ---------------------------------------------------------------------------

struct GridOptions {
  std::uint64_t seed = 1;
  double dx = 0.05;
  double dt_ratio = 0.5;  // dt = dt_ratio * dx^2
  double half_width = 20.0;
  double s = 0.0;
  double t = 1.0;

  void add(CLI::App* sub, double default_dx, double default_half_width, double default_s, double default_t) {
    dx = default_dx;
    half_width = default_half_width;
    s = default_s;
    t = default_t;
    sub->add_option("--seed", seed, "noise seed (default from PAM_SEED, else 1)")->envname("PAM_SEED");
    sub->add_option("--dx", dx, "space mesh width")->check(CLI::PositiveNumber);
    sub->add_option("--dt-ratio", dt_ratio, "dt as a multiple of dx^2 (at most 0.5)")->check(CLI::PositiveNumber);
    sub->add_option("--half-width", half_width, "domain is [-half-width, half-width]")->check(CLI::PositiveNumber);
    sub->add_option("--s", s, "start time");
    sub->add_option("--t", t, "end time");
  }

  [[nodiscard]] pam::Geometry geometry() const {
    if (!(t > s)) throw Usage("--t must exceed --s");
    const pam::Geometry g = pam::Geometry::centered(half_width, dx, t - s, dt_ratio * dx * dx, s);
    pam::check_stability(g);
    return g;
  }
};

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Usage("bad number in " + what + ": '" + text + "'");
  }
}

/// "delta:x", "lebesgue" or "file:path". A file is a CSV with header x,density (interpolated
/// linearly onto cell centres, zero outside its range) or x,mass (point masses).
pam::MeasureIC parse_measure(const std::string& spec, const pam::Geometry& g) {
  if (spec == "lebesgue") return pam::MeasureIC::lebesgue(g);
  if (spec.rfind("delta:", 0) == 0) return pam::MeasureIC::delta(parse_number(spec.substr(6), "delta"));
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream in(spec.substr(5));
    if (!in) throw pam::Error(pam::ErrorKind::Io, "cannot open " + spec.substr(5));
    const auto rows = pam::io::read_csv(in);
    if (rows.size() < 2 || rows.front().size() < 2 || rows.front()[0] != "x") {
      throw Usage("measure file needs a header x,density or x,mass");
    }
    const std::string kind = rows.front()[1];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 2) throw Usage("short row in measure file");
      pts.emplace_back(parse_number(rows[i][0], "x"), parse_number(rows[i][1], kind));
    }
    pam::MeasureIC m;
    if (kind == "mass") {
      m.atoms = pts;
    } else if (kind == "density") {
      std::sort(pts.begin(), pts.end());
      m.density.assign(g.nx, 0.0);
      for (std::size_t k = 0; k < g.nx; ++k) {
        const double x = g.x(k);
        auto hi = std::lower_bound(pts.begin(), pts.end(), x, [](const auto& p, double v) { return p.first < v; });
        if (hi == pts.end() || hi == pts.begin()) {
          if (hi != pts.end() && hi->first == x) m.density[k] = hi->second;
          continue;
        }
        const auto lo = hi - 1;
        const double w = (x - lo->first) / (hi->first - lo->first);
        m.density[k] = (1.0 - w) * lo->second + w * hi->second;
      }
    } else {
      throw Usage("measure file column must be density or mass, got " + kind);
    }
    m.validate(g);
    return m;
  }
  throw Usage("measure spec must be delta:x, lebesgue or file:path, got '" + spec + "'");
}

pam::Endpoint parse_endpoint(const std::string& spec, const pam::Geometry& g) {
  if (spec.rfind("point:", 0) == 0) return pam::Endpoint::at(parse_number(spec.substr(6), "point"));
  return pam::Endpoint::spread(parse_measure(spec, g));
}

// ---------------------------------------------------------------------------
// noise
// ---------------------------------------------------------------------------

struct NoiseOptions {
  GridOptions grid;
  std::string transform = "none";
  std::string out = "noise.csv";
  std::string binary;
};

pam::NoiseGrid apply_transform(const pam::NoiseGrid& grid, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "none") return grid;
  if (name == "negate") return grid.negate();
  if (name == "reflect_time") return grid.reflect_time();
  if (name == "reflect_space") return grid.reflect_space();
  if (name == "shift") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw Usage("shift needs shift:dj,dk");
    return grid.shift(std::llround(parse_number(arg.substr(0, comma), "shift")),
                      std::llround(parse_number(arg.substr(comma + 1), "shift")));
  }
  if (name == "dilate") return grid.dilate_by(parse_number(arg, "dilate"));
  if (name == "shear") return grid.shear_by(parse_number(arg, "shear"));
  throw Usage("unknown transform '" + spec + "'");
}

json run_noise(const NoiseOptions& o, const json& cfg) {
  const pam::Geometry g = o.grid.geometry();
  const pam::NoiseGrid grid = apply_transform(pam::NoiseGrid::generate(o.grid.seed, g), o.transform);
  const pam::Geometry& gg = grid.geometry();

  std::ostringstream csv;
  pam::io::CsvWriter w(csv);
  w.comment(config_line(cfg));
  w.header({"j", "k", "t", "x", "xi"});
  for (std::size_t j = 0; j < gg.nt; ++j) {
    for (std::size_t k = 0; k < gg.nx; ++k) {
      w.row({std::to_string(j), std::to_string(k), format_double(gg.t(j) + 0.5 * gg.dt), format_double(gg.x(k)),
             format_double(grid.xi(j, k))});
    }
  }
  emit(o.out, csv.str());
  if (!o.binary.empty()) {
    grid.dump(o.binary);
    pam::io::write_file(o.binary + ".json", cfg.dump(2) + "\n");
  }

  const auto s = pam::stats::summarize(grid.values());
  return {{"cells", grid.values().size()}, {"mean", s.mean}, {"variance", s.variance}};
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveOptions {
  GridOptions grid;
  double beta = 1.0;
  std::string ic = "delta:0";
  std::size_t frames = 1;
  std::string out = "field.csv";
  std::string svg;
};


json run_solve(const SolveOptions& o, const json& cfg) {
  if (o.frames == 0) throw Usage("--frames must be positive");
  const pam::Geometry g = o.grid.geometry();
  const pam::NoiseGrid grid = pam::NoiseGrid::generate(o.grid.seed, g);
  const pam::MeasureIC mu = parse_measure(o.ic, g);
  mu.validate(g);
  const bool point_start = o.ic.rfind("delta:", 0) == 0;
  const double y = point_start ? g.x(g.space_index(mu.atoms.front().first)) : 0.0;

  std::vector<std::size_t> levels;
  for (std::size_t f = 1; f <= o.frames; ++f) {
    levels.push_back(std::max<std::size_t>(1, (f * g.nt + o.frames - 1) / o.frames));
  }
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::ostringstream csv;
  pam::io::CsvWriter w(csv);
  w.comment(config_line(cfg));
  w.header({"t", "x", "y", "Z", "sZ"});

  std::vector<double> u = mu.cell_masses(g);
  std::vector<double> heat = u;
  std::vector<std::vector<double>> log_rows;
  std::vector<double> last_x;
  std::vector<double> last_h;
  double heat_err = 0.0;
  std::size_t from = 0;
  for (std::size_t level : levels) {
    pam::propagate(grid, o.beta, from, level, u);
    if (!point_start) pam::propagate(grid, 0.0, from, level, heat);
    from = level;
    const double tau = g.t(level) - g.t_min;
    std::vector<double> logs(g.nx);
    last_x.clear();
    last_h.clear();
    heat_err = 0.0;
    for (std::size_t k = 0; k < g.nx; ++k) {
      const double z = u[k] / g.dx;
      const double ref = point_start ? pam::rho(tau, g.x(k) - y) : heat[k] / g.dx;
      const double sz = ref > 0.0 ? z / ref : std::nan("");
      w.row({format_double(g.t(level)), format_double(g.x(k)), point_start ? format_double(y) : "",
             format_double(z), format_double(sz)});
      logs[k] = z > 0.0 ? std::log(z) : std::nan("");
      if (std::fabs(g.x(k)) <= 0.5 * o.grid.half_width) {
        last_x.push_back(g.x(k));
        last_h.push_back(logs[k]);
      }
      if (point_start && std::fabs(g.x(k) - y) <= 3.0 * std::sqrt(tau)) {
        heat_err = std::max(heat_err, std::fabs(sz - 1.0));
      }
    }
    log_rows.push_back(std::move(logs));
  }
  emit(o.out, csv.str());

  if (!o.svg.empty()) {
    std::ostringstream svg;
    if (log_rows.size() > 1) {
      pam::io::svg_heatmap(svg, log_rows, g.x_lo(), g.x_hi(), g.t(levels.front()), g.t(levels.back()),
                           "log Z(t, x)", cfg.dump());
    } else {
      pam::io::svg_lines(svg, {{"h = log Z", last_x, last_h}}, "KPZ profile at t = " + format_double(g.t_max()),
                         "x", "h", cfg.dump());
    }
    pam::io::write_file(o.svg, svg.str());
  }

  json summary = {{"levels", levels.size()}, {"cells", g.nx}, {"dt", g.dt}};
  if (point_start && o.beta == 0.0) {
    // Deterministic case: the field should be the heat kernel on the interior.
    summary["heat_kernel_max_rel_err"] = heat_err;
    if (g.t_max() - g.t_min >= 0.1) {
      summary["heat_kernel_within_2pct"] = heat_err <= 0.02;
      if (heat_err > 0.02) throw ContractFailure{summary};
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// chaos
// ---------------------------------------------------------------------------

struct ChaosOptions {
  GridOptions grid;
  int K = 3;
  double beta = 0.25;
  double x = 0.0;
  double y = 0.0;
  std::size_t seeds = 20;
  std::string out = "chaos.csv";
};

json run_chaos(const ChaosOptions& o, const json& cfg) {
  if (o.K < 0 || o.K > pam::kMaxChaosOrder) throw Usage("--K must lie in 0..3");
  if (o.seeds == 0) throw Usage("--seeds must be positive");
  const pam::Geometry g = o.grid.geometry();
  const pam::ChaosEndpoints at{0, g.space_index(o.y), g.nt, g.space_index(o.x)};

  struct PerSeed {
    std::vector<double> terms;
    double solver = 0.0;
  };
  std::vector<PerSeed> results(o.seeds);
  pam::parallel_for(o.seeds, [&](std::size_t i) {
    const pam::NoiseGrid grid = pam::NoiseGrid::generate(o.grid.seed + i, g);
    for (const auto& term : pam::chaos_terms(grid, o.K, at)) results[i].terms.push_back(term.value);
    results[i].solver = pam::normalized_value(grid, o.beta, at.s_index, at.t_index, at.x_cell, at.y_cell);
  });

  std::ostringstream csv;
  pam::io::CsvWriter w(csv);
  w.comment(config_line(cfg));
  w.header({"seed", "k", "term", "partial_sum", "solver_sZ", "diff"});
  std::vector<double> final_diffs;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    double partial = 0.0;
    double power = 1.0;
    for (std::size_t k = 0; k < results[i].terms.size(); ++k) {
      partial += power * results[i].terms[k];
      power *= o.beta;
      const double diff = partial - results[i].solver;
      w.row({std::to_string(o.grid.seed + i), std::to_string(k), format_double(results[i].terms[k]),
             format_double(partial), format_double(results[i].solver), format_double(diff)});
      if (k + 1 == results[i].terms.size()) final_diffs.push_back(diff);
    }
  }
  emit(o.out, csv.str());

  double ss = 0.0;
  for (double d : final_diffs) ss += d * d;
  return {{"seeds", o.seeds}, {"K", o.K}, {"rms_diff", std::sqrt(ss / static_cast<double>(final_diffs.size()))}};
}

// ---------------------------------------------------------------------------
// polymer
// ---------------------------------------------------------------------------

struct PolymerOptions {
  GridOptions grid;
  double beta = 1.0;
  std::string start = "point:0";
  std::string end = "lebesgue";
  // sample
  std::size_t n = 10000;
  std::size_t stride = 4;
  std::uint64_t path_seed = 1;
  std::size_t bundle = 50;
  std::string svg;
  // check
  std::string check;
  double y1 = -0.5;
  double y2 = 0.5;
  double r = -1.0;  // negative: midpoint
  std::size_t points = 3;
  std::size_t trials = 200;
  std::size_t samples = 4000;
  std::string out;
};

pam::PolymerSpec polymer_spec(const PolymerOptions& o, const pam::Geometry& g) {
  pam::PolymerSpec spec;
  spec.beta = o.beta;
  spec.s_index = 0;
  spec.t_index = g.nt;
  spec.start = parse_endpoint(o.start, g);
  spec.end = parse_endpoint(o.end, g);
  return spec;
}

json run_polymer_sample(const PolymerOptions& o, const json& cfg) {
  if (o.n == 0 || o.stride == 0) throw Usage("--n and --stride must be positive");
  const pam::Geometry g = o.grid.geometry();
  const pam::NoiseGrid grid = pam::NoiseGrid::generate(o.grid.seed, g);
  const pam::PolymerSampler sampler(grid, polymer_spec(o, g), o.stride);

  std::vector<pam::PolymerPath> paths(o.n);
  pam::parallel_for(o.n, [&](std::size_t i) { paths[i] = sampler.sample(o.path_seed, i); });

  std::ostringstream csv;
  pam::io::CsvWriter w(csv);
  w.comment(config_line(cfg));
  w.header({"path_id", "time", "position"});
  std::vector<double> ends;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t m = 0; m < paths[i].times.size(); ++m) {
      w.row({std::to_string(i), format_double(paths[i].times[m]), format_double(paths[i].positions[m])});
    }
    ends.push_back(paths[i].positions.back());
  }
  emit(o.out.empty() ? "paths.csv" : o.out, csv.str());

  if (!o.svg.empty()) {
    std::vector<pam::io::Series> bundle;
    for (std::size_t i = 0; i < std::min(o.bundle, paths.size()); ++i) {
      bundle.push_back({"path " + std::to_string(i), paths[i].times, paths[i].positions});
    }
    std::ostringstream svg;
    pam::io::svg_lines(svg, bundle, "polymer paths", "time", "position", cfg.dump());
    pam::io::write_file(o.svg, svg.str());
  }
  const auto s = pam::stats::summarize(ends);
  return {{"paths", o.n}, {"points_per_path", paths.front().times.size()}, {"end_mean", s.mean},
          {"end_variance", s.variance}};
}

json run_polymer_check(const PolymerOptions& o, const json& cfg) {
  const pam::Geometry g = o.grid.geometry();
  const pam::NoiseGrid grid = pam::NoiseGrid::generate(o.grid.seed, g);
  const std::size_t r_index = o.r < 0.0 ? g.nt / 2 : g.time_index(o.r);
  const pam::MeasureIC zeta =
      o.end.rfind("point:", 0) == 0 ? pam::MeasureIC::delta(parse_number(o.end.substr(6), "point")) : parse_measure(o.end, g);
  json result = {{"check", o.check}, {"run_config", cfg}};
  bool pass = false;

  if (o.check == "km") {
    if (o.points < 1 || o.points > pam::kMaxDeterminantSize) throw Usage("--points must lie in 1..6");
    const pam::Propagator prop = pam::green_field(grid, o.beta, 0, g.nt);
    pam::UniformStream rng(o.path_seed, 0);
    const double gap = 0.25;
    const double span = std::min(1.5, 0.5 * o.grid.half_width);
    auto draw = [&] {
      std::vector<double> u(o.points);
      for (double& v : u) v = -span + (2.0 * span - gap * static_cast<double>(o.points - 1)) * rng.next();
      std::sort(u.begin(), u.end());
      for (std::size_t i = 0; i < o.points; ++i) u[i] = g.x(g.space_index(u[i] + gap * static_cast<double>(i)));
      return u;
    };
    double min_det = INFINITY;
    std::size_t nonpositive = 0;
    for (std::size_t trial = 0; trial < o.trials; ++trial) {
      const auto ys = draw();
      const auto xs = draw();
      const double det = pam::km_determinant(prop, ys, xs);
      min_det = std::min(min_det, det);
      if (!(det > 0.0)) ++nonpositive;
    }
    pass = nonpositive == 0;
    result["statistics"] = {{"trials", o.trials}, {"points", o.points}, {"min_determinant", min_det},
                            {"nonpositive", nonpositive}};
  } else if (o.check == "dominance") {
    const auto rep = pam::stochastic_dominance_check(grid, o.beta, 0, g.nt, o.y1, o.y2, zeta, r_index);
    pass = rep.dominated;
    result["statistics"] = {{"y1", o.y1}, {"y2", o.y2}, {"r", g.t(r_index)}, {"max_excess", rep.max_excess},
                            {"dominated", rep.dominated}};
  } else if (o.check == "tv") {
    const auto pair1 = std::make_pair(pam::MeasureIC::delta(o.y1), zeta);
    const auto pair2 = std::make_pair(pam::MeasureIC::delta(o.y2), zeta);
    const auto rep = pam::tv_bound_check(grid, o.beta, 0, g.nt, pair1, pair2, {r_index});
    pass = rep.satisfied;
    result["statistics"] = {{"tv_lhs", rep.tv_lhs}, {"bound_rhs", rep.bound_rhs}, {"slack", rep.slack()},
                            {"bound_terms", rep.bound_terms}, {"satisfied", rep.satisfied}};
  } else if (o.check == "nonintersect") {
    const std::vector<double> ys = {o.y1, o.y2};
    const double lo = std::min(o.y1, o.y2);
    const double hi = std::max(o.y1, o.y2);
    const double mid = 0.5 * (lo + hi);
    const double gap = 0.25 * g.dx;
    const std::vector<std::pair<double, double>> boxes = {{lo - 1.0, mid - gap}, {mid + gap, hi + 1.0}};
    const auto rep = pam::non_intersection_check(grid, o.beta, 0, r_index, g.nt, ys, zeta, boxes, o.samples,
                                                 o.path_seed);
    pass = rep.agree || rep.expected_mismatch;
    result["statistics"] = {{"determinant_formula", rep.determinant_formula}, {"monte_carlo", rep.monte_carlo},
                            {"stderr", rep.stderr_mc}, {"samples", rep.samples},
                            {"expected_mismatch", rep.expected_mismatch}, {"agree", rep.agree}};
  } else {
    throw Usage("check must be km, dominance, tv or nonintersect");
  }
  result["pass"] = pass;
  emit(o.out.empty() ? "report.json" : o.out, result.dump(2) + "\n");
  if (!pass) throw ContractFailure{result};
  return result["statistics"];
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t points = 100;
  std::string profile = "fast";
  std::vector<int> ids;
  std::string out;
};

pam::verify::Profile parse_profile(const std::string& name) {
  if (name == "fast") return pam::verify::Profile::Fast;
  if (name == "full") return pam::verify::Profile::Full;
  throw Usage("--profile must be fast or full");
}

json run_appendix(const VerifyOptions& o, const json& cfg) {
  const auto rows = pam::verify::appendix_c_rows(o.points, o.seed);
  std::ostringstream csv;
  pam::io::CsvWriter w(csv);
  w.comment(config_line(cfg));
  w.header({"lemma_id", "params", "closed_form", "quadrature", "abs_err", "bound_slack"});
  json failed = json::array();
  for (const auto& row : rows) {
    w.row({row.lemma, row.params, format_double(row.closed_form), format_double(row.quadrature),
           format_double(row.abs_err), format_double(row.bound_slack)});
    if (!row.ok) failed.push_back({{"lemma_id", row.lemma}, {"params", row.params}});
  }
  emit(o.out.empty() ? "appendix_c.csv" : o.out, csv.str());
  json summary = {{"rows", rows.size()}, {"failed", failed}};
  if (!failed.empty()) throw ContractFailure{summary};
  return summary;
}

json run_criteria(const VerifyOptions& o, const json& cfg, std::vector<int> ids) {
  const auto profile = parse_profile(o.profile);
  for (int id : ids) {
    if (id < 1 || id > pam::verify::kCriteria) throw Usage("criterion ids run from 1 to 15");
  }
  json tests = json::array();
  json failed = json::array();
  for (int id : ids) {
    const auto rep = pam::verify::run_criterion(id, profile, o.seed);
    std::cerr << (rep.pass ? "PASS " : "FAIL ") << rep.test_name << '\n';
    if (!rep.pass) failed.push_back(rep.test_name);
    tests.push_back(rep.to_json());
  }
  const json report = {{"run_config", cfg}, {"tests", tests}, {"pass", failed.empty()}};
  emit(o.out.empty() ? "report.json" : o.out, report.dump(2) + "\n");
  json summary = {{"tests", ids.size()}, {"failed", failed}};
  if (!failed.empty()) throw ContractFailure{summary};
  return summary;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOptions {
  std::string verify;
  std::string field;
  std::string paths;
  std::string out = "-";
  std::string svg;
};

std::vector<std::vector<std::string>> read_table(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw pam::Error(pam::ErrorKind::Io, "cannot open " + path);
  auto rows = pam::io::read_csv(in);
  if (rows.empty() || rows.front().size() < header.size() ||
      !std::equal(header.begin(), header.end(), rows.front().begin())) {
    throw Usage(path + " does not have the expected columns");
  }
  rows.erase(rows.begin());
  return rows;
}

json run_report(const ReportOptions& o, const json& cfg) {
  const int given = !o.verify.empty() + !o.field.empty() + !o.paths.empty();
  if (given != 1) throw Usage("report needs exactly one of --verify, --field, --paths");

  if (!o.verify.empty()) {
    std::ifstream in(o.verify);
    if (!in) throw pam::Error(pam::ErrorKind::Io, "cannot open " + o.verify);
    json report;
    try {
      report = json::parse(in);
    } catch (const std::exception& e) {
      throw Usage(o.verify + ": " + e.what());
    }
    const json& tests = report.contains("tests") ? report["tests"] : report;
    std::ostringstream md;
    md << "| test | pass | seeds |\n|---|---|---|\n";
    json failed = json::array();
    for (const auto& t : tests) {
      const bool pass = t.value("pass", false);
      md << "| " << t.value("test_name", "?") << " | " << (pass ? "yes" : "no") << " | "
         << t["seeds"].value("count", 0) << " |\n";
      if (!pass) failed.push_back(t.value("test_name", "?"));
    }
    emit(o.out, md.str());
    json summary = {{"tests", tests.size()}, {"failed", failed}};
    if (!failed.empty()) throw ContractFailure{summary};
    return summary;
  }

  if (o.svg.empty()) throw Usage("--svg is required with --field or --paths");
  std::ostringstream svg;
  if (!o.field.empty()) {
    // One heatmap row per time level, log Z against x.
    const auto rows = read_table(o.field, {"t", "x", "y", "Z", "sZ"});
    std::map<double, std::map<double, double>> grid;
    for (const auto& r : rows) {
      const double z = parse_number(r[3], "Z");
      grid[parse_number(r[0], "t")][parse_number(r[1], "x")] = z > 0.0 ? std::log(z) : std::nan("");
    }
    if (grid.empty()) throw Usage(o.field + " has no rows");
    std::vector<std::vector<double>> heat;
    for (const auto& [t, row] : grid) {
      heat.emplace_back();
      for (const auto& [x, v] : row) heat.back().push_back(v);
    }
    const auto& first = grid.begin()->second;
    pam::io::svg_heatmap(svg, heat, first.begin()->first, first.rbegin()->first, grid.begin()->first,
                         grid.rbegin()->first, "log Z(t, x) from " + o.field, cfg.dump());
  } else {
    const auto rows = read_table(o.paths, {"path_id", "time", "position"});
    std::map<std::string, pam::io::Series> series;
    for (const auto& r : rows) {
      auto& s = series[r[0]];
      s.label = "path " + r[0];
      s.x.push_back(parse_number(r[1], "time"));
      s.y.push_back(parse_number(r[2], "position"));
    }
    std::vector<pam::io::Series> bundle;
    for (auto& [id, s] : series) {
      if (bundle.size() == 50) break;
      bundle.push_back(std::move(s));
    }
    pam::io::svg_lines(svg, bundle, "polymer paths from " + o.paths, "time", "position", cfg.dump());
  }
  pam::io::write_file(o.svg, svg.str());
  return {{"svg", o.svg}};
}

// ---------------------------------------------------------------------------
// Argument handling
// ---------------------------------------------------------------------------

/// Pulls "--config path" out of the arguments and splices its key=value pairs in right after the
/// subcommand words, so any flag given on the command line comes later and wins.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw Usage("--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  std::map<std::string, std::string> kv;
  try {
    kv = pam::io::parse_config_file(*path);
  } catch (const pam::Error& e) {
    throw Usage(e.what());
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : kv) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    injected.push_back("--" + name);
    injected.push_back(value);
  }
  std::size_t words = 0;
  while (words < args.size() && args[words].rfind('-', 0) != 0) ++words;
  // A subcommand word followed by a positional (polymer check km) stays ahead of the splice.
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(words), injected.begin(), injected.end());
  return args;
}

void fail_json(const std::string& kind, const json& detail) {
  json out = {{"error", kind}, {"detail", detail}};
  std::cerr << out.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic Anderson model: simulation and verification"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.footer("--config path reads key=value lines; flags on the command line override them.\n"
             "PAM_SEED sets the default noise seed.");

  NoiseOptions noise;
  auto* noise_cmd = app.add_subcommand("noise", "generate discrete space-time white noise");
  noise.grid.add(noise_cmd, 0.05, 5.0, 0.0, 0.25);
  noise_cmd->add_option("--transform", noise.transform,
                        "none | negate | reflect_time | reflect_space | shift:dj,dk | dilate:m | shear:q");
  noise_cmd->add_option("--out", noise.out, "CSV of cells (j, k, t, x, xi); '-' for stdout");
  noise_cmd->add_option("--binary", noise.binary, "also write the binary grid (config goes to <path>.json)");

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "discrete Green field from an initial measure");
  solve.grid.add(solve_cmd, 0.05, 20.0, 0.0, 1.0);
  solve_cmd->add_option("--beta", solve.beta, "noise strength");
  solve_cmd->add_option("--ic", solve.ic, "delta:x | lebesgue | file:path");
  solve_cmd->add_option("--frames", solve.frames, "number of output time levels, evenly spaced up to t");
  solve_cmd->add_option("--out", solve.out, "CSV with columns t, x, y, Z, sZ");
  solve_cmd->add_option("--svg", solve.svg, "heatmap (several frames) or KPZ profile (one frame)");

  ChaosOptions chaos;
  auto* chaos_cmd = app.add_subcommand("chaos", "chaos expansion against the solver");
  chaos.grid.add(chaos_cmd, 0.1, 3.0, 0.0, 0.25);
  chaos_cmd->add_option("--K", chaos.K, "highest chaos order (at most 3)");
  chaos_cmd->add_option("--beta", chaos.beta, "noise strength");
  chaos_cmd->add_option("--x", chaos.x, "end point");
  chaos_cmd->add_option("--y", chaos.y, "start point");
  chaos_cmd->add_option("--seeds", chaos.seeds, "number of consecutive seeds starting at --seed");
  chaos_cmd->add_option("--out", chaos.out, "CSV with columns seed, k, term, partial_sum, solver_sZ, diff");

  PolymerOptions polymer;
  auto* polymer_cmd = app.add_subcommand("polymer", "directed polymer sampling and checks");
  polymer_cmd->require_subcommand(1);
  auto* sample_cmd = polymer_cmd->add_subcommand("sample", "sample polymer paths");
  auto* check_cmd = polymer_cmd->add_subcommand("check", "exact polymer checks");
  for (auto* cmd : {sample_cmd, check_cmd}) {
    cmd->add_option("--beta", polymer.beta, "noise strength");
    cmd->add_option("--start", polymer.start, "point:x | delta:x | lebesgue | file:path");
    cmd->add_option("--end", polymer.end, "point:x | delta:x | lebesgue | file:path");
    cmd->add_option("--path-seed", polymer.path_seed, "seed of the path sampler");
    cmd->add_option("--out", polymer.out, "output path");
  }
  polymer.grid.add(sample_cmd, 0.1, 3.0, 0.0, 0.5);
  sample_cmd->add_option("--n", polymer.n, "number of paths");
  sample_cmd->add_option("--stride", polymer.stride, "record every stride-th time level");
  sample_cmd->add_option("--bundle", polymer.bundle, "paths drawn in the SVG");
  sample_cmd->add_option("--svg", polymer.svg, "path bundle plot");
  GridOptions check_grid;
  check_grid.add(check_cmd, 0.1, 3.0, 0.0, 0.5);
  check_cmd->add_option("kind", polymer.check, "km | dominance | tv | nonintersect")->required();
  check_cmd->add_option("--y1", polymer.y1, "first start point");
  check_cmd->add_option("--y2", polymer.y2, "second start point");
  check_cmd->add_option("--r", polymer.r, "intermediate time (default: midpoint)");
  check_cmd->add_option("--points", polymer.points, "determinant size for km");
  check_cmd->add_option("--trials", polymer.trials, "random determinants for km");
  check_cmd->add_option("--samples", polymer.samples, "Monte Carlo paths for nonintersect");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "verification suites");
  verify_cmd->require_subcommand(1);
  auto* appendix_cmd = verify_cmd->add_subcommand("appendix-c", "closed-form integrals against quadrature");
  auto* all_cmd = verify_cmd->add_subcommand("all", "every acceptance criterion");
  auto* criterion_cmd = verify_cmd->add_subcommand("criterion", "selected acceptance criteria");
  for (auto* cmd : {appendix_cmd, all_cmd, criterion_cmd}) {
    cmd->add_option("--seed", verify.seed, "seed offset (default from PAM_SEED, else 0)")->envname("PAM_SEED");
    cmd->add_option("--out", verify.out, "output path");
  }
  appendix_cmd->add_option("--points", verify.points, "random parameter sets per lemma");
  for (auto* cmd : {all_cmd, criterion_cmd}) {
    cmd->add_option("--profile", verify.profile, "fast | full")->check(CLI::IsMember({"fast", "full"}));
  }
  criterion_cmd->add_option("--id", verify.ids, "criterion number, 1 to 15 (repeatable)")->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "summaries and figures from earlier artifacts");
  report_cmd->add_option("--verify", report.verify, "report.json from verify all or criterion");
  report_cmd->add_option("--field", report.field, "field.csv from solve");
  report_cmd->add_option("--paths", report.paths, "paths.csv from polymer sample");
  report_cmd->add_option("--out", report.out, "markdown summary for --verify; '-' for stdout");
  report_cmd->add_option("--svg", report.svg, "figure for --field or --paths");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Usage& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const json cfg = run_config(app);
    json summary;
    if (noise_cmd->parsed()) {
      summary = run_noise(noise, cfg);
    } else if (solve_cmd->parsed()) {
      summary = run_solve(solve, cfg);
    } else if (chaos_cmd->parsed()) {
      summary = run_chaos(chaos, cfg);
    } else if (sample_cmd->parsed()) {
      summary = run_polymer_sample(polymer, cfg);
    } else if (check_cmd->parsed()) {
      polymer.grid = check_grid;
      summary = run_polymer_check(polymer, cfg);
    } else if (appendix_cmd->parsed()) {
      summary = run_appendix(verify, cfg);
    } else if (all_cmd->parsed()) {
      std::vector<int> ids;
      for (int id = 1; id <= pam::verify::kCriteria; ++id) ids.push_back(id);
      summary = run_criteria(verify, cfg, ids);
    } else if (criterion_cmd->parsed()) {
      summary = run_criteria(verify, cfg, verify.ids);
    } else if (report_cmd->parsed()) {
      summary = run_report(report, cfg);
    }
    std::cerr << summary.dump() << '\n';
    return 0;
  } catch (const Usage& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractFailure& f) {
    fail_json("contract-failure", f.detail);
    return kExitContract;
  } catch (const pam::Error& e) {
    if (e.kind() == pam::ErrorKind::Configuration || e.kind() == pam::ErrorKind::InvalidGeometry) {
      std::cerr << "usage error: " << e.what() << '\n';
      return kExitUsage;
    }
    fail_json(std::string(pam::to_string(e.kind())), e.what());
    return kExitContract;
  } catch (const std::exception& e) {
    fail_json("internal", e.what());
    return kExitContract;
  }
}
