#pragma once

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "pam/kernel.hpp"
#include "pam/solver.hpp"

namespace pam::verify {

using json = nlohmann::ordered_json;

enum class Profile { Fast, Full };

/// Outcome of one experiment. Everything in it is a pure function of the configuration.
struct Report {
  std::string test_name;
  json config = json::object();
  json statistics = json::object();
  bool pass = false;
  std::uint64_t seed_base = 0;
  std::size_t n_seeds = 0;

  [[nodiscard]] json to_json() const;
};

// ---------------------------------------------------------------------------
// Appendix C
// ---------------------------------------------------------------------------

struct AppendixRow {
  std::string lemma;
  std::string params;
  double closed_form = 0.0;  // NaN for inequalities
  double quadrature = 0.0;
  double abs_err = 0.0;      // NaN for inequalities
  double bound_slack = 0.0;  // NaN for identities without a bound
  bool ok = false;
};

/// Randomised in-domain sweeps of every Appendix-C lemma: identities compared to quadrature,
/// inequalities checked for slack.
[[nodiscard]] std::vector<AppendixRow> appendix_c_rows(std::size_t points_per_lemma, std::uint64_t seed,
                                                       double identity_tol = 1e-7);
[[nodiscard]] Report appendix_c_suite(std::size_t points_per_lemma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Symmetries
// ---------------------------------------------------------------------------

enum class SymmetryKind { Shift, ReflectTime, ReflectSpace, Negate };

[[nodiscard]] std::string to_string(SymmetryKind kind);
[[nodiscard]] SymmetryKind parse_symmetry(const std::string& name);

struct SymmetryConfig {
  double beta = 1.0;
  std::uint64_t seed = 1;
  double dx = 0.05;
  double half_width = 5.0;
  std::size_t nt = 80;
  std::size_t s_index = 10;
  std::size_t t_index = 50;
  std::int64_t shift_j = 3;
  std::int64_t shift_k = 7;
  double tol = 1e-10;
};

/// Builds the field on the grid and on the transformed grid and compares them at matching points.
[[nodiscard]] Report symmetry_test(SymmetryKind kind, const SymmetryConfig& cfg);

// ---------------------------------------------------------------------------
// Statistical experiments
// ---------------------------------------------------------------------------

struct StationarityConfig {
  double beta = 1.0;
  double horizon = 0.5;
  std::size_t n_seeds = 500;
  std::uint64_t seed_base = 1000;
  double dx = 0.05;
  double window = 2.0;  // x in [-window, window]
  std::size_t probes = 9;
};

/// Mean of Z(t, x | s, 0) across interior x: regression slope and pointwise means against 1.
[[nodiscard]] Report stationarity_test(const StationarityConfig& cfg);

struct ScalingConfig {
  double beta = 1.0;
  double t = 1.0;
  int inverse_lambda = 4;  // lambda = 1 / inverse_lambda
  std::size_t n_seeds = 10000;
  std::size_t batches = 5;
  std::uint64_t seed_base = 20000;
  double dx = 0.05;
};

/// Z_beta(t, 0 | 0, 0) against Z_{beta / sqrt(lambda)}(lambda^2 t, 0 | 0, 0) on a grid with
/// dx' = lambda dx and dt' = lambda^2 dt: means, a two-sample KS test per batch, and second moments.
[[nodiscard]] Report moment_scaling_test(const ScalingConfig& cfg);

struct GrowthConfig {
  double beta = 1.0;
  double horizon = 0.25;
  double half_width = 10.0;
  double max_separation = 1.0;
  std::size_t n_seeds = 20;
  std::uint64_t seed_base = 40000;
  double dx = 0.05;
};

/// Max of Z / (1 + |x|^4 + |y|^4) and of its inverse over the window, then over the doubled window.
[[nodiscard]] Report growth_bound_test(const GrowthConfig& cfg);

enum class HolderDirection { Space, Time, Beta };

[[nodiscard]] std::string to_string(HolderDirection d);

struct HolderConfig {
  HolderDirection direction = HolderDirection::Space;
  double beta = 1.0;
  double horizon = 0.5;  // t - s, at least 0.1
  std::size_t n_seeds = 100;
  std::uint64_t seed_base = 60000;
  double dx = 0.05;
  double dt_ratio = 0.125;   // dt = dt_ratio * dx^2; small values damp the per-cell noise floor
  std::vector<double> lags;  // cells, steps, or beta increments; defaults per direction when empty
};

struct HolderEstimate {
  HolderDirection direction = HolderDirection::Space;
  double exponent_hat = 0.0;
  double r_squared = 0.0;
  double octaves = 0.0;
  std::vector<double> lags;  // in physical units
  std::vector<double> rms;
};

/// Log-log regression of RMS increments of the normalized field against the lag.
[[nodiscard]] HolderEstimate holder_exponent_estimate(const HolderConfig& cfg);

struct ContinuityConfig {
  double beta = 1.0;
  double horizon = 1.0;
  std::uint64_t seed = 80000;
  double dx = 0.05;
  double half_width = 10.0;
  double window = 2.0;  // sup terms read on [-window, window]
  std::size_t terms = 5;
};

/// d_CICM between the solution from each member of a sequence and the solution from the limit.
[[nodiscard]] std::vector<double> continuity_modulus(const NoiseGrid& grid, double beta, std::size_t s_index,
                                                     std::size_t t_index, const std::vector<MeasureIC>& sequence,
                                                     const MeasureIC& limit, double x_lo, double x_hi);
/// Cell-integrated unit hat of half-width `width` centred at x = 0.
[[nodiscard]] MeasureIC mollified_delta(const Geometry& g, double width);
/// Mollified deltas of widths 16 dx 2^-n, n = 1..terms, against the point mass at 0.
[[nodiscard]] Report continuity_modulus_test(const ContinuityConfig& cfg);

struct LyapunovConfig {
  double beta = 1.0;
  std::vector<double> times = {2.0, 4.0, 8.0};
  double dx = 0.1;
  double target = 0.5;  // quoted long-time rate for p = 2
};

/// Exact discrete E[Z(t,0|0,0)^2] from the moment recursion M <- (H M H^T) o (1 + (e^(beta^2 dt/dx) - 1) I),
/// reported as t^-1 log of it. Slow; passes when the last rate is within a factor of 2 of the target.
[[nodiscard]] Report lyapunov_trend_check(const LyapunovConfig& cfg);

// ---------------------------------------------------------------------------
// Acceptance criteria
// ---------------------------------------------------------------------------

inline constexpr int kCriteria = 15;

[[nodiscard]] std::string criterion_name(int id);
/// Runs criterion `id` (1..15) at the sizes of `profile`; `seed` offsets every seed the criterion uses.
[[nodiscard]] Report run_criterion(int id, Profile profile, std::uint64_t seed = 0);

}  // namespace pam::verify
