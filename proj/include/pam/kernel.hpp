#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pam {

/// Gaussian density with variance t; zero for t <= 0.
[[nodiscard]] double rho(double t, double x) noexcept;
/// log rho(t, x); -inf for t <= 0.
[[nodiscard]] double log_rho(double t, double x) noexcept;

enum class LemmaId {
  Int2,           // space integral of the squared normalised kernels
  Int1,           // its time integral
  Int3,           // squared kernels against t+h, time range (0, t)
  Int4bd,         // same integrand, time range (t, t+h)
  Xybd,           // two space points, same time
  XybdCorollary,  // squared difference, two space points
  Diffhspace,     // space integral of the cross term, two times
  Withgap,        // time integral of the cross term away from 0
  Near0,          // squared difference, t close to 0
  Nogap,          // squared difference, all t
};

[[nodiscard]] std::string_view to_string(LemmaId id) noexcept;
/// Accepts the labels "lem:int2", ..., "corollary_after_xybd", "prop:nogap".
[[nodiscard]] LemmaId parse_lemma_id(std::string_view label);
[[nodiscard]] bool is_identity(LemmaId id) noexcept;
[[nodiscard]] const std::vector<LemmaId>& all_lemmas();

/// Parameters used by the lemmas; unused fields are ignored.
struct LemmaParams {
  double t = 1.0;
  double r = 0.5;
  double h = 0.0;
  double x = 0.0;
  double y = 0.0;
  double delta = 0.0;  // 0 disables the gap variant of prop:nogap
  double T = 2.0;
  double K = 2.0;
  double alpha = 1.0;

  [[nodiscard]] std::string describe(LemmaId id) const;
};

/// Exact value of an identity lemma (Int2, Int1, Int3, Int4bd, Diffhspace).
[[nodiscard]] double appendix_c_closed_form(LemmaId id, const LemmaParams& p);

/// Adaptive quadrature of the lemma's integrand as written, absolute error <= tol.
[[nodiscard]] double appendix_c_quadrature(LemmaId id, const LemmaParams& p, double tol = 1e-10);

struct InequalityReport {
  LemmaId id{};
  double lhs = 0.0;
  double quadrature_error = 0.0;
  std::vector<std::pair<std::string, double>> lower_bounds;
  std::vector<std::pair<std::string, double>> upper_bounds;
  bool satisfied = false;
  /// Smallest distance from lhs to a bound, signed so that positive means satisfied.
  [[nodiscard]] double slack() const;
};

[[nodiscard]] InequalityReport check_inequality_bounds(LemmaId id, const LemmaParams& p,
                                                       double tol = 1e-10);

/// Throws Error(Domain) unless p satisfies the hypotheses of the lemma.
void check_lemma_domain(LemmaId id, const LemmaParams& p);

/// Adaptive Gauss-Kronrod on a finite interval with an absolute tolerance.
[[nodiscard]] double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                        double abs_tol, double* error_out = nullptr);

}  // namespace pam
