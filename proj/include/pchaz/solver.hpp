#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pchaz/likelihood.hpp"
#include "pchaz/survdata.hpp"

namespace pchaz {

struct FitOptions {
  /// Newton stops when the largest component of the Newton step
  /// I(a, w)^{-1} U(a, w) falls below this (see newton_fit).
  double newton_tol = 1e-8;
  int newton_max_iter = 100;
  /// Outer loop stops when max_l |a_l - a_l^prev| falls below this.
  double outer_tol = 1e-6;
  int outer_max_iter = 1000;
  /// Weight regularizer in w_l = 1 / ((a_{l+1} - a_l)^2 + delta^2).
  double delta = 1e-5;
  int max_step_halvings = 50;

  void validate() const;
};

/// Thrown when LDL^T factorization meets a pivot <= 0.
class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot);
  std::size_t pivot() const { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Solves m x = rhs for symmetric positive definite tridiagonal m by LDL^T
/// in O(L) time and memory.
std::vector<double> solve_band_spd(const BandMatrix& m, std::span<const double> rhs);

/// Solves (diag(info) + sum_l c_l (e_l - e_{l+1})(e_l - e_{l+1})^T) x = rhs,
/// the shape of every penalized Hessian here. The pivots are built from
/// non-negative terms only, so couplings many orders of magnitude above the
/// data information cause no cancellation. Rows flagged in `fixed` are held
/// at x_l = 0 and act as an infinitely stiff anchor for their neighbours.
std::vector<double> solve_coupled_spd(std::span<const double> info, std::span<const double> coupling,
                                      std::span<const double> rhs, const std::vector<bool>& fixed = {});

/// Start point for Newton: log((O_l + 1/2) / R_l), or the lower bound where
/// R_l = 0.
LogHazard initial_log_hazard(const SufficientStats& stats);

struct NewtonResult {
  LogHazard a;
  bool converged = false;
  int iterations = 0;
  /// Largest Newton-step component at the returned point.
  double max_step = 0.0;
  /// Largest projected score component at the returned point.
  double max_score = 0.0;
  double objective = 0.0;
};

/// Maximizes the penalized log-likelihood for fixed weights by damped Newton
/// with step halving. Components pinned at the log-hazard bounds whose step
/// points outward are frozen. Converged means the Newton step is below
/// `newton_tol`, or no representable ascent remains along the Newton
/// direction.
NewtonResult newton_fit(const SufficientStats& stats, std::span<const double> w, double pen,
                        std::span<const double> a0, const FitOptions& opts = {});

struct PenalizedFit {
  LogHazard a;
  WeightVector w;
  double pen = 0.0;
  bool converged = false;
  int outer_iterations = 0;
  /// Unpenalized log-likelihood at a.
  double loglik = 0.0;
  /// Penalized log-likelihood at (a, w).
  double pen_loglik = 0.0;
  double max_step = 0.0;
};

/// Adaptive ridge weights ((a_{l+1} - a_l)^2 + delta^2)^{-1}.
WeightVector adaptive_weights(std::span<const double> a, double delta);

/// Alternates newton_fit and the adaptive weight update until a stabilizes.
/// `w0` defaults to all ones; `a0` to initial_log_hazard.
PenalizedFit adaptive_ridge_fit(const SufficientStats& stats, double pen, const FitOptions& opts = {},
                                std::optional<WeightVector> w0 = std::nullopt,
                                std::optional<LogHazard> a0 = std::nullopt);

/// Single Newton fit with w = 1 everywhere (smooth ridge variant).
PenalizedFit ridge_fit(const SufficientStats& stats, double pen, const FitOptions& opts = {});

}  // namespace pchaz
