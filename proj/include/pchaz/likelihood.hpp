#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pchaz/survdata.hpp"

namespace pchaz {

/// Bounds on the log-hazard a_l. e^-20 is indistinguishable from a zero
/// hazard at the time scales of interest and keeps the objective finite.
inline constexpr double kLogHazardMin = -20.0;
inline constexpr double kLogHazardMax = 20.0;

/// a_l = log(alpha_l), one per bin.
using LogHazard = std::vector<double>;
/// w_l >= 0 on the L-1 interior cuts.
using WeightVector = std::vector<double>;

double clamp_log_hazard(double a);

/// Symmetric tridiagonal matrix.
struct BandMatrix {
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t size() const { return diag.size(); }
  std::vector<double> multiply(std::span<const double> x) const;
};

/// Sum_l (O_l a_l - e^{a_l} R_l).
double log_likelihood(const SufficientStats& stats, std::span<const double> a);

enum class RateStatus {
  ok,        ///< O_l > 0, R_l > 0
  boundary,  ///< O_l = 0, R_l > 0; the maximizer sits at rate 0
  undefined  ///< R_l = 0; no information
};

struct MleRate {
  double rate = 0.0;
  RateStatus status = RateStatus::undefined;
};

/// Closed-form per-bin maximizer O_l / R_l.
std::vector<MleRate> mle_rates(const SufficientStats& stats);

double penalized_log_likelihood(const SufficientStats& stats, std::span<const double> a,
                                std::span<const double> w, double pen);

std::vector<double> score(const SufficientStats& stats, std::span<const double> a,
                          std::span<const double> w, double pen);

BandMatrix neg_hessian(const SufficientStats& stats, std::span<const double> a,
                       std::span<const double> w, double pen);

/// Objective, score and negative Hessian sharing one evaluation of e^{a}.
struct PenalizedEvaluation {
  double objective = 0.0;
  std::vector<double> score;
  BandMatrix neg_hessian;
  /// Data part of the diagonal, R_l e^{a_l}, kept apart from the couplings.
  std::vector<double> information;
};

PenalizedEvaluation evaluate_penalized(const SufficientStats& stats, std::span<const double> a,
                                       std::span<const double> w, double pen);

}  // namespace pchaz
