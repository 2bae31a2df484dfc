#include "pchaz/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pchaz {

namespace {

void check_lengths(const SufficientStats& stats, std::span<const double> a) {
  if (stats.exposure.size() != stats.events.size())
    throw std::invalid_argument("inconsistent sufficient statistics");
  if (a.size() != stats.bins()) throw std::invalid_argument("log-hazard length does not match bin count");
}

void check_lengths(const SufficientStats& stats, std::span<const double> a, std::span<const double> w,
                   double pen) {
  check_lengths(stats, a);
  if (w.size() + 1 != a.size()) throw std::invalid_argument("weight length must be bin count - 1");
  if (!(pen >= 0.0)) throw std::invalid_argument("penalty must be non-negative");
}

double penalty_term(std::span<const double> a, std::span<const double> w, double pen) {
  if (pen == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    const double d = a[l + 1] - a[l];
    s += w[l] * d * d;
  }
  return 0.5 * pen * s;
}

}  // namespace

double clamp_log_hazard(double a) { return std::clamp(a, kLogHazardMin, kLogHazardMax); }

std::vector<double> BandMatrix::multiply(std::span<const double> x) const {
  const std::size_t n = diag.size();
  if (x.size() != n || offdiag.size() + 1 != std::max<std::size_t>(n, 1))
    throw std::invalid_argument("band matrix dimension mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += offdiag[i - 1] * x[i - 1];
    if (i + 1 < n) v += offdiag[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

double log_likelihood(const SufficientStats& stats, std::span<const double> a) {
  check_lengths(stats, a);
  double s = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double o = static_cast<double>(stats.events[l]);
    const double r = stats.exposure[l];
    // Skip empty terms so that a_l = -inf is harmless where O_l = R_l = 0.
    if (o != 0.0) s += o * a[l];
    if (r != 0.0) s -= std::exp(a[l]) * r;
  }
  return s;
}

std::vector<MleRate> mle_rates(const SufficientStats& stats) {
  std::vector<MleRate> out(stats.bins());
  for (std::size_t l = 0; l < out.size(); ++l) {
    const double o = static_cast<double>(stats.events[l]);
    const double r = stats.exposure[l];
    if (r > 0.0)
      out[l] = {o / r, o > 0.0 ? RateStatus::ok : RateStatus::boundary};
    else
      out[l] = {0.0, RateStatus::undefined};
  }
  return out;
}

double penalized_log_likelihood(const SufficientStats& stats, std::span<const double> a,
                                std::span<const double> w, double pen) {
  check_lengths(stats, a, w, pen);
  return log_likelihood(stats, a) - penalty_term(a, w, pen);
}

std::vector<double> score(const SufficientStats& stats, std::span<const double> a,
                          std::span<const double> w, double pen) {
  return evaluate_penalized(stats, a, w, pen).score;
}

BandMatrix neg_hessian(const SufficientStats& stats, std::span<const double> a,
                       std::span<const double> w, double pen) {
  return evaluate_penalized(stats, a, w, pen).neg_hessian;
}

PenalizedEvaluation evaluate_penalized(const SufficientStats& stats, std::span<const double> a,
                                       std::span<const double> w, double pen) {
  check_lengths(stats, a, w, pen);
  const std::size_t L = a.size();
  PenalizedEvaluation ev;
  ev.score.resize(L);
  ev.neg_hessian.diag.resize(L);
  ev.neg_hessian.offdiag.resize(L - 1);
  ev.information.resize(L);

  double loglik = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double o = static_cast<double>(stats.events[l]);
    const double r = stats.exposure[l];
    const double mu = r != 0.0 ? r * std::exp(a[l]) : 0.0;
    if (o != 0.0) loglik += o * a[l];
    loglik -= mu;
    ev.score[l] = o - mu;
    ev.neg_hessian.diag[l] = mu;
    ev.information[l] = mu;
  }

  // Penalty contributions are accumulated from the coupling terms
  // t_l = pen w_l (a_{l+1} - a_l) so that they telescope exactly; the
  // expanded form w_{l-1} a_{l-1} - (w_{l-1} + w_l) a_l + w_l a_{l+1}
  // loses all precision once w_l reaches 1/delta^2.
  double pen_sum = 0.0;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const double d = a[l + 1] - a[l];
    const double pw = pen * w[l];
    const double t = pw * d;
    pen_sum += w[l] * d * d;
    ev.score[l] += t;
    ev.score[l + 1] -= t;
    ev.neg_hessian.diag[l] += pw;
    ev.neg_hessian.diag[l + 1] += pw;
    ev.neg_hessian.offdiag[l] = -pw;
  }
  ev.objective = loglik - (pen == 0.0 ? 0.0 : 0.5 * pen * pen_sum);
  return ev;
}

}  // namespace pchaz
