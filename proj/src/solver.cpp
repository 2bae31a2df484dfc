#include "pchaz/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pchaz {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool at_lower(double a) { return a <= kLogHazardMin; }
bool at_upper(double a) { return a >= kLogHazardMax; }

// Predicted gains below this fraction of |objective| are rounding noise.
constexpr double kGainFloor = 1e-13;

// Zero the components that would push a bound-pinned entry further out.
void project(std::span<const double> a, std::span<double> v) {
  for (std::size_t l = 0; l < a.size(); ++l)
    if ((at_lower(a[l]) && v[l] < 0.0) || (at_upper(a[l]) && v[l] > 0.0)) v[l] = 0.0;
}

}  // namespace

void FitOptions::validate() const {
  if (!(newton_tol > 0.0) || !(outer_tol > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("fit tolerances must be positive");
  if (newton_max_iter < 1 || outer_max_iter < 1) throw std::invalid_argument("iteration caps must be >= 1");
  if (max_step_halvings < 0) throw std::invalid_argument("max_step_halvings must be >= 0");
}

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot)
    : std::runtime_error("matrix not positive definite (pivot " + std::to_string(pivot) + ")"),
      pivot_(pivot) {}

std::vector<double> solve_band_spd(const BandMatrix& m, std::span<const double> rhs) {
  const std::size_t n = m.diag.size();
  if (n == 0 || rhs.size() != n || m.offdiag.size() + 1 != n)
    throw std::invalid_argument("band matrix dimension mismatch");

  // L has unit diagonal and subdiagonal `lower`; D is `pivot`.
  std::vector<double> pivot(n), lower(n, 0.0), x(rhs.begin(), rhs.end());
  pivot[0] = m.diag[0];
  if (!(pivot[0] > 0.0) || !std::isfinite(pivot[0])) throw NotPositiveDefinite(0);
  for (std::size_t i = 1; i < n; ++i) {
    lower[i] = m.offdiag[i - 1] / pivot[i - 1];
    pivot[i] = m.diag[i] - lower[i] * m.offdiag[i - 1];
    if (!(pivot[i] > 0.0) || !std::isfinite(pivot[i])) throw NotPositiveDefinite(i);
    x[i] -= lower[i] * x[i - 1];
  }
  x[n - 1] /= pivot[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = x[i] / pivot[i] - lower[i + 1] * x[i + 1];
  return x;
}

std::vector<double> solve_coupled_spd(std::span<const double> info, std::span<const double> coupling,
                                      std::span<const double> rhs, const std::vector<bool>& fixed) {
  const std::size_t n = info.size();
  if (n == 0 || rhs.size() != n || coupling.size() + 1 != n || (!fixed.empty() && fixed.size() != n))
    throw std::invalid_argument("coupled system dimension mismatch");
  auto is_fixed = [&](std::size_t l) { return !fixed.empty() && fixed[l]; };

  // pivot_l = c_l + q_l, where q_l is the data information plus the
  // stiffness of everything to the left seen through coupling c_{l-1}.
  std::vector<double> pivot(n, 0.0), x(rhs.begin(), rhs.end());
  double q_prev = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double c_prev = l > 0 ? coupling[l - 1] : 0.0;
    const double c_next = l + 1 < n ? coupling[l] : 0.0;
    double q = info[l];
    if (l > 0) q += is_fixed(l - 1) ? c_prev : c_prev * q_prev / (c_prev + q_prev);
    if (is_fixed(l)) {
      x[l] = 0.0;
      continue;
    }
    pivot[l] = c_next + q;
    if (!(pivot[l] > 0.0) || !std::isfinite(pivot[l])) throw NotPositiveDefinite(l);
    if (l > 0 && !is_fixed(l - 1)) x[l] += c_prev / pivot[l - 1] * x[l - 1];
    q_prev = q;
  }
  for (std::size_t l = n; l-- > 0;) {
    if (is_fixed(l)) continue;
    x[l] /= pivot[l];
    if (l + 1 < n && !is_fixed(l + 1)) x[l] += coupling[l] / pivot[l] * x[l + 1];
  }
  return x;
}

LogHazard initial_log_hazard(const SufficientStats& stats) {
  LogHazard a(stats.bins());
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double r = stats.exposure[l];
    a[l] = r > 0.0 ? clamp_log_hazard(std::log((static_cast<double>(stats.events[l]) + 0.5) / r))
                   : kLogHazardMin;
  }
  return a;
}

NewtonResult newton_fit(const SufficientStats& stats, std::span<const double> w, double pen,
                        std::span<const double> a0, const FitOptions& opts) {
  opts.validate();
  NewtonResult res;
  res.a.assign(a0.begin(), a0.end());
  for (auto& v : res.a) v = clamp_log_hazard(v);

  auto ev = evaluate_penalized(stats, res.a, w, pen);
  const std::size_t L = res.a.size();
  std::vector<double> coupling(w.size());
  for (std::size_t l = 0; l < w.size(); ++l) coupling[l] = pen * w[l];
  std::vector<bool> fixed(L);
  LogHazard candidate(L);
  for (res.iterations = 0; res.iterations < opts.newton_max_iter; ++res.iterations) {
    auto& U = ev.score;
    // Newton step on the face of the box: entries pinned at a bound with the
    // score pointing outward are held fixed. Rows with no data and no
    // coupling carry no information; hold them too.
    for (std::size_t l = 0; l < L; ++l) {
      const bool pinned = (at_lower(res.a[l]) && U[l] < 0.0) || (at_upper(res.a[l]) && U[l] > 0.0);
      const bool isolated = ev.information[l] == 0.0 && (l == 0 || coupling[l - 1] == 0.0) &&
                            (l + 1 == L || coupling[l] == 0.0);
      fixed[l] = pinned || isolated;
      if (fixed[l]) U[l] = 0.0;
    }
    auto step = solve_coupled_spd(ev.information, coupling, U, fixed);
    res.max_step = max_abs(step);
    // Newton decrement U' I^{-1} U: twice the predicted gain of a full step.
    double decrement = 0.0;
    for (std::size_t l = 0; l < step.size(); ++l) decrement += U[l] * step[l];
    if (res.max_step <= opts.newton_tol) {
      res.converged = true;
      break;
    }
    const double resolution = kGainFloor * (1.0 + std::abs(ev.objective));
    if (decrement <= resolution) {
      // The gain is below what the objective can resolve, so a line search
      // cannot judge the step. Take it unless it measurably hurts.
      for (std::size_t l = 0; l < L; ++l) candidate[l] = clamp_log_hazard(res.a[l] + step[l]);
      auto next = evaluate_penalized(stats, candidate, w, pen);
      if (next.objective >= ev.objective - resolution) {
        res.a.swap(candidate);
        ev = std::move(next);
      }
      res.converged = true;
      break;
    }

    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= opts.max_step_halvings; ++h, t *= 0.5) {
      for (std::size_t l = 0; l < candidate.size(); ++l)
        candidate[l] = clamp_log_hazard(res.a[l] + t * step[l]);
      auto next = evaluate_penalized(stats, candidate, w, pen);
      if (next.objective >= ev.objective) {
        res.a.swap(candidate);
        ev = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // The objective is concave and `step` is an ascent direction, so a
      // failed line search means we are at the limit of double precision.
      res.converged = true;
      break;
    }
  }
  auto U = ev.score;
  project(res.a, U);
  res.max_score = max_abs(U);
  res.objective = ev.objective;
  return res;
}

WeightVector adaptive_weights(std::span<const double> a, double delta) {
  WeightVector w(a.empty() ? 0 : a.size() - 1);
  const double d2 = delta * delta;
  for (std::size_t l = 0; l < w.size(); ++l) {
    const double d = a[l + 1] - a[l];
    w[l] = 1.0 / (d * d + d2);
  }
  return w;
}

namespace {

PenalizedFit finish(const SufficientStats& stats, LogHazard a, WeightVector w, double pen, bool converged,
                    int outer, double max_step) {
  PenalizedFit fit;
  fit.loglik = log_likelihood(stats, a);
  fit.pen_loglik = penalized_log_likelihood(stats, a, w, pen);
  fit.a = std::move(a);
  fit.w = std::move(w);
  fit.pen = pen;
  fit.converged = converged;
  fit.outer_iterations = outer;
  fit.max_step = max_step;
  return fit;
}

}  // namespace

PenalizedFit adaptive_ridge_fit(const SufficientStats& stats, double pen, const FitOptions& opts,
                                std::optional<WeightVector> w0, std::optional<LogHazard> a0) {
  opts.validate();
  if (!(pen >= 0.0) || !std::isfinite(pen)) throw std::invalid_argument("penalty must be non-negative");
  const std::size_t L = stats.bins();
  WeightVector w = w0 ? std::move(*w0) : WeightVector(L - 1, 1.0);
  LogHazard a = a0 ? std::move(*a0) : initial_log_hazard(stats);
  if (w.size() + 1 != L || a.size() != L) throw std::invalid_argument("warm start has wrong length");

  bool converged = false;
  int outer = 0;
  double max_step = 0.0;
  while (outer < opts.outer_max_iter) {
    ++outer;
    auto nr = newton_fit(stats, w, pen, a, opts);
    double change = 0.0;
    for (std::size_t l = 0; l < L; ++l) change = std::max(change, std::abs(nr.a[l] - a[l]));
    a = std::move(nr.a);
    max_step = nr.max_step;
    w = adaptive_weights(a, opts.delta);
    if (change <= opts.outer_tol) {
      converged = nr.converged;
      break;
    }
  }
  return finish(stats, std::move(a), std::move(w), pen, converged, outer, max_step);
}

PenalizedFit ridge_fit(const SufficientStats& stats, double pen, const FitOptions& opts) {
  if (!(pen >= 0.0) || !std::isfinite(pen)) throw std::invalid_argument("penalty must be non-negative");
  WeightVector w(stats.bins() - 1, 1.0);
  auto nr = newton_fit(stats, w, pen, initial_log_hazard(stats), opts);
  return finish(stats, std::move(nr.a), std::move(w), pen, nr.converged, 1, nr.max_step);
}

}  // namespace pchaz
