#include "pchaz/pathsel.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pchaz/likelihood.hpp"
#include "pchaz/parallel.hpp"
#include "pchaz/random.hpp"

namespace pchaz {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

PenaltyGrid PenaltyGrid::log_spaced(double min, double max, std::size_t count) {
  if (!(min > 0.0) || !(max > min) || !std::isfinite(max))
    throw std::invalid_argument("penalty grid needs 0 < min < max");
  if (count < 2) throw std::invalid_argument("penalty grid needs at least 2 values");
  const double lo = std::log(min), hi = std::log(max);
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k)
    v[k] = std::exp(lo + static_cast<double>(k) * (hi - lo) / static_cast<double>(count - 1));
  v.front() = min;
  v.back() = max;
  return PenaltyGrid(std::move(v));
}

PenaltyGrid PenaltyGrid::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty penalty grid");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw std::invalid_argument("penalties must be positive");
    if (i > 0 && values[i] <= values[i - 1])
      throw std::invalid_argument("penalties must be strictly increasing");
  }
  return PenaltyGrid(std::move(values));
}

Criterion parse_criterion(std::string_view name) {
  if (name == "bic") return Criterion::bic;
  if (name == "cv") return Criterion::cv;
  throw std::invalid_argument("unknown criterion '" + std::string(name) + "'");
}

std::string_view to_string(Criterion c) { return c == Criterion::bic ? "bic" : "cv"; }

PathResult regularization_path(const SufficientStats& stats, const PenaltyGrid& pens,
                               const FitOptions& opts) {
  PathResult path{pens, {}, {}, {}, {}, {}, {}};
  path.fits.reserve(pens.size());
  path.errors.resize(pens.size());
  std::optional<WeightVector> w;
  std::optional<LogHazard> a;
  for (std::size_t k = 0; k < pens.size(); ++k) {
    try {
      auto fit = adaptive_ridge_fit(stats, pens[k], opts, w, a);
      w = fit.w;
      a = fit.a;
      path.fits.emplace_back(std::move(fit));
    } catch (const std::exception& e) {
      path.fits.emplace_back(std::nullopt);
      path.errors[k] = e.what();
    }
  }
  return path;
}

std::vector<std::size_t> breakpoint_indices(const PenalizedFit& fit) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < fit.w.size(); ++l) {
    const double d = fit.a[l + 1] - fit.a[l];
    if (fit.w[l] * d * d >= kBreakThreshold) out.push_back(l);
  }
  return out;
}

int model_dimension(const PenalizedFit& fit) { return 1 + static_cast<int>(breakpoint_indices(fit).size()); }

double bic(const PenalizedFit& fit, std::size_t n) {
  if (n < 1) throw std::invalid_argument("bic needs n >= 1");
  return -2.0 * fit.loglik + model_dimension(fit) * std::log(static_cast<double>(n));
}

void attach_bic(PathResult& path, std::size_t n) {
  std::vector<double> v(path.fits.size(), kNaN);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (path.fits[k]) v[k] = bic(*path.fits[k], n);
  path.bic_index = best_index(v, true);
  path.bic = std::move(v);
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  if (n < k) throw std::invalid_argument("cross-validation needs n >= k");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<std::size_t> fold(n);
  for (std::size_t j = 0; j < n; ++j) fold[perm[j]] = j % k;
  return fold;
}

std::vector<double> cross_validate_folds(const SurvDataset& data, const CutGrid& grid,
                                         const PenaltyGrid& pens, std::span<const std::size_t> folds,
                                         std::size_t k, const FitOptions& opts) {
  if (folds.size() != data.size()) throw std::invalid_argument("fold assignment length mismatch");
  std::vector<std::vector<double>> per_fold(k, std::vector<double>(pens.size(), kNaN));
  parallel_for(k, [&](std::size_t f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) (folds[i] == f ? test : train).push_back(i);
    if (test.empty() || train.empty()) throw std::invalid_argument("empty cross-validation fold");
    const auto train_stats = sufficient_stats(data.select(train), grid);
    const auto test_stats = sufficient_stats(data.select(test), grid);
    const auto path = regularization_path(train_stats, pens, opts);
    for (std::size_t p = 0; p < pens.size(); ++p)
      if (path.fits[p]) per_fold[f][p] = log_likelihood(test_stats, path.fits[p]->a);
  });
  std::vector<double> cv(pens.size(), 0.0);
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t p = 0; p < pens.size(); ++p) cv[p] += per_fold[f][p];
  return cv;
}

std::vector<double> cross_validate(const SurvDataset& data, const CutGrid& grid, const PenaltyGrid& pens,
                                   std::size_t k, std::uint64_t seed, const FitOptions& opts) {
  auto has_empty_training = [&](const std::vector<std::size_t>& folds) {
    std::vector<double> exposure(k, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      exposure[folds[i]] += data[i].time;
      total += data[i].time;
    }
    for (double e : exposure)
      if (!(total - e > 0.0)) return true;
    return false;
  };
  auto folds = fold_assignment(data.size(), k, seed);
  if (has_empty_training(folds)) {
    folds = fold_assignment(data.size(), k, stream_seed(seed, 1));
    if (has_empty_training(folds)) throw std::runtime_error("cross-validation fold with zero training exposure");
  }
  return cross_validate_folds(data, grid, pens, folds, k, opts);
}

void attach_cv(PathResult& path, std::vector<double> cv) {
  if (cv.size() != path.fits.size()) throw std::invalid_argument("cv length mismatch");
  for (std::size_t k = 0; k < cv.size(); ++k)
    if (!path.fits[k]) cv[k] = kNaN;
  path.cv_index = best_index(cv, false);
  path.cv = std::move(cv);
}

std::optional<std::size_t> best_index(std::span<const double> values, bool minimize) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) continue;
    if (!best || (minimize ? values[k] <= values[*best] : values[k] >= values[*best])) best = k;
  }
  return best;
}

Selection select_penalty(const PathResult& path, Criterion criterion) {
  const auto& values = criterion == Criterion::bic ? path.bic : path.cv;
  if (!values) throw std::invalid_argument(std::string(to_string(criterion)) + " values not computed");
  const auto idx = best_index(*values, criterion == Criterion::bic);
  if (!idx) throw std::runtime_error("every fit on the penalty path failed");
  return {*idx, path.grid[*idx], &*path.fits[*idx]};
}

}  // namespace pchaz
