#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pchaz/solver.hpp"
#include "pchaz/survdata.hpp"

namespace pchaz {

/// Strictly increasing positive penalties.
class PenaltyGrid {
 public:
  /// count values equally spaced on the log scale from min to max.
  static PenaltyGrid log_spaced(double min, double max, std::size_t count);
  static PenaltyGrid from_values(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  explicit PenaltyGrid(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

enum class Criterion { bic, cv };

Criterion parse_criterion(std::string_view name);
std::string_view to_string(Criterion c);

struct PathResult {
  PenaltyGrid grid;
  /// One entry per penalty; empty where the solver threw.
  std::vector<std::optional<PenalizedFit>> fits;
  std::vector<std::string> errors;
  /// NaN marks entries that are unavailable.
  std::optional<std::vector<double>> bic;
  std::optional<std::vector<double>> cv;
  std::optional<std::size_t> bic_index;
  std::optional<std::size_t> cv_index;
};

/// Fits every penalty in ascending order, warm-starting each fit from the
/// previous fit's final weights and log-hazard. The first fit is cold.
PathResult regularization_path(const SufficientStats& stats, const PenaltyGrid& pens,
                               const FitOptions& opts = {});

/// Weight-scaled squared jump at which cut l counts as a breakpoint.
inline constexpr double kBreakThreshold = 0.5;

/// Cuts l (0-based, between bins l and l+1) where w_l (a_{l+1} - a_l)^2 >= 0.5.
std::vector<std::size_t> breakpoint_indices(const PenalizedFit& fit);

/// Number of constant segments: breakpoints + 1.
int model_dimension(const PenalizedFit& fit);

/// -2 loglik + d log n.
double bic(const PenalizedFit& fit, std::size_t n);

/// Fills path.bic and path.bic_index.
void attach_bic(PathResult& path, std::size_t n);

/// Assignment of n individuals to k folds by a seeded shuffle.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k, std::uint64_t seed);

/// k-fold cross-validated log-likelihood per penalty: the held-out fold's
/// unpenalized log-likelihood at the fit on the remaining folds, summed over
/// folds. NaN where any fold's fit failed.
std::vector<double> cross_validate(const SurvDataset& data, const CutGrid& grid, const PenaltyGrid& pens,
                                   std::size_t k, std::uint64_t seed, const FitOptions& opts = {});

/// Same, with a caller-supplied fold assignment.
std::vector<double> cross_validate_folds(const SurvDataset& data, const CutGrid& grid,
                                         const PenaltyGrid& pens, std::span<const std::size_t> folds,
                                         std::size_t k, const FitOptions& opts = {});

/// Fills path.cv and path.cv_index.
void attach_cv(PathResult& path, std::vector<double> cv);

/// Index of the best finite value (min when `minimize`), ties toward the
/// larger index. Empty when no value is finite.
std::optional<std::size_t> best_index(std::span<const double> values, bool minimize);

struct Selection {
  std::size_t index = 0;
  double penalty = 0.0;
  const PenalizedFit* fit = nullptr;
};

/// Min-BIC or max-CV entry. Requires the criterion values to be attached.
Selection select_penalty(const PathResult& path, Criterion criterion);

}  // namespace pchaz
