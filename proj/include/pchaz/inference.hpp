#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pchaz/pathsel.hpp"
#include "pchaz/solver.hpp"
#include "pchaz/survdata.hpp"

namespace pchaz {

/// Right-continuous piecewise-constant hazard: rates[k] on
/// (breakpoints[k-1], breakpoints[k]], with the last segment unbounded.
class SegmentedHazard {
 public:
  SegmentedHazard(std::vector<double> breakpoints, std::vector<double> rates);
  /// Builds from per-bin rates, merging neighbours with identical rates.
  static SegmentedHazard from_bins(const CutGrid& grid, std::span<const double> rates);

  std::span<const double> breakpoints() const { return breaks_; }
  std::span<const double> rates() const { return rates_; }
  std::size_t segments() const { return rates_.size(); }

  std::size_t segment_of(double t) const;
  double hazard(double t) const;
  double cumulative_hazard(double t) const;
  double survival(double t) const;

 private:
  std::vector<double> breaks_;
  std::vector<double> rates_;
};

double cumulative_hazard(const SegmentedHazard& seg, double t);
double survival(const SegmentedHazard& seg, double t);

/// Merges the bins of a penalized fit across cuts that are not breakpoints.
/// With `refit`, each segment's rate is pooled O / R over its bins;
/// otherwise exp of the R-weighted mean of a over the segment.
SegmentedHazard extract_segments(const PenalizedFit& fit, const CutGrid& grid, const SufficientStats& stats,
                                 bool refit = true);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double p);

struct BootstrapOptions {
  Criterion criterion = Criterion::bic;
  std::size_t replicates = 100;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t folds = 10;
  bool refit = true;
  FitOptions fit;
};

struct BootstrapBands {
  std::vector<double> time_grid;
  std::vector<double> median;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  std::size_t replicates = 0;
  /// Survival curve of every replicate on time_grid, in replicate order.
  std::vector<std::vector<double>> curves;
};

/// Selected-penalty segmented hazard for one dataset: path, criterion,
/// extraction. `cv_seed` is only used for Criterion::cv.
SegmentedHazard select_and_extract(const SurvDataset& data, const CutGrid& grid, const PenaltyGrid& pens,
                                   Criterion criterion, std::size_t folds, std::uint64_t cv_seed, bool refit,
                                   const FitOptions& opts);

/// Pairs bootstrap: each replicate resamples individuals, reselects the
/// penalty and re-extracts the segmentation, then evaluates S on the grid.
/// Bands are pointwise quantiles at (1 -/+ level)/2 and the 0.5 quantile.
BootstrapBands bootstrap_bands(const SurvDataset& data, const CutGrid& grid, const PenaltyGrid& pens,
                               std::span<const double> time_grid, const BootstrapOptions& options);

/// Smallest grid time with S(t) <= 1 - p; nullopt when never reached.
std::optional<double> survival_quantile(std::span<const double> times, std::span<const double> survival,
                                        double p);

/// Exact quantile of a segmented hazard's survival function.
std::optional<double> survival_quantile(const SegmentedHazard& seg, double p);

struct KaplanMeier {
  /// t = 0 first, then each distinct event time (and the last follow-up
  /// time when it is censored).
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> events;
  double level = 0.95;

  /// Right-continuous step evaluation.
  std::size_t index_at(double t) const;
  double at(double t) const { return survival[index_at(t)]; }
  std::optional<double> quantile(double p) const;
};

/// Product-limit estimate with log-scale Greenwood pointwise intervals.
KaplanMeier kaplan_meier(const SurvDataset& data, double level = 0.95);

/// Two-sided standard normal critical value for `level`.
double normal_critical_value(double level);

}  // namespace pchaz
