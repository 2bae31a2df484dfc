#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "pchaz/inference.hpp"
#include "pchaz/pathsel.hpp"
#include "pchaz/random.hpp"
#include "pchaz/survdata.hpp"

namespace pchaz {

/// lambda(t) = shape (t / scale)^(shape - 1) / scale.
struct Weibull {
  double shape = 1.0;
  double scale = 1.0;
};

struct UniformCensoring {
  double lo = 0.0;
  double hi = 1.0;
};

/// Either family of hazard the simulations and the error metric handle.
using Hazard = std::variant<SegmentedHazard, Weibull>;
using Censoring = std::variant<UniformCensoring, Weibull>;

double hazard_at(const Hazard& h, double t);
double cumulative_hazard(const Hazard& h, double t);
double survival(const Hazard& h, double t);

struct TrueModel {
  std::string name;
  Hazard hazard;
  Censoring censoring;
  /// Upper end of the interval on which estimates are scored.
  double tv_horizon = 0.0;
};

/// Five-piece hazard (0, 0.005, 0.01, 0.02, 0.04) cut at 20, 40, 50, 70,
/// censored uniformly on [70, 90].
TrueModel scenario_pch();
/// Weibull(shape 5, scale 60) censored by Weibull(shape 30, scale 60).
TrueModel scenario_weibull();

/// Inverse-transform draw of T* with P(T* > t) = exp(-Lambda(t)).
double sample_event_time(const Hazard& h, Rng& rng);
double sample_censoring_time(const Censoring& c, Rng& rng);

/// (min(T*, C), I(T* <= C)).
SurvObs apply_censoring(double event_time, double censoring_time);

SurvDataset simulate_dataset(const TrueModel& model, std::size_t n, Rng& rng);

/// Integral of |f - g| over [0, t_max]. Exact for two step functions;
/// otherwise composite Simpson with step <= 0.01 on each piece between the
/// step function's breakpoints.
double total_variation(const Hazard& f, const Hazard& g, double t_max);

/// Cut-count buckets 0, 1, 2, 3, 4, 5+.
inline constexpr std::size_t kCutBuckets = 6;

struct McConfig {
  std::size_t n = 100;
  std::size_t replicates = 100;
  Criterion criterion = Criterion::bic;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  bool refit = true;
  /// When set, every replicate is also fitted by ridge_fit at this penalty.
  std::optional<double> ridge_pen;
  FitOptions fit;
};

struct McSummary {
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::size_t failed = 0;
  Criterion criterion = Criterion::bic;
  std::array<double, kCutBuckets> cut_count_distribution{};
  double mean_tv = 0.0;
  std::optional<double> mean_tv_ridge;
  /// Selected penalty per successful replicate, replicate order.
  std::vector<double> selected_penalties;
};

McSummary monte_carlo_experiment(const TrueModel& model, const CutGrid& grid, const PenaltyGrid& pens,
                                 const McConfig& config);

}  // namespace pchaz
