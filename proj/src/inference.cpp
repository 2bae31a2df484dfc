#include "pchaz/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "pchaz/parallel.hpp"
#include "pchaz/random.hpp"

namespace pchaz {

SegmentedHazard::SegmentedHazard(std::vector<double> breakpoints, std::vector<double> rates)
    : breaks_(std::move(breakpoints)), rates_(std::move(rates)) {
  if (rates_.size() != breaks_.size() + 1) throw std::invalid_argument("need one more rate than breakpoints");
  for (std::size_t i = 0; i < breaks_.size(); ++i)
    if (!(breaks_[i] > 0.0) || !std::isfinite(breaks_[i]) || (i > 0 && breaks_[i] <= breaks_[i - 1]))
      throw std::invalid_argument("breakpoints must be positive and strictly increasing");
  for (double r : rates_)
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("rates must be finite and non-negative");
}

SegmentedHazard SegmentedHazard::from_bins(const CutGrid& grid, std::span<const double> rates) {
  if (rates.size() != grid.bins()) throw std::invalid_argument("rate count does not match bin count");
  std::vector<double> breaks, merged{rates[0]};
  const auto cuts = grid.finite_cuts();
  for (std::size_t l = 1; l < rates.size(); ++l) {
    if (rates[l] == merged.back()) continue;
    breaks.push_back(cuts[l - 1]);
    merged.push_back(rates[l]);
  }
  return SegmentedHazard(std::move(breaks), std::move(merged));
}

std::size_t SegmentedHazard::segment_of(double t) const {
  return static_cast<std::size_t>(std::lower_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
}

double SegmentedHazard::hazard(double t) const { return rates_[segment_of(t)]; }

double SegmentedHazard::cumulative_hazard(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("cumulative hazard needs t >= 0");
  double total = 0.0, lo = 0.0;
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    const double hi = k < breaks_.size() ? breaks_[k] : std::numeric_limits<double>::infinity();
    if (t <= hi) return total + rates_[k] * (t - lo);
    total += rates_[k] * (hi - lo);
    lo = hi;
  }
  return total;
}

double SegmentedHazard::survival(double t) const { return std::exp(-cumulative_hazard(t)); }

double cumulative_hazard(const SegmentedHazard& seg, double t) { return seg.cumulative_hazard(t); }
double survival(const SegmentedHazard& seg, double t) { return seg.survival(t); }

SegmentedHazard extract_segments(const PenalizedFit& fit, const CutGrid& grid, const SufficientStats& stats,
                                 bool refit) {
  const std::size_t L = grid.bins();
  if (fit.a.size() != L || stats.bins() != L) throw std::invalid_argument("fit does not match cut grid");
  const auto cuts = grid.finite_cuts();

  std::vector<double> breaks, rates;
  auto close_segment = [&](std::size_t first, std::size_t last) {  // bins [first, last]
    double o = 0.0, r = 0.0, ra = 0.0, sa = 0.0;
    for (std::size_t l = first; l <= last; ++l) {
      o += static_cast<double>(stats.events[l]);
      r += stats.exposure[l];
      ra += stats.exposure[l] * fit.a[l];
      sa += fit.a[l];
    }
    if (refit && r > 0.0)
      rates.push_back(o / r);
    else
      rates.push_back(std::exp(r > 0.0 ? ra / r : sa / static_cast<double>(last - first + 1)));
  };

  std::size_t first = 0;
  for (std::size_t cut : breakpoint_indices(fit)) {
    close_segment(first, cut);
    breaks.push_back(cuts[cut]);
    first = cut + 1;
  }
  close_segment(first, L - 1);
  return SegmentedHazard(std::move(breaks), std::move(rates));
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

SegmentedHazard select_and_extract(const SurvDataset& data, const CutGrid& grid, const PenaltyGrid& pens,
                                   Criterion criterion, std::size_t folds, std::uint64_t cv_seed, bool refit,
                                   const FitOptions& opts) {
  const auto stats = sufficient_stats(data, grid);
  auto path = regularization_path(stats, pens, opts);
  if (criterion == Criterion::bic)
    attach_bic(path, data.size());
  else
    attach_cv(path, cross_validate(data, grid, pens, folds, cv_seed, opts));
  const auto sel = select_penalty(path, criterion);
  return extract_segments(*sel.fit, grid, stats, refit);
}

BootstrapBands bootstrap_bands(const SurvDataset& data, const CutGrid& grid, const PenaltyGrid& pens,
                               std::span<const double> time_grid, const BootstrapOptions& options) {
  if (options.replicates < 2) throw std::invalid_argument("bootstrap needs at least 2 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  if (time_grid.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 0; i < time_grid.size(); ++i)
    if (!(time_grid[i] >= 0.0) || (i > 0 && time_grid[i] <= time_grid[i - 1]))
      throw std::invalid_argument("time grid must be non-negative and increasing");

  const std::size_t B = options.replicates, n = data.size();
  std::atomic<long long> spare_attempts{static_cast<long long>(B)};
  std::vector<std::vector<double>> curves(B);

  parallel_for(B, [&](std::size_t b) {
    Rng rng(stream_seed(options.seed, b));
    std::vector<std::size_t> rows(n);
    while (true) {
      for (auto& r : rows) r = rng.below(n);
      try {
        const auto seg = select_and_extract(data.select(rows), grid, pens, options.criterion, options.folds,
                                            rng.next(), options.refit, options.fit);
        auto& curve = curves[b];
        curve.reserve(time_grid.size());
        for (double t : time_grid) curve.push_back(seg.survival(t));
        return;
      } catch (const std::exception& e) {
        if (spare_attempts.fetch_sub(1) <= 0)
          throw std::runtime_error(std::string("bootstrap replicates keep failing: ") + e.what());
      }
    }
  });

  BootstrapBands out;
  out.time_grid.assign(time_grid.begin(), time_grid.end());
  out.level = options.level;
  out.replicates = B;
  const double lo_p = 0.5 * (1.0 - options.level), hi_p = 0.5 * (1.0 + options.level);
  std::vector<double> column(B);
  for (std::size_t j = 0; j < time_grid.size(); ++j) {
    for (std::size_t b = 0; b < B; ++b) column[b] = curves[b][j];
    out.median.push_back(empirical_quantile(column, 0.5));
    out.lower.push_back(empirical_quantile(column, lo_p));
    out.upper.push_back(empirical_quantile(column, hi_p));
  }
  out.curves = std::move(curves);
  return out;
}

std::optional<double> survival_quantile(std::span<const double> times, std::span<const double> survival,
                                        double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must be in (0, 1)");
  if (times.size() != survival.size()) throw std::invalid_argument("curve length mismatch");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (survival[i] <= 1.0 - p) return times[i];
  return std::nullopt;
}

std::optional<double> survival_quantile(const SegmentedHazard& seg, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must be in (0, 1)");
  const double target = -std::log1p(-p);
  const auto breaks = seg.breakpoints();
  const auto rates = seg.rates();
  double total = 0.0, lo = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double hi = k < breaks.size() ? breaks[k] : std::numeric_limits<double>::infinity();
    if (rates[k] > 0.0) {
      const double t = lo + (target - total) / rates[k];
      if (t <= hi) return t;
    }
    if (std::isinf(hi)) break;
    total += rates[k] * (hi - lo);
    lo = hi;
  }
  return std::nullopt;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
}

std::size_t KaplanMeier::index_at(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
}

std::optional<double> KaplanMeier::quantile(double p) const { return survival_quantile(times, survival, p); }

KaplanMeier kaplan_meier(const SurvDataset& data, double level) {
  const double z = normal_critical_value(level);
  std::vector<SurvObs> obs(data.observations().begin(), data.observations().end());
  std::sort(obs.begin(), obs.end(), [](const SurvObs& x, const SurvObs& y) { return x.time < y.time; });

  KaplanMeier km;
  km.level = level;
  km.times = {0.0};
  km.survival = {1.0};
  km.lower = {1.0};
  km.upper = {1.0};
  km.at_risk = {obs.size()};
  km.events = {0};

  double s = 1.0, greenwood = 0.0;
  std::size_t i = 0;
  while (i < obs.size()) {
    const double t = obs[i].time;
    const std::size_t at_risk = obs.size() - i;
    std::size_t d = 0, j = i;
    for (; j < obs.size() && obs[j].time == t; ++j) d += static_cast<std::size_t>(obs[j].status);
    const bool last = j == obs.size();
    if (d > 0 || last) {
      if (d > 0) {
        s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
        if (d < at_risk)
          greenwood += static_cast<double>(d) / (static_cast<double>(at_risk) * static_cast<double>(at_risk - d));
        else
          greenwood = std::numeric_limits<double>::infinity();
      }
      double lo = s, hi = s;
      if (s > 0.0 && std::isfinite(greenwood)) {
        const double half = z * std::sqrt(greenwood);
        lo = std::clamp(s * std::exp(-half), 0.0, 1.0);
        hi = std::clamp(s * std::exp(half), 0.0, 1.0);
      } else if (s == 0.0) {
        lo = hi = 0.0;
      }
      km.times.push_back(t);
      km.survival.push_back(s);
      km.lower.push_back(lo);
      km.upper.push_back(hi);
      km.at_risk.push_back(at_risk);
      km.events.push_back(d);
    }
    i = j;
  }
  return km;
}

}  // namespace pchaz
