#include "pchaz/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pchaz/parallel.hpp"

namespace pchaz {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};

constexpr double kSimpsonStep = 0.01;

}  // namespace

double hazard_at(const Hazard& h, double t) {
  return std::visit(overloaded{[&](const SegmentedHazard& s) { return s.hazard(t); },
                               [&](const Weibull& w) {
                                 return w.shape * std::pow(t / w.scale, w.shape - 1.0) / w.scale;
                               }},
                    h);
}

double cumulative_hazard(const Hazard& h, double t) {
  return std::visit(overloaded{[&](const SegmentedHazard& s) { return s.cumulative_hazard(t); },
                               [&](const Weibull& w) { return std::pow(t / w.scale, w.shape); }},
                    h);
}

double survival(const Hazard& h, double t) { return std::exp(-cumulative_hazard(h, t)); }

TrueModel scenario_pch() {
  return {"pch", SegmentedHazard({20.0, 40.0, 50.0, 70.0}, {0.0, 0.005, 0.01, 0.02, 0.04}),
          UniformCensoring{70.0, 90.0}, 80.0};
}

TrueModel scenario_weibull() { return {"weibull", Weibull{5.0, 60.0}, Weibull{30.0, 60.0}, 60.0}; }

double sample_event_time(const Hazard& h, Rng& rng) {
  const double target = -std::log(rng.uniform());
  return std::visit(
      overloaded{[&](const SegmentedHazard& s) {
                   const auto breaks = s.breakpoints();
                   const auto rates = s.rates();
                   double acc = 0.0, lo = 0.0;
                   for (std::size_t k = 0; k < rates.size(); ++k) {
                     const double hi = k < breaks.size() ? breaks[k] : std::numeric_limits<double>::infinity();
                     // Zero-rate segments consume no probability mass.
                     if (rates[k] > 0.0) {
                       const double t = lo + (target - acc) / rates[k];
                       if (t <= hi) return t;
                       acc += rates[k] * (hi - lo);
                     }
                     lo = hi;
                   }
                   throw std::invalid_argument("improper distribution: hazard vanishes on the last segment");
                 },
                 [&](const Weibull& w) { return w.scale * std::pow(target, 1.0 / w.shape); }},
      h);
}

double sample_censoring_time(const Censoring& c, Rng& rng) {
  return std::visit(overloaded{[&](const UniformCensoring& u) { return rng.uniform(u.lo, u.hi); },
                               [&](const Weibull& w) { return sample_event_time(Hazard{w}, rng); }},
                    c);
}

SurvObs apply_censoring(double event_time, double censoring_time) {
  if (!(event_time > 0.0) || !(censoring_time > 0.0)) throw std::invalid_argument("times must be positive");
  return event_time <= censoring_time ? SurvObs{event_time, 1} : SurvObs{censoring_time, 0};
}

SurvDataset simulate_dataset(const TrueModel& model, std::size_t n, Rng& rng) {
  std::vector<SurvObs> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = sample_event_time(model.hazard, rng);
    const double c = sample_censoring_time(model.censoring, rng);
    obs.push_back(apply_censoring(t, c));
  }
  return SurvDataset(std::move(obs));
}

double total_variation(const Hazard& f, const Hazard& g, double t_max) {
  if (!(t_max > 0.0)) throw std::invalid_argument("total variation needs t_max > 0");
  std::vector<double> knots{0.0, t_max};
  for (const Hazard* h : {&f, &g})
    if (const auto* s = std::get_if<SegmentedHazard>(h))
      for (double b : s->breakpoints())
        if (b > 0.0 && b < t_max) knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  const bool both_steps = std::holds_alternative<SegmentedHazard>(f) && std::holds_alternative<SegmentedHazard>(g);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double lo = knots[k], hi = knots[k + 1], mid = 0.5 * (lo + hi);
    // Step functions are constant on (lo, hi]; read them at the midpoint so
    // the right-closed convention never leaks a neighbour's value.
    auto piece = [&](const Hazard& h, double t) {
      return std::holds_alternative<SegmentedHazard>(h) ? hazard_at(h, mid) : hazard_at(h, t);
    };
    if (both_steps) {
      total += std::abs(piece(f, mid) - piece(g, mid)) * (hi - lo);
      continue;
    }
    auto m = static_cast<std::size_t>(std::ceil((hi - lo) / kSimpsonStep));
    m += m % 2;
    const double step = (hi - lo) / static_cast<double>(m);
    double s = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double t = lo + static_cast<double>(i) * step;
      const double v = std::abs(piece(f, t) - piece(g, t));
      s += (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * v;
    }
    total += s * step / 3.0;
  }
  return total;
}

McSummary monte_carlo_experiment(const TrueModel& model, const CutGrid& grid, const PenaltyGrid& pens,
                                 const McConfig& config) {
  if (config.replicates < 1) throw std::invalid_argument("need at least one replicate");
  struct Outcome {
    bool ok = false;
    std::size_t cuts = 0;
    double tv = 0.0;
    double tv_ridge = 0.0;
    double pen = 0.0;
  };
  std::vector<Outcome> outcomes(config.replicates);

  parallel_for(config.replicates, [&](std::size_t r) {
    Rng rng(stream_seed(config.seed, r));
    auto& out = outcomes[r];
    try {
      const auto data = simulate_dataset(model, config.n, rng);
      const auto stats = sufficient_stats(data, grid);
      auto path = regularization_path(stats, pens, config.fit);
      if (config.criterion == Criterion::bic)
        attach_bic(path, data.size());
      else
        attach_cv(path, cross_validate(data, grid, pens, config.folds, rng.next(), config.fit));
      const auto sel = select_penalty(path, config.criterion);
      const auto seg = extract_segments(*sel.fit, grid, stats, config.refit);
      out.cuts = seg.breakpoints().size();
      out.tv = total_variation(model.hazard, seg, model.tv_horizon);
      out.pen = sel.penalty;
      if (config.ridge_pen) {
        const auto ridge = ridge_fit(stats, *config.ridge_pen, config.fit);
        std::vector<double> rates(ridge.a.size());
        for (std::size_t l = 0; l < rates.size(); ++l) rates[l] = std::exp(ridge.a[l]);
        out.tv_ridge = total_variation(model.hazard, SegmentedHazard::from_bins(grid, rates), model.tv_horizon);
      }
      out.ok = true;
    } catch (const std::exception&) {
      out.ok = false;
    }
  });

  McSummary s;
  s.n = config.n;
  s.replicates = config.replicates;
  s.criterion = config.criterion;
  double tv = 0.0, tv_ridge = 0.0;
  std::size_t ok = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++s.failed;
      continue;
    }
    ++ok;
    s.cut_count_distribution[std::min(o.cuts, kCutBuckets - 1)] += 1.0;
    tv += o.tv;
    tv_ridge += o.tv_ridge;
    s.selected_penalties.push_back(o.pen);
  }
  if (ok == 0) throw std::runtime_error("every Monte-Carlo replicate failed");
  for (auto& p : s.cut_count_distribution) p /= static_cast<double>(ok);
  s.mean_tv = tv / static_cast<double>(ok);
  if (config.ridge_pen) s.mean_tv_ridge = tv_ridge / static_cast<double>(ok);
  return s;
}

}  // namespace pchaz
