#include "pchaz/commands.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "pchaz/inference.hpp"
#include "pchaz/random.hpp"
#include "pchaz/simbench.hpp"
#include "pchaz/survdata.hpp"
#include "pchaz/table_io.hpp"

namespace pchaz {

namespace {

using json = nlohmann::ordered_json;
using Metadata = std::vector<std::pair<std::string, std::string>>;

constexpr std::size_t kMinBootstrap = 10;
constexpr std::size_t kAutoCuts = 100;
constexpr std::size_t kAutoGridPoints = 201;

std::string auto_cut_spec(double max_time) {
  const double step = max_time / static_cast<double>(kAutoCuts);
  return format_number(step) + ":" + format_number(max_time) + ":" + format_number(step);
}

std::string auto_time_grid(double max_time) {
  return "0:" + format_number(max_time) + ":" + format_number(max_time / static_cast<double>(kAutoGridPoints - 1));
}

struct Resolved {
  std::string cuts;
  std::string time_grid;
};

Metadata describe(const std::string& command, const RunConfig& c, const Resolved& r) {
  Metadata m{{"pchaz", kVersion}, {"command", command}};
  auto add = [&](const std::string& k, std::string v) { m.emplace_back(k, std::move(v)); };
  if (command != "simulate") {
    add("input", c.input.string());
    add("time_col", c.time_col);
    add("status_col", c.status_col);
  }
  add("cuts", r.cuts);
  add("pen_grid", format_number(c.pen_min) + ":" + format_number(c.pen_max) + ":" + std::to_string(c.pen_count));
  add("criterion", std::string(to_string(c.criterion)));
  add("folds", std::to_string(c.folds));
  add("boot", std::to_string(c.boot));
  add("level", format_number(c.level));
  add("seed", std::to_string(c.seed));
  add("ridge", c.ridge ? "true" : "false");
  add("pen", c.pen ? format_number(*c.pen) : "NA");
  add("refit", c.refit ? "true" : "false");
  add("time_grid", r.time_grid);
  add("newton_tol", format_number(c.fit.newton_tol));
  add("newton_max_iter", std::to_string(c.fit.newton_max_iter));
  add("outer_tol", format_number(c.fit.outer_tol));
  add("outer_max_iter", std::to_string(c.fit.outer_max_iter));
  add("delta", format_number(c.fit.delta));
  add("max_step_halvings", std::to_string(c.fit.max_step_halvings));
  if (command == "simulate") {
    add("scenario", c.scenario);
    std::string sizes;
    for (auto n : c.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(n);
    add("sizes", sizes);
    add("reps", std::to_string(c.reps));
    add("ridge_pen", format_number(c.ridge_pen));
  }
  return m;
}

json metadata_json(const Metadata& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

std::filesystem::path prepare_out(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return c.out_dir / name;
}

PenaltyGrid penalty_grid(const RunConfig& c) { return PenaltyGrid::log_spaced(c.pen_min, c.pen_max, c.pen_count); }

struct Inputs {
  SurvDataset data;
  CutGrid grid;
  std::vector<double> times;
  Resolved resolved;
};

Inputs load_inputs(const RunConfig& c) {
  c.fit.validate();
  if (c.input.empty()) throw std::invalid_argument("--input is required");
  auto data = read_dataset(c.input, c.time_col, c.status_col);
  Resolved r{c.cuts.empty() ? auto_cut_spec(data.max_time()) : c.cuts,
             c.time_grid.empty() ? auto_time_grid(data.max_time()) : c.time_grid};
  auto grid = CutGrid::parse(r.cuts);
  auto times = parse_time_grid(r.time_grid);
  return {std::move(data), std::move(grid), std::move(times), std::move(r)};
}

std::vector<double> as_rates(const LogHazard& a) {
  std::vector<double> rates(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) rates[l] = std::exp(a[l]);
  return rates;
}

}  // namespace

std::vector<double> parse_time_grid(const std::string& spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = spec.find(':', pos);
    const auto field = spec.substr(pos, next - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) throw std::invalid_argument("time grid must be start:end:step");
    parts.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 3) throw std::invalid_argument("time grid must be start:end:step");
  const double start = parts[0], end = parts[1], step = parts[2];
  if (!(start >= 0.0) || !(end > start) || !(step > 0.0)) throw std::invalid_argument("invalid time grid bounds");
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double t = start + static_cast<double>(k) * step;
    if (t > end + 1e-9 * step) break;
    grid.push_back(std::min(t, end));
  }
  return grid;
}

WrittenFiles cmd_fit(const RunConfig& c) {
  auto in = load_inputs(c);
  const auto stats = sufficient_stats(in.data, in.grid);
  const auto meta = describe("fit", c, in.resolved);

  PenalizedFit fit;
  std::string criterion = std::string(to_string(c.criterion));
  std::optional<SegmentedHazard> seg;
  if (c.ridge) {
    if (!c.pen) throw std::invalid_argument("--ridge needs --pen");
    fit = ridge_fit(stats, *c.pen, c.fit);
    seg = SegmentedHazard::from_bins(in.grid, as_rates(fit.a));
    criterion = "none";
  } else if (c.pen) {
    fit = adaptive_ridge_fit(stats, *c.pen, c.fit);
    seg = extract_segments(fit, in.grid, stats, c.refit);
    criterion = "none";
  } else {
    auto path = regularization_path(stats, penalty_grid(c), c.fit);
    attach_bic(path, in.data.size());
    if (c.criterion == Criterion::cv)
      attach_cv(path, cross_validate(in.data, in.grid, path.grid, c.folds, c.seed, c.fit));
    fit = *select_penalty(path, c.criterion).fit;
    seg = extract_segments(fit, in.grid, stats, c.refit);
  }

  const int d = c.ridge ? static_cast<int>(seg->segments()) : model_dimension(fit);
  json j;
  j["meta"] = metadata_json(meta);
  j["breakpoints"] = std::vector<double>(seg->breakpoints().begin(), seg->breakpoints().end());
  j["rates"] = std::vector<double>(seg->rates().begin(), seg->rates().end());
  j["penalty"] = fit.pen;
  j["criterion"] = criterion;
  j["d"] = d;
  j["loglik"] = fit.loglik;
  j["bic"] = -2.0 * fit.loglik + d * std::log(static_cast<double>(in.data.size()));
  j["converged"] = fit.converged;
  j["n"] = in.data.size();
  j["events"] = in.data.event_count();

  WrittenFiles out;
  out.push_back(prepare_out(c, "fit_segments.json"));
  write_text(out.back(), j.dump(2) + "\n");

  Table bins{meta, {"lower", "upper", "events", "exposure", "log_hazard", "rate", "weight"}, {}};
  for (std::size_t l = 0; l < in.grid.bins(); ++l)
    bins.add_row({in.grid.lower(l), in.grid.upper(l), static_cast<double>(stats.events[l]), stats.exposure[l],
                  fit.a[l], std::exp(fit.a[l]), l < fit.w.size() ? fit.w[l] : std::nan("")});
  out.push_back(prepare_out(c, "fit_bins.csv"));
  bins.write(out.back());

  Table curve{meta, {"t", "hazard", "cumulative_hazard", "survival"}, {}};
  for (double t : in.times) curve.add_row({t, seg->hazard(t), seg->cumulative_hazard(t), seg->survival(t)});
  out.push_back(prepare_out(c, "fit_hazard.csv"));
  curve.write(out.back());
  return out;
}

WrittenFiles cmd_path(const RunConfig& c) {
  auto in = load_inputs(c);
  const auto stats = sufficient_stats(in.data, in.grid);
  auto path = regularization_path(stats, penalty_grid(c), c.fit);
  attach_bic(path, in.data.size());
  if (c.criterion == Criterion::cv)
    attach_cv(path, cross_validate(in.data, in.grid, path.grid, c.folds, c.seed, c.fit));

  auto meta = describe("path", c, in.resolved);
  if (path.bic_index) meta.emplace_back("selected_bic_penalty", format_number(path.grid[*path.bic_index]));
  if (path.cv_index) meta.emplace_back("selected_cv_penalty", format_number(path.grid[*path.cv_index]));
  Table t{meta, {"penalty", "loglik", "d", "bic", "cv"}, {}};
  for (std::size_t k = 0; k < path.grid.size(); ++k) {
    const auto& f = path.fits[k];
    t.add_row({path.grid[k], f ? f->loglik : std::nan(""), f ? static_cast<double>(model_dimension(*f)) : std::nan(""),
               (*path.bic)[k], path.cv ? (*path.cv)[k] : std::nan("")});
  }
  WrittenFiles out{prepare_out(c, "path.csv")};
  t.write(out.back());
  return out;
}

WrittenFiles cmd_bootstrap(const RunConfig& c) {
  if (c.boot < kMinBootstrap)
    throw std::invalid_argument("--boot must be at least " + std::to_string(kMinBootstrap));
  auto in = load_inputs(c);
  BootstrapOptions opts;
  opts.criterion = c.criterion;
  opts.replicates = c.boot;
  opts.level = c.level;
  opts.seed = c.seed;
  opts.folds = c.folds;
  opts.refit = c.refit;
  opts.fit = c.fit;
  const auto bands = bootstrap_bands(in.data, in.grid, penalty_grid(c), in.times, opts);

  auto meta = describe("bootstrap", c, in.resolved);
  meta.emplace_back("B", std::to_string(bands.replicates));
  for (double p : {0.25, 0.5}) {
    const auto q = survival_quantile(bands.time_grid, bands.median, p);
    std::string v = "beyond horizon";
    if (q) {
      const auto j = static_cast<std::size_t>(std::find(bands.time_grid.begin(), bands.time_grid.end(), *q) -
                                              bands.time_grid.begin());
      v = "t=" + format_number(*q) + " median=" + format_number(bands.median[j]) +
          " lower=" + format_number(bands.lower[j]) + " upper=" + format_number(bands.upper[j]);
    }
    meta.emplace_back("quantile_" + format_number(p), v);
  }
  Table t{meta, {"t", "median", "lower", "upper"}, {}};
  for (std::size_t j = 0; j < bands.time_grid.size(); ++j)
    t.add_row({bands.time_grid[j], bands.median[j], bands.lower[j], bands.upper[j]});
  WrittenFiles out{prepare_out(c, "bands.csv")};
  t.write(out.back());
  return out;
}

WrittenFiles cmd_km(const RunConfig& c) {
  auto in = load_inputs(c);
  const auto km = kaplan_meier(in.data, c.level);
  auto meta = describe("km", c, in.resolved);
  for (double p : {0.25, 0.5}) {
    const auto q = km.quantile(p);
    std::string v = "beyond horizon";
    if (q) {
      const auto j = km.index_at(*q);
      v = "t=" + format_number(*q) + " survival=" + format_number(km.survival[j]) +
          " lower=" + format_number(km.lower[j]) + " upper=" + format_number(km.upper[j]);
    }
    meta.emplace_back("quantile_" + format_number(p), v);
  }
  Table t{meta, {"t", "survival", "lower", "upper", "at_risk", "events"}, {}};
  for (std::size_t j = 0; j < km.times.size(); ++j)
    t.add_row({km.times[j], km.survival[j], km.lower[j], km.upper[j], static_cast<double>(km.at_risk[j]),
               static_cast<double>(km.events[j])});
  WrittenFiles out{prepare_out(c, "km.csv")};
  t.write(out.back());
  return out;
}

WrittenFiles cmd_simulate(const RunConfig& c) {
  c.fit.validate();
  if (c.scenario != "pch" && c.scenario != "weibull")
    throw std::invalid_argument("unknown scenario '" + c.scenario + "'");
  const TrueModel model = c.scenario == "pch" ? scenario_pch() : scenario_weibull();
  if (c.sizes.empty()) throw std::invalid_argument("--n needs at least one sample size");
  const bool with_ridge = c.scenario == "weibull";

  Resolved r{c.cuts.empty() ? "1:100:1" : c.cuts, c.time_grid.empty() ? "0:100:0.5" : c.time_grid};
  const auto grid = CutGrid::parse(r.cuts);
  const auto pens = penalty_grid(c);
  const auto meta = describe("simulate", c, r);

  std::vector<McSummary> summaries;
  for (auto n : c.sizes) {
    McConfig mc;
    mc.n = n;
    mc.replicates = c.reps;
    mc.criterion = c.criterion;
    mc.folds = c.folds;
    mc.seed = stream_seed(c.seed, n);
    mc.refit = c.refit;
    mc.fit = c.fit;
    if (with_ridge) mc.ridge_pen = c.ridge_pen;
    summaries.push_back(monte_carlo_experiment(model, grid, pens, mc));
  }

  std::vector<std::string> size_cols;
  for (auto n : c.sizes) size_cols.push_back("n=" + std::to_string(n));

  Table cuts{meta, {"cuts"}, {}};
  cuts.columns.insert(cuts.columns.end(), size_cols.begin(), size_cols.end());
  for (std::size_t b = 0; b < kCutBuckets; ++b) {
    std::vector<std::string> row{b + 1 == kCutBuckets ? std::to_string(b) + "+" : std::to_string(b)};
    for (const auto& s : summaries) row.push_back(format_number(s.cut_count_distribution[b]));
    cuts.rows.push_back(std::move(row));
  }

  Table tv{meta, {"estimator"}, {}};
  tv.columns.insert(tv.columns.end(), size_cols.begin(), size_cols.end());
  std::vector<std::string> ar{"adaptive_ridge_" + std::string(to_string(c.criterion))};
  for (const auto& s : summaries) ar.push_back(format_number(s.mean_tv));
  tv.rows.push_back(std::move(ar));
  if (with_ridge) {
    std::vector<std::string> rr{"ridge_pen" + format_number(c.ridge_pen)};
    for (const auto& s : summaries) rr.push_back(format_number(*s.mean_tv_ridge));
    tv.rows.push_back(std::move(rr));
  }

  json j;
  j["meta"] = metadata_json(meta);
  j["scenario"] = c.scenario;
  j["criterion"] = to_string(c.criterion);
  j["tv_horizon"] = model.tv_horizon;
  j["results"] = json::array();
  for (const auto& s : summaries) {
    json e;
    e["n"] = s.n;
    e["replicates"] = s.replicates;
    e["failed"] = s.failed;
    e["cut_count_distribution"] = s.cut_count_distribution;
    e["mean_tv"] = s.mean_tv;
    if (s.mean_tv_ridge) e["mean_tv_ridge"] = *s.mean_tv_ridge;
    j["results"].push_back(std::move(e));
  }

  Table truth{meta, {"t", "hazard", "survival"}, {}};
  for (double t : parse_time_grid(r.time_grid)) truth.add_row({t, hazard_at(model.hazard, t), survival(model.hazard, t)});

  WrittenFiles out{prepare_out(c, "simulate_cuts.csv"), prepare_out(c, "simulate_tv.csv"),
                   prepare_out(c, "simulate_summary.json"), prepare_out(c, "truth_hazard.csv")};
  cuts.write(out[0]);
  tv.write(out[1]);
  write_text(out[2], j.dump(2) + "\n");
  truth.write(out[3]);

  if (c.emit_sample) {
    Rng rng(stream_seed(c.seed, 0x5a5a5a5aULL));
    const auto data = simulate_dataset(model, c.sizes.front(), rng);
    Table sample{meta, {"time", "status"}, {}};
    for (const auto& o : data.observations()) sample.add_row({o.time, static_cast<double>(o.status)});
    out.push_back(prepare_out(c, "sample.csv"));
    sample.write(out.back());
  }
  return out;
}

}  // namespace pchaz
