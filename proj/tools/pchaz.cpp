#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pchaz/commands.hpp"
#include "pchaz/table_io.hpp"

namespace {

struct Shared {
  std::string criterion = "bic";
  std::string out_dir = ".";
};

void add_fit_options(CLI::App& app, pchaz::RunConfig& c) {
  app.add_option("--newton-tol", c.fit.newton_tol, "Newton step tolerance")->capture_default_str();
  app.add_option("--newton-max-iter", c.fit.newton_max_iter, "Newton iteration cap")->capture_default_str();
  app.add_option("--outer-tol", c.fit.outer_tol, "adaptive weight loop tolerance")->capture_default_str();
  app.add_option("--outer-max-iter", c.fit.outer_max_iter, "adaptive weight iteration cap")->capture_default_str();
  app.add_option("--delta", c.fit.delta, "weight smoothing constant")->capture_default_str();
  app.add_option("--max-step-halvings", c.fit.max_step_halvings)->capture_default_str();
}

void add_grid_options(CLI::App& app, pchaz::RunConfig& c, Shared& s) {
  app.add_option("--cuts", c.cuts, "cut points: a,b,c or start:end:step (end exclusive)");
  app.add_option("--pen-min", c.pen_min)->capture_default_str();
  app.add_option("--pen-max", c.pen_max)->capture_default_str();
  app.add_option("--pen-count", c.pen_count)->capture_default_str();
  app.add_option("--criterion", s.criterion, "bic or cv")->capture_default_str();
  app.add_option("--folds", c.folds)->capture_default_str();
  app.add_option("--seed", c.seed)->capture_default_str();
  app.add_flag("--no-refit", [&c](std::int64_t) { c.refit = false; }, "use penalized rates inside segments");
  app.add_option("--out-dir", s.out_dir)->capture_default_str();
  add_fit_options(app, c);
}

void add_data_options(CLI::App& app, pchaz::RunConfig& c) {
  app.add_option("--input", c.input, "CSV or TSV with a header row")->required();
  app.add_option("--time-col", c.time_col)->capture_default_str();
  app.add_option("--status-col", c.status_col)->capture_default_str();
  app.add_option("--time-grid", c.time_grid, "evaluation grid start:end:step (inclusive)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-constant hazard estimation with adaptive ridge selection of cut points"};
  app.set_version_flag("--version", std::string(pchaz::kVersion));
  app.require_subcommand(1);

  pchaz::RunConfig c;
  Shared s;

  auto* fit = app.add_subcommand("fit", "select a penalty and write the segmented hazard");
  add_data_options(*fit, c);
  add_grid_options(*fit, c, s);
  fit->add_flag("--ridge", c.ridge, "fixed-weight ridge fit (needs --pen)");
  fit->add_option("--pen", c.pen, "fit this penalty instead of selecting one");

  auto* path = app.add_subcommand("path", "write the regularization path");
  add_data_options(*path, c);
  add_grid_options(*path, c, s);

  auto* boot = app.add_subcommand("bootstrap", "pairs bootstrap bands for the survival curve");
  add_data_options(*boot, c);
  add_grid_options(*boot, c, s);
  boot->add_option("--boot", c.boot, "replicates")->capture_default_str();
  boot->add_option("--level", c.level)->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo benchmark against a known hazard");
  add_grid_options(*sim, c, s);
  sim->add_option("--scenario", c.scenario, "pch or weibull")->capture_default_str();
  sim->add_option("--n", c.sizes, "sample sizes")->delimiter(',');
  sim->add_option("--reps", c.reps)->capture_default_str();
  sim->add_option("--ridge-pen", c.ridge_pen, "ridge penalty for the weibull comparison")->capture_default_str();
  sim->add_flag("--emit-sample", c.emit_sample, "also write one simulated dataset");
  sim->add_option("--time-grid", c.time_grid, "grid for truth_hazard.csv");

  auto* km = app.add_subcommand("km", "Kaplan-Meier estimate with Greenwood bands");
  add_data_options(*km, c);
  km->add_option("--level", c.level)->capture_default_str();
  km->add_option("--out-dir", s.out_dir)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    c.criterion = pchaz::parse_criterion(s.criterion);
    c.out_dir = s.out_dir;
    pchaz::WrittenFiles files;
    if (*fit) files = pchaz::cmd_fit(c);
    else if (*path) files = pchaz::cmd_path(c);
    else if (*boot) files = pchaz::cmd_bootstrap(c);
    else if (*sim) files = pchaz::cmd_simulate(c);
    else files = pchaz::cmd_km(c);
    for (const auto& f : files) std::cout << f.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "pchaz: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
