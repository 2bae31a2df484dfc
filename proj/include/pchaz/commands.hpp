#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pchaz/pathsel.hpp"
#include "pchaz/solver.hpp"

namespace pchaz {

inline constexpr std::uint64_t kDefaultSeed = 20160601;

/// Resolved settings shared by every subcommand.
struct RunConfig {
  std::filesystem::path input;
  std::string time_col = "time";
  std::string status_col = "status";
  /// "a,b,c" or "start:end:step"; empty means 99 equal cuts below max time.
  std::string cuts;
  double pen_min = 0.1;
  double pen_max = 1000.0;
  std::size_t pen_count = 100;
  Criterion criterion = Criterion::bic;
  std::size_t folds = 10;
  std::size_t boot = 100;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  /// Fixed-weight ridge variant; requires `pen`.
  bool ridge = false;
  /// Fit a single penalty instead of selecting along the path.
  std::optional<double> pen;
  bool refit = true;
  std::filesystem::path out_dir = ".";
  /// "start:end:step", inclusive; empty means 201 points on [0, max time].
  std::string time_grid;
  FitOptions fit;

  // simulate
  std::string scenario = "pch";
  std::vector<std::size_t> sizes = {100};
  std::size_t reps = 100;
  double ridge_pen = 40.0;
  bool emit_sample = false;
};

/// Every path written by a command.
using WrittenFiles = std::vector<std::filesystem::path>;

/// Path, selection, segment extraction. Writes fit_segments.json,
/// fit_bins.csv and fit_hazard.csv.
WrittenFiles cmd_fit(const RunConfig& config);
/// Writes path.csv (penalty, loglik, d, bic, cv).
WrittenFiles cmd_path(const RunConfig& config);
/// Writes bands.csv (t, median, lower, upper).
WrittenFiles cmd_bootstrap(const RunConfig& config);
/// Writes simulate_cuts.csv, simulate_tv.csv, simulate_summary.json,
/// truth_hazard.csv and optionally sample.csv.
WrittenFiles cmd_simulate(const RunConfig& config);
/// Writes km.csv (t, survival, lower, upper, at_risk, events).
WrittenFiles cmd_km(const RunConfig& config);

/// Inclusive arithmetic grid parsed from "start:end:step".
std::vector<double> parse_time_grid(const std::string& spec);

}  // namespace pchaz
