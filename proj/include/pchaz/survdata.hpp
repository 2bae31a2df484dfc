#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pchaz {

/// One right-censored observation: follow-up time and event indicator
/// (1 = event observed, 0 = censored).
struct SurvObs {
  double time = 0.0;
  int status = 0;
};

/// A validated, immutable collection of observations. Row order is kept and
/// duplicates are allowed (bootstrap resamples rely on both).
class SurvDataset {
 public:
  explicit SurvDataset(std::vector<SurvObs> observations);

  std::span<const SurvObs> observations() const { return obs_; }
  const SurvObs& operator[](std::size_t i) const { return obs_[i]; }
  std::size_t size() const { return obs_.size(); }

  /// Largest follow-up time; the default evaluation horizon.
  double max_time() const { return max_time_; }
  std::size_t event_count() const { return events_; }

  /// Subset (with repetition) by row index.
  SurvDataset select(std::span<const std::size_t> rows) const;

 private:
  std::vector<SurvObs> obs_;
  double max_time_ = 0.0;
  std::size_t events_ = 0;
};

/// Parses delimited text with a header row. The delimiter is a comma unless
/// the header contains a tab. Errors carry the 1-based data row index.
SurvDataset parse_dataset(std::string_view text,
                          std::string_view time_column = "time",
                          std::string_view status_column = "status");

SurvDataset read_dataset(const std::filesystem::path& path,
                         std::string_view time_column = "time",
                         std::string_view status_column = "status");

/// Arithmetic cut lattice start, start + step, ... strictly below `end`.
struct CutRange {
  double start = 0.0;
  double end = 0.0;
  double step = 0.0;
};

/// Finite cuts c_1 < ... < c_{L-1}; c_0 = 0 and c_L = +inf are implicit.
/// Bin l (0-based) is the interval (c_l, c_{l+1}], closed on the right.
class CutGrid {
 public:
  static CutGrid from_list(std::vector<double> cuts);
  static CutGrid from_range(const CutRange& range);
  /// "a,b,c" (explicit list) or "start:end:step" (range).
  static CutGrid parse(std::string_view spec);

  std::span<const double> finite_cuts() const { return cuts_; }
  std::size_t bins() const { return cuts_.size() + 1; }
  double lower(std::size_t bin) const;
  /// +inf for the last bin.
  double upper(std::size_t bin) const;
  /// Index of the bin (c_{l-1}, c_l] that contains t > 0.
  std::size_t bin_of(double t) const;

 private:
  explicit CutGrid(std::vector<double> cuts) : cuts_(std::move(cuts)) {}
  std::vector<double> cuts_;
};

/// Per-bin event counts O_l and exposure R_l.
struct SufficientStats {
  std::vector<std::int64_t> events;
  std::vector<double> exposure;
  std::size_t n = 0;

  std::size_t bins() const { return events.size(); }
  std::int64_t total_events() const;
  double total_exposure() const;
};

SufficientStats sufficient_stats(const SurvDataset& data, const CutGrid& grid);

/// Element-wise sum; used to check additivity over disjoint subsets.
SufficientStats operator+(const SufficientStats& lhs, const SufficientStats& rhs);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace pchaz
