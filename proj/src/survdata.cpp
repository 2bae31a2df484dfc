#include "pchaz/survdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pchaz {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(delim, pos);
    out.push_back(trim(line.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

bool is_missing(std::string_view field) {
  return field.empty() || field == "NA" || field == "NaN" || field == "nan" ||
         field == "." || field == "null";
}

std::string row_error(const std::string& what, std::size_t row) {
  return what + " at row " + std::to_string(row);
}

double to_number(std::string_view field, const char* what, std::size_t row) {
  if (is_missing(field)) throw std::invalid_argument(row_error(std::string("missing ") + what, row));
  double value = 0.0;
  const char* begin = field.data();
  if (!field.empty() && field.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument(row_error(std::string("non-numeric ") + what, row));
  return value;
}

std::size_t column_index(const std::vector<std::string_view>& header, std::string_view name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

SurvDataset::SurvDataset(std::vector<SurvObs> observations) : obs_(std::move(observations)) {
  if (obs_.empty()) throw std::invalid_argument("no observations");
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    const auto& o = obs_[i];
    if (!std::isfinite(o.time) || o.time <= 0.0)
      throw std::invalid_argument(row_error("non-positive time", i + 1));
    if (o.status != 0 && o.status != 1) throw std::invalid_argument(row_error("invalid status", i + 1));
    max_time_ = std::max(max_time_, o.time);
    events_ += static_cast<std::size_t>(o.status);
  }
}

SurvDataset SurvDataset::select(std::span<const std::size_t> rows) const {
  std::vector<SurvObs> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(obs_.at(r));
  return SurvDataset(std::move(out));
}

SurvDataset parse_dataset(std::string_view text, std::string_view time_column,
                          std::string_view status_column) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    auto line = text.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty() && line.front() != '#') lines.push_back(line);
    pos = next + 1;
  }
  if (lines.empty()) throw std::invalid_argument("no observations");

  const char delim = lines.front().find('\t') != std::string_view::npos ? '\t' : ',';
  const auto header = split(lines.front(), delim);
  const auto time_idx = column_index(header, time_column);
  const auto status_idx = column_index(header, status_column);

  std::vector<SurvObs> obs;
  obs.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r], delim);
    if (fields.size() != header.size())
      throw std::invalid_argument(row_error("wrong field count", r));
    const double time = to_number(fields[time_idx], "time", r);
    const double status = to_number(fields[status_idx], "status", r);
    if (!std::isfinite(time) || time <= 0.0) throw std::invalid_argument(row_error("non-positive time", r));
    if (status != 0.0 && status != 1.0) throw std::invalid_argument(row_error("invalid status", r));
    obs.push_back({time, static_cast<int>(status)});
  }
  if (obs.empty()) throw std::invalid_argument("no observations");
  return SurvDataset(std::move(obs));
}

SurvDataset read_dataset(const std::filesystem::path& path, std::string_view time_column,
                         std::string_view status_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), time_column, status_column);
}

CutGrid CutGrid::from_list(std::vector<double> cuts) {
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (!std::isfinite(cuts[i]) || cuts[i] <= 0.0)
      throw std::invalid_argument("non-positive cut at position " + std::to_string(i + 1));
    if (i > 0 && cuts[i] <= cuts[i - 1])
      throw std::invalid_argument("cuts not strictly increasing at position " + std::to_string(i + 1));
  }
  return CutGrid(std::move(cuts));
}

CutGrid CutGrid::from_range(const CutRange& r) {
  if (!(r.step > 0.0) || !std::isfinite(r.step)) throw std::invalid_argument("cut step must be positive");
  if (!(r.start > 0.0)) throw std::invalid_argument("non-positive cut at position 1");
  if (!(r.end > r.start)) throw std::invalid_argument("cut range end must exceed start");
  std::vector<double> cuts;
  // Multiply rather than accumulate so lattice points stay exact.
  const double slack = 1e-9 * r.step;
  for (std::size_t k = 0;; ++k) {
    const double c = r.start + static_cast<double>(k) * r.step;
    if (c >= r.end - slack) break;
    cuts.push_back(c);
  }
  return from_list(std::move(cuts));
}

CutGrid CutGrid::parse(std::string_view spec) {
  spec = trim(spec);
  if (spec.empty()) throw std::invalid_argument("empty cut specification");
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw std::invalid_argument("cut range must be start:end:step");
    CutRange r{to_number(parts[0], "cut", 1), to_number(parts[1], "cut", 2), to_number(parts[2], "cut", 3)};
    return from_range(r);
  }
  std::vector<double> cuts;
  std::size_t i = 0;
  for (auto p : split(spec, ',')) cuts.push_back(to_number(p, "cut", ++i));
  return from_list(std::move(cuts));
}

double CutGrid::lower(std::size_t bin) const { return bin == 0 ? 0.0 : cuts_.at(bin - 1); }

double CutGrid::upper(std::size_t bin) const {
  return bin == cuts_.size() ? std::numeric_limits<double>::infinity() : cuts_.at(bin);
}

std::size_t CutGrid::bin_of(double t) const {
  return static_cast<std::size_t>(std::lower_bound(cuts_.begin(), cuts_.end(), t) - cuts_.begin());
}

std::int64_t SufficientStats::total_events() const {
  return std::accumulate(events.begin(), events.end(), std::int64_t{0});
}

double SufficientStats::total_exposure() const {
  CompensatedSum s;
  for (double r : exposure) s.add(r);
  return s.value();
}

SufficientStats sufficient_stats(const SurvDataset& data, const CutGrid& grid) {
  const std::size_t L = grid.bins();
  SufficientStats st;
  st.n = data.size();
  st.events.assign(L, 0);
  st.exposure.assign(L, 0.0);

  // Each observation ending in bin j covers bins < j completely and bin j
  // partially. Count endings per bin, then add full widths by suffix count.
  std::vector<CompensatedSum> partial(L);
  std::vector<std::size_t> ending(L, 0);
  for (const auto& o : data.observations()) {
    const std::size_t j = grid.bin_of(o.time);
    st.events[j] += o.status;
    partial[j].add(o.time - grid.lower(j));
    ++ending[j];
  }
  std::size_t beyond = 0;  // observations ending after bin l
  for (std::size_t l = L; l-- > 0;) {
    double r = partial[l].value();
    if (l + 1 < L) r += static_cast<double>(beyond) * (grid.upper(l) - grid.lower(l));
    st.exposure[l] = r;
    beyond += ending[l];
  }
  return st;
}

SufficientStats operator+(const SufficientStats& lhs, const SufficientStats& rhs) {
  if (lhs.bins() != rhs.bins()) throw std::invalid_argument("bin count mismatch");
  SufficientStats out = lhs;
  out.n += rhs.n;
  for (std::size_t l = 0; l < out.bins(); ++l) {
    out.events[l] += rhs.events[l];
    out.exposure[l] += rhs.exposure[l];
  }
  return out;
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    carry_ += (sum_ - t) + x;
  else
    carry_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace pchaz
