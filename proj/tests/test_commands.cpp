#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pchaz/commands.hpp"
#include "pchaz/table_io.hpp"
#include "test_util.hpp"

using namespace pchaz;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pchaz_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    REQUIRE(it != header.end());
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

Csv read_csv(const fs::path& p) {
  Csv c;
  std::stringstream ss(slurp(p));
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("#", 0) == 0)
      c.meta.push_back(line);
    else if (c.header.empty())
      c.header = split(line);
    else
      c.rows.push_back(split(line));
  }
  return c;
}

fs::path write_sample(const fs::path& dir, std::size_t n, std::uint64_t seed) {
  auto d = testutil::pch_sample(n, seed);
  Table t{{}, {"time", "status"}, {}};
  for (const auto& o : d.observations()) t.add_row({o.time, static_cast<double>(o.status)});
  auto p = dir / "data.csv";
  t.write(p);
  return p;
}

RunConfig base(const fs::path& input, const fs::path& out) {
  RunConfig c;
  c.input = input;
  c.out_dir = out;
  c.cuts = "1:100:1";
  c.pen_count = 40;
  return c;
}

}  // namespace

TEST_CASE("time grid parsing is inclusive") {
  auto g = parse_time_grid("0:10:2.5");
  CHECK(g == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
  CHECK(parse_time_grid("0:1:0.1").size() == 11);
  CHECK_THROWS(parse_time_grid("0:10"));
  CHECK_THROWS(parse_time_grid("0:x:1"));
  CHECK_THROWS(parse_time_grid("5:1:1"));
}

TEST_CASE("fit writes a self-describing segment record") {
  TempDir tmp("fit");
  auto c = base(write_sample(tmp.path, 100, 61), tmp.path / "out");
  auto files = cmd_fit(c);
  REQUIRE(files.size() == 3);
  auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "fit_segments.json"));
  CHECK(j["meta"]["command"] == "fit");
  CHECK(j["meta"]["pchaz"] == kVersion);
  CHECK(j["meta"]["seed"] == std::to_string(kDefaultSeed));
  CHECK(j["breakpoints"].size() + 1 == j["rates"].size());
  CHECK(j["breakpoints"].size() <= 6);
  CHECK(j["penalty"].get<double>() > 0.0);
  CHECK(j["d"].get<int>() == static_cast<int>(j["rates"].size()));

  auto bins = read_csv(tmp.path / "out" / "fit_bins.csv");
  CHECK(bins.rows.size() == 100);
  CHECK(bins.rows.back()[bins.col("upper")] == "Inf");
  CHECK(bins.rows.back()[bins.col("weight")] == "NA");
  CHECK(std::any_of(bins.meta.begin(), bins.meta.end(), [](auto& m) { return m == "# cuts: 1:100:1"; }));

  auto curve = read_csv(tmp.path / "out" / "fit_hazard.csv");
  CHECK(curve.rows.size() == 201);
  CHECK(curve.rows.front()[curve.col("survival")] == "1");
}

TEST_CASE("fit with a fixed penalty and the ridge variant") {
  TempDir tmp("fitpen");
  auto c = base(write_sample(tmp.path, 100, 62), tmp.path);
  c.pen = 1000.0;
  cmd_fit(c);
  auto j = nlohmann::json::parse(slurp(tmp.path / "fit_segments.json"));
  CHECK(j["rates"].size() == 1);
  CHECK(j["criterion"] == "none");

  c.ridge = true;
  c.pen = 40.0;
  cmd_fit(c);
  auto r = nlohmann::json::parse(slurp(tmp.path / "fit_segments.json"));
  CHECK(r["rates"].size() > 5);
  c.pen.reset();
  CHECK_THROWS_WITH(cmd_fit(c), "--ridge needs --pen");
}

TEST_CASE("empty and malformed inputs are reported") {
  TempDir tmp("bad");
  auto empty = tmp.path / "empty.csv";
  write_text(empty, "");
  auto c = base(empty, tmp.path);
  CHECK_THROWS_WITH(cmd_fit(c), "no observations");
  c.input = tmp.path / "missing.csv";
  CHECK_THROWS(cmd_km(c));
  c.input.clear();
  CHECK_THROWS_WITH(cmd_path(c), "--input is required");
}

TEST_CASE("path table agrees with the fit selection") {
  TempDir tmp("path");
  auto c = base(write_sample(tmp.path, 100, 63), tmp.path);
  c.pen_count = 100;
  cmd_path(c);
  auto p = read_csv(tmp.path / "path.csv");
  REQUIRE(p.rows.size() == 100);
  CHECK(p.header == std::vector<std::string>{"penalty", "loglik", "d", "bic", "cv"});
  CHECK(p.rows[0][p.col("cv")] == "NA");

  std::size_t best = 0;
  for (std::size_t k = 0; k < p.rows.size(); ++k)
    if (std::stod(p.rows[k][3]) <= std::stod(p.rows[best][3])) best = k;
  cmd_fit(c);
  auto j = nlohmann::json::parse(slurp(tmp.path / "fit_segments.json"));
  CHECK(std::stod(p.rows[best][0]) == j["penalty"].get<double>());

  c.criterion = Criterion::cv;
  c.pen_count = 20;
  cmd_path(c);
  auto cv = read_csv(tmp.path / "path.csv");
  for (const auto& row : cv.rows) CHECK(row[cv.col("cv")] != "NA");
}

TEST_CASE("bootstrap command") {
  TempDir tmp("boot");
  auto c = base(write_sample(tmp.path, 80, 64), tmp.path);
  c.boot = 2;
  CHECK_THROWS_WITH(cmd_bootstrap(c), "--boot must be at least 10");
  c.boot = 10;
  c.time_grid = "0:80:10";
  cmd_bootstrap(c);
  auto b = read_csv(tmp.path / "bands.csv");
  CHECK(b.header == std::vector<std::string>{"t", "median", "lower", "upper"});
  CHECK(b.rows.size() == 9);
  CHECK(std::any_of(b.meta.begin(), b.meta.end(), [](auto& m) { return m.rfind("# quantile_0.5: ", 0) == 0; }));
}

TEST_CASE("simulate command layouts") {
  TempDir tmp("sim");
  RunConfig c;
  c.out_dir = tmp.path;
  c.sizes = {60, 120};
  c.reps = 4;
  c.pen_count = 20;
  auto files = cmd_simulate(c);
  CHECK(files.size() == 4);
  auto cuts = read_csv(tmp.path / "simulate_cuts.csv");
  CHECK(cuts.header == std::vector<std::string>{"cuts", "n=60", "n=120"});
  REQUIRE(cuts.rows.size() == 6);
  CHECK(cuts.rows.back()[0] == "5+");
  for (std::size_t col = 1; col <= 2; ++col) {
    double sum = 0.0;
    for (const auto& r : cuts.rows) sum += std::stod(r[col]);
    CHECK(sum == doctest::Approx(1.0));
  }
  CHECK(read_csv(tmp.path / "simulate_tv.csv").rows.size() == 1);
  auto summary = nlohmann::json::parse(slurp(tmp.path / "simulate_summary.json"));
  CHECK(summary["results"].size() == 2);

  c.scenario = "weibull";
  c.sizes = {60};
  c.emit_sample = true;
  files = cmd_simulate(c);
  CHECK(files.size() == 5);
  auto tv = read_csv(tmp.path / "simulate_tv.csv");
  REQUIRE(tv.rows.size() == 2);
  CHECK(tv.rows[1][0] == "ridge_pen40");
  CHECK(read_csv(tmp.path / "sample.csv").rows.size() == 60);

  c.scenario = "gamma";
  CHECK_THROWS(cmd_simulate(c));
}

TEST_CASE("km command") {
  TempDir tmp("km");
  auto three = tmp.path / "three.csv";
  write_text(three, "time,status\n1,1\n2,1\n3,1\n");
  auto c = base(three, tmp.path);
  cmd_km(c);
  auto k = read_csv(tmp.path / "km.csv");
  CHECK(k.rows.size() == 4);
  CHECK(k.rows.back()[k.col("survival")] == "0");

  auto cens = tmp.path / "cens.csv";
  write_text(cens, "time,status\n1,0\n2,0\n3,0\n");
  c.input = cens;
  cmd_km(c);
  auto f = read_csv(tmp.path / "km.csv");
  for (const auto& r : f.rows) CHECK(r[f.col("survival")] == "1");
}

TEST_CASE("every command is byte-deterministic") {
  TempDir tmp("det");
  auto input = write_sample(tmp.path, 80, 65);
  auto run = [&](const std::string& tag, auto cmd, RunConfig c) {
    c.out_dir = tmp.path / tag;
    auto files = cmd(c);
    std::vector<std::string> bytes;
    for (const auto& f : files) bytes.push_back(slurp(f));
    return bytes;
  };
  auto c = base(input, tmp.path);
  c.boot = 10;
  c.criterion = Criterion::cv;
  c.folds = 5;
  c.sizes = {50};
  c.reps = 3;
  c.pen_count = 15;
  CHECK(run("fa", cmd_fit, c) == run("fb", cmd_fit, c));
  CHECK(run("pa", cmd_path, c) == run("pb", cmd_path, c));
  CHECK(run("ba", cmd_bootstrap, c) == run("bb", cmd_bootstrap, c));
  CHECK(run("ka", cmd_km, c) == run("kb", cmd_km, c));
  auto s = c;
  s.cuts.clear();
  CHECK(run("sa", cmd_simulate, s) == run("sb", cmd_simulate, s));
}
