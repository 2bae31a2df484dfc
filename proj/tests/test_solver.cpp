#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pchaz/pathsel.hpp"
#include "pchaz/solver.hpp"
#include "test_util.hpp"

using namespace pchaz;

namespace {

SufficientStats make_stats(std::vector<std::int64_t> O, std::vector<double> R) {
  SufficientStats s;
  s.events = std::move(O);
  s.exposure = std::move(R);
  return s;
}

double roughness(const LogHazard& a) {
  double s = 0.0;
  for (std::size_t l = 0; l + 1 < a.size(); ++l) s += (a[l + 1] - a[l]) * (a[l + 1] - a[l]);
  return s;
}

double max_jump(const LogHazard& a) {
  double m = 0.0;
  for (std::size_t l = 0; l + 1 < a.size(); ++l) m = std::max(m, std::abs(a[l + 1] - a[l]));
  return m;
}

}  // namespace

TEST_CASE("band solver small systems") {
  BandMatrix I{{1.0, 1.0, 1.0}, {0.0, 0.0}};
  std::vector<double> v{3.0, -2.0, 0.5};
  CHECK(solve_band_spd(I, v) == v);

  BandMatrix m{{2.0, 2.0}, {-1.0}};
  auto x = solve_band_spd(m, std::vector<double>{1.0, 1.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));

  BandMatrix one{{4.0}, {}};
  CHECK(solve_band_spd(one, std::vector<double>{2.0})[0] == 0.5);
}

TEST_CASE("band solver matches dense elimination") {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    auto m = testutil::random_spd(rng, 50);
    auto b = testutil::random_vector(rng, 50, -5.0, 5.0);
    CHECK(testutil::max_rel_err(solve_band_spd(m, b), testutil::dense_solve(m, b)) <= 1e-10);
    // Residual check through the matrix product.
    CHECK(testutil::max_rel_err(m.multiply(solve_band_spd(m, b)), b) <= 1e-12);
  }
}

TEST_CASE("band solver rejects indefinite and malformed input") {
  BandMatrix bad{{1.0, 1.0}, {2.0}};
  try {
    solve_band_spd(bad, std::vector<double>{1.0, 1.0});
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
    CHECK(std::string(e.what()) == "matrix not positive definite (pivot 1)");
  }
  CHECK_THROWS_AS(solve_band_spd(BandMatrix{{0.0}, {}}, std::vector<double>{1.0}), NotPositiveDefinite);
  CHECK_THROWS_AS(solve_band_spd(BandMatrix{{1.0, 1.0}, {}}, std::vector<double>{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("unpenalized fit is the closed-form maximizer") {
  auto s = make_stats({3, 1}, {6.0, 4.0});
  auto fit = adaptive_ridge_fit(s, 0.0);
  CHECK(fit.converged);
  CHECK(std::abs(fit.a[0] - std::log(0.5)) <= 1e-8);
  CHECK(std::abs(fit.a[1] - std::log(0.25)) <= 1e-8);

  auto r = ridge_fit(s, 0.0);
  CHECK(std::abs(r.a[0] - std::log(0.5)) <= 1e-8);
}

TEST_CASE("huge penalty pools all bins") {
  Rng rng(22);
  for (int rep = 0; rep < 10; ++rep) {
    auto s = testutil::random_stats(rng, 30);
    const double pooled = std::log(static_cast<double>(s.total_events()) / s.total_exposure());
    auto fit = adaptive_ridge_fit(s, 1e6);
    CHECK(fit.converged);
    for (double a : fit.a) CHECK(std::abs(a - pooled) <= 1e-4);

    // With w = 1 the gap to the pooled fit closes like 1/pen.
    auto gap = [&](double pen) {
      auto nr = newton_fit(s, std::vector<double>(29, 1.0), pen, initial_log_hazard(s));
      REQUIRE(nr.converged);
      double m = 0.0;
      for (double a : nr.a) m = std::max(m, std::abs(a - pooled));
      return m;
    };
    const double g6 = gap(1e6), g7 = gap(1e7);
    CHECK(g6 < 1e-2);
    CHECK(g6 / g7 == doctest::Approx(10.0).epsilon(0.05));
  }
}

TEST_CASE("coupled solver matches dense elimination, including stiff couplings") {
  Rng rng(25);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng.below(60);
    auto info = testutil::random_vector(rng, n, 0.0, 3.0);
    auto c = testutil::random_vector(rng, n - 1, 0.0, 5.0);
    // Some couplings at the adaptive-weight ceiling.
    for (auto& x : c)
      if (rng.uniform() < 0.3) x = 1e10;
    auto b = testutil::random_vector(rng, n, -1.0, 1.0);
    BandMatrix m;
    m.diag = info;
    m.offdiag.resize(n - 1);
    for (std::size_t l = 0; l + 1 < n; ++l) {
      m.diag[l] += c[l];
      m.diag[l + 1] += c[l];
      m.offdiag[l] = -c[l];
    }
    auto x = solve_coupled_spd(info, c, b);
    // Componentwise backward error: the product itself rounds at |M||x| eps.
    auto r = m.multiply(x);
    double backward = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      double scale = std::abs(m.diag[l] * x[l]) + std::abs(b[l]);
      if (l > 0) scale += c[l - 1] * std::abs(x[l - 1]);
      if (l + 1 < n) scale += c[l] * std::abs(x[l + 1]);
      backward = std::max(backward, std::abs(r[l] - b[l]) / scale);
    }
    CHECK(backward <= 1e-12);
    if (std::all_of(c.begin(), c.end(), [](double v) { return v < 10.0; }))
      CHECK(testutil::max_rel_err(x, testutil::dense_solve(m, b)) <= 1e-10);
  }
}

TEST_CASE("coupled solver: fixed rows anchor their neighbours") {
  // Row 1 fixed: rows 0 and 2 decouple, each keeping its coupling on the diagonal.
  std::vector<double> info{1.0, 5.0, 2.0}, c{3.0, 4.0}, b{8.0, 100.0, 12.0};
  std::vector<bool> fixed{false, true, false};
  auto x = solve_coupled_spd(info, c, b, fixed);
  CHECK(x[0] == doctest::Approx(8.0 / 4.0));
  CHECK(x[1] == 0.0);
  CHECK(x[2] == doctest::Approx(12.0 / 6.0));

  // 1e16 couplings on a plain LDL^T cancel to a non-positive pivot.
  std::vector<double> tiny(50, 1e-3), stiff(49, 1e16), rhs(50, 1e-3);
  auto y = solve_coupled_spd(tiny, stiff, rhs);
  for (double v : y) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(solve_coupled_spd(std::vector<double>{0.0}, std::vector<double>{}, std::vector<double>{1.0}),
                  NotPositiveDefinite);
  CHECK_THROWS(solve_coupled_spd(info, std::vector<double>{1.0}, b));
}

TEST_CASE("Newton optimum does not depend on the start") {
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = testutil::random_stats(rng, 25, false);
    auto w = testutil::random_vector(rng, 24, 0.1, 10.0);
    const double pen = rng.uniform(0.1, 20.0);
    auto from_mle = newton_fit(s, w, pen, initial_log_hazard(s));
    auto from_random = newton_fit(s, w, pen, testutil::random_vector(rng, 25, -8.0, 2.0));
    REQUIRE(from_mle.converged);
    REQUIRE(from_random.converged);
    CHECK(std::abs(from_mle.objective - from_random.objective) <= 1e-8 * std::max(1.0, std::abs(from_mle.objective)));
  }
}

TEST_CASE("constant-rate data gives a flat fit with saturated weights") {
  // Events and exposure proportional across bins: every bin MLE is 0.01.
  std::vector<std::int64_t> O(10, 2);
  std::vector<double> R(10, 200.0);
  auto fit = adaptive_ridge_fit(make_stats(O, R), 1.0);
  CHECK(fit.converged);
  for (double a : fit.a) CHECK(std::abs(a - std::log(0.01)) <= 1e-8);
  for (double w : fit.w) CHECK(w == doctest::Approx(1e10).epsilon(1e-6));
}

TEST_CASE("adaptive weights make w*d^2 an indicator of a jump") {
  auto d = testutil::pch_sample(100, 5);
  auto grid = testutil::integer_cuts();
  auto s = sufficient_stats(d, grid);
  for (double pen : {0.5, 1.0, 5.0}) {
    auto fit = adaptive_ridge_fit(s, pen);
    CHECK(fit.converged);
    for (std::size_t l = 0; l < fit.w.size(); ++l) {
      const double jump = fit.a[l + 1] - fit.a[l];
      const double v = fit.w[l] * jump * jump;
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
      if (std::abs(jump) >= 10.0 * 1e-5) CHECK(v >= 0.99);
      if (v >= 0.99) CHECK(std::abs(jump) >= 9.0 * 1e-5);
    }
  }
}

TEST_CASE("adaptive ridge finds few cuts on the simulated sample") {
  auto grid = testutil::integer_cuts();
  std::vector<int> cuts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = sufficient_stats(testutil::pch_sample(100, 100 + seed), grid);
    cuts.push_back(model_dimension(adaptive_ridge_fit(s, 0.95)) - 1);
  }
  const double mean = std::accumulate(cuts.begin(), cuts.end(), 0.0) / static_cast<double>(cuts.size());
  CHECK(mean >= 2.0);
  CHECK(mean <= 5.0);
}

TEST_CASE("ridge smooths more as the penalty grows") {
  Rng rng(24);
  auto d = simulate_dataset(scenario_weibull(), 200, rng);
  auto s = sufficient_stats(d, testutil::integer_cuts());
  double prev = INFINITY;
  for (double pen : {0.1, 1.0, 10.0, 100.0}) {
    const double r = roughness(ridge_fit(s, pen).a);
    CHECK(r <= prev + 1e-12);
    prev = r;
  }
  CHECK(max_jump(ridge_fit(s, 40.0).a) < max_jump(ridge_fit(s, 0.0).a));
}

TEST_CASE("clamped entries stay at the bound") {
  // Bin 0 has exposure but no events, so its log-hazard runs to the floor.
  auto s = make_stats({0, 5}, {10.0, 10.0});
  auto fit = adaptive_ridge_fit(s, 0.0);
  CHECK(fit.a[0] == kLogHazardMin);
  CHECK(fit.a[1] == doctest::Approx(std::log(0.5)));
  // No exposure at all in the tail.
  auto t = make_stats({5, 0}, {10.0, 0.0});
  auto ft = adaptive_ridge_fit(t, 0.0);
  CHECK(ft.converged);
  CHECK(ft.a[0] == doctest::Approx(std::log(0.5)));
}

TEST_CASE("fit options and penalties are validated") {
  auto s = make_stats({1, 1}, {1.0, 1.0});
  FitOptions bad;
  bad.newton_tol = 0.0;
  CHECK_THROWS(adaptive_ridge_fit(s, 1.0, bad));
  CHECK_THROWS_WITH(adaptive_ridge_fit(s, -1.0), "penalty must be non-negative");
  CHECK_THROWS_WITH(ridge_fit(s, NAN), "penalty must be non-negative");
  CHECK_THROWS(adaptive_ridge_fit(s, 1.0, {}, WeightVector(3, 1.0)));
}
