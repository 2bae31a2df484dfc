#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pchaz/likelihood.hpp"
#include "pchaz/random.hpp"
#include "pchaz/simbench.hpp"
#include "pchaz/survdata.hpp"

namespace testutil {

// Stats with a few empty bins mixed in so the edge cases get exercised.
inline pchaz::SufficientStats random_stats(pchaz::Rng& rng, std::size_t bins, bool allow_empty = true) {
  pchaz::SufficientStats s;
  s.events.resize(bins);
  s.exposure.resize(bins);
  for (std::size_t l = 0; l < bins; ++l) {
    const bool empty = allow_empty && rng.uniform() < 0.1;
    s.exposure[l] = empty ? 0.0 : rng.uniform(0.5, 200.0);
    s.events[l] = empty ? 0 : static_cast<std::int64_t>(rng.below(12));
  }
  s.n = 100;
  return s;
}

inline std::vector<double> random_vector(pchaz::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Gaussian elimination with partial pivoting on the expanded matrix.
inline std::vector<double> dense_solve(const pchaz::BandMatrix& m, std::vector<double> b) {
  const std::size_t n = m.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] = m.diag[i];
    if (i + 1 < n) A[i][i + 1] = A[i + 1][i] = m.offdiag[i];
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[p][k])) p = i;
    std::swap(A[k], A[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

// Diagonally dominant, hence SPD.
inline pchaz::BandMatrix random_spd(pchaz::Rng& rng, std::size_t n) {
  pchaz::BandMatrix m;
  m.offdiag = random_vector(rng, n - 1, -1.0, 1.0);
  m.diag.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    if (i > 0) s += std::abs(m.offdiag[i - 1]);
    if (i + 1 < n) s += std::abs(m.offdiag[i]);
    m.diag[i] = s + rng.uniform(0.1, 2.0);
  }
  return m;
}

inline double max_rel_err(const std::vector<double>& x, const std::vector<double>& ref) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale = std::max(scale, std::abs(ref[i]));
    err = std::max(err, std::abs(x[i] - ref[i]));
  }
  return err / std::max(scale, 1e-300);
}

inline pchaz::SurvDataset pch_sample(std::size_t n, std::uint64_t seed) {
  pchaz::Rng rng(seed);
  return pchaz::simulate_dataset(pchaz::scenario_pch(), n, rng);
}

inline pchaz::CutGrid integer_cuts() { return pchaz::CutGrid::from_range({1.0, 100.0, 1.0}); }

}  // namespace testutil
