#include "ewm/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ewm/error.hpp"

namespace ewm {

ScoreMatrix::ScoreMatrix(SquareMatrix entries) : m_(std::move(entries)) {
  for (double x : m_.data())
    if (!std::isfinite(x)) throw Error(ErrorCode::BadParams, "score matrix entries must be finite");
}

ScoreMatrix log_scores(const EValueTable& e) {
  SquareMatrix m(e.size());
  for (Index v = 0; v < e.size(); ++v)
    for (Index s = 0; s < e.size(); ++s) {
      if (!(e(v, s) > 0.0)) throw Error(ErrorCode::BadParams, "log of a zero e-value");
      m(v, s) = std::log(e(v, s));
    }
  return ScoreMatrix(std::move(m));
}

double path_gain(const ScoreMatrix& m, const PathSpec& path) {
  const auto& u = path.vertices();
  for (Index x : u)
    if (x >= m.size()) throw Error(ErrorCode::InvalidPath, "vertex out of range");
  double gain = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) gain += m(u[i], u[i + 1]) - m(u[i + 1], u[i + 1]);
  return gain;
}

namespace {

/// Depth-first enumeration of simple paths from path.back() to `target`,
/// visiting neighbours in ascending order so paths come out lexicographically.
struct PathSearch {
  const ScoreMatrix& m;
  Index target;
  std::vector<Index> path;
  std::vector<bool> used;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Index> best_path;

  void run(double gain) {
    const Index here = path.back();
    for (Index next = 0; next < m.size(); ++next) {
      if (used[next]) continue;
      const double g = gain + m(here, next) - m(next, next);
      path.push_back(next);
      if (next == target) {
        if (g > best) {
          best = g;
          best_path = path;
        }
      } else {
        used[next] = true;
        run(g);
        used[next] = false;
      }
      path.pop_back();
    }
  }
};

}  // namespace

InnerValue best_path_inner_value(const ScoreMatrix& m, const NeighborhoodSpec& spec,
                                 ExtremePair pair) {
  const std::size_t n = spec.size();
  if (n > 10) throw Error(ErrorCode::TooLarge, "path enumeration limited to n <= 10");
  if (m.size() != n) throw Error(ErrorCode::DimensionMismatch, "score matrix vs spec");
  (void)extreme_point(spec, pair);

  double base = 0.0;
  for (Index v = 0; v < n; ++v) base += spec.anchor()[v] * m(v, v);

  PathSearch search{m, pair.loss, {pair.gain}, std::vector<bool>(n, false),
                    -std::numeric_limits<double>::infinity(), {}};
  search.used[pair.gain] = true;
  search.run(0.0);
  return {base + (spec.delta() / 2.0) * search.best, PathSpec(search.best_path)};
}

namespace {

// Enumerates simple cycles whose smallest vertex is the start; each directed
// cycle is seen exactly once.
struct CycleSearch {
  const ScoreMatrix& m;
  std::size_t cap;
  Index start = 0;
  std::vector<bool> used;
  bool ok = true;

  void run(Index here, std::size_t len, double diag, double edges) {
    if (!ok) return;
    for (Index next = start; next < m.size() && ok; ++next) {
      if (next == start) {
        if (len >= 2 && diag + 1e-12 * (1.0 + std::abs(diag)) < edges + m(here, start)) ok = false;
        continue;
      }
      if (used[next] || len + 1 > cap) continue;
      used[next] = true;
      run(next, len + 1, diag + m(next, next), edges + m(here, next));
      used[next] = false;
    }
  }
};

}  // namespace

bool cycle_condition_check(const ScoreMatrix& m, std::size_t max_cycle_len) {
  const std::size_t n = m.size();
  const std::size_t effective = std::min(n, max_cycle_len);
  if (effective > 8) throw Error(ErrorCode::TooLarge, "cycle enumeration limited to length 8");
  CycleSearch search{m, effective, 0, std::vector<bool>(n, false)};
  for (Index s = 0; s < n && search.ok; ++s) {
    search.start = s;
    search.used.assign(n, false);
    search.used[s] = true;
    search.run(s, 1, m(s, s), 0.0);
  }
  return search.ok;
}

double two_token_objective(double p, double delta, double r00, double r11) {
  const double h = entropy(std::vector<double>{p, 1.0 - p});
  const double worst = std::min(std::log((1.0 - r00) / r11), std::log((1.0 - r11) / r00));
  return h + p * std::log(r00) + (1.0 - p) * std::log(r11) + (delta / 2.0) * worst;
}

MaxMinResult two_token_maxmin(double p, double delta, std::size_t grid, std::size_t refinements) {
  if (!(p > 0.0 && p < 1.0) || !(delta > 0.0) || !(std::min(p, 1.0 - p) > delta))
    throw Error(ErrorCode::BadParams, "need 0 < p < 1 and min(p, 1-p) > delta");
  if (grid < 64) throw Error(ErrorCode::BadParams, "grid must be >= 64");
  if (refinements < 1) throw Error(ErrorCode::BadParams, "refinements must be >= 1");

  MaxMinResult res;
  res.value = -std::numeric_limits<double>::infinity();
  double lo0 = 0.0, hi0 = 1.0, lo1 = 0.0, hi1 = 1.0;
  const double g = static_cast<double>(grid);
  for (std::size_t pass = 0; pass <= refinements; ++pass) {
    const double step0 = (hi0 - lo0) / (g + 1.0);
    const double step1 = (hi1 - lo1) / (g + 1.0);
    for (std::size_t i = 1; i <= grid; ++i) {
      const double a = lo0 + static_cast<double>(i) * step0;
      for (std::size_t j = 1; j <= grid; ++j) {
        const double b = lo1 + static_cast<double>(j) * step1;
        const double f = two_token_objective(p, delta, a, b);
        if (f > res.value) {
          res.value = f;
          res.r00 = a;
          res.r11 = b;
        }
      }
    }
    res.trace.push_back({pass, res.r00, res.r11, res.value});
    lo0 = std::max(0.0, res.r00 - 2.0 * step0);
    hi0 = std::min(1.0, res.r00 + 2.0 * step0);
    lo1 = std::max(0.0, res.r11 - 2.0 * step1);
    hi1 = std::min(1.0, res.r11 + 2.0 * step1);
  }
  return res;
}

double worst_case_inner_value(const NeighborhoodSpec& spec, const SquareMatrix& kernel) {
  const std::size_t n = spec.size();
  if (n > 6) throw Error(ErrorCode::TooLarge, "saddle audit limited to n <= 6");
  if (kernel.size() != n) throw Error(ErrorCode::DimensionMismatch, "kernel vs spec");
  const auto rows = kernel.row_sums();
  for (Index v = 0; v < n; ++v) {
    if (std::abs(rows[v] - 1.0) > tol::kSimplex)
      throw Error(ErrorCode::InfeasibleKernel,
                  "row " + std::to_string(v) + " sums to " + std::to_string(rows[v]));
    for (Index s = 0; s < n; ++s)
      if (!(kernel(v, s) > 0.0))
        throw Error(ErrorCode::InfeasibleKernel, "kernel entries must be positive");
  }
  const auto m = log_scores(evalue_from_kernel(kernel, spec.anchor()));
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& pair : enumerate_extremes(spec))
    worst = std::min(worst, best_path_inner_value(m, spec, pair).value);
  return worst;
}

SaddleReport saddle_check(const NeighborhoodSpec& spec, std::size_t perturbations,
                          double magnitude, CounterRng& rng) {
  const std::size_t n = spec.size();
  if (n > 6) throw Error(ErrorCode::TooLarge, "saddle audit limited to n <= 6");
  if (!(magnitude >= 0.0)) throw Error(ErrorCode::BadParams, "magnitude must be >= 0");

  const SquareMatrix r_star = kernel_of(optimal_evalue(spec), spec);
  SaddleReport rep;
  rep.jstar = jstar(spec);
  rep.best_candidate = -std::numeric_limits<double>::infinity();
  constexpr double kFloor = 1e-6;

  for (std::size_t k = 0; k < perturbations; ++k) {
    SquareMatrix r = r_star;
    for (Index v = 0; v < n; ++v) {
      double total = 0.0;
      for (Index s = 0; s < n; ++s) {
        r(v, s) = std::max(kFloor, r(v, s) + magnitude * (2.0 * rng.uniform() - 1.0));
        total += r(v, s);
      }
      for (Index s = 0; s < n; ++s) r(v, s) /= total;
    }
    const auto m = log_scores(evalue_from_kernel(r, spec.anchor()));
    if (!cycle_condition_check(m, n)) {
      ++rep.skipped;
      continue;
    }
    const double value = worst_case_inner_value(spec, r);
    ++rep.tested;
    rep.best_candidate = std::max(rep.best_candidate, value);
    if (value > rep.jstar + 1e-9) rep.passed = false;
  }
  if (rep.tested == 0) rep.best_candidate = rep.jstar;
  return rep;
}

}  // namespace ewm
