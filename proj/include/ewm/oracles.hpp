#pragma once

#include <cstddef>
#include <vector>

#include "ewm/coupling.hpp"
#include "ewm/evalue.hpp"
#include "ewm/matrix.hpp"
#include "ewm/rng.hpp"

namespace ewm {

/// Log-scores M(v, s) = ln e(v, s); all entries finite.
class ScoreMatrix {
 public:
  /// Throws Error{BadParams} on a non-finite entry.
  explicit ScoreMatrix(SquareMatrix entries);

  std::size_t size() const noexcept { return m_.size(); }
  double operator()(Index v, Index s) const { return m_(v, s); }
  const SquareMatrix& entries() const noexcept { return m_; }

 private:
  SquareMatrix m_;
};

/// ln of a strictly positive table. Throws Error{BadParams} on a zero score.
ScoreMatrix log_scores(const EValueTable& e);

/// W(P) = sum_i (M(u_i, u_{i+1}) - M(u_{i+1}, u_{i+1})).
double path_gain(const ScoreMatrix& m, const PathSpec& path);

struct InnerValue {
  double value = 0.0;
  PathSpec best_path{{0, 1}};
};

/// sup over couplings of the vertex (a, b) of sum w M, computed as
/// sum_v p0(v) M(v, v) + (delta/2) max_P W(P) over simple a -> b paths.
/// Exact when M satisfies the cycle condition. Ties keep the lexicographically
/// first path. Throws Error{TooLarge} for n > 10.
InnerValue best_path_inner_value(const ScoreMatrix& m, const NeighborhoodSpec& spec,
                                 ExtremePair pair);

/// True iff every simple cycle of length <= max_cycle_len has diagonal sum >=
/// cycle-edge sum. Throws Error{TooLarge} when min(n, max_cycle_len) > 8.
bool cycle_condition_check(const ScoreMatrix& m, std::size_t max_cycle_len);

struct MaxMinTraceRow {
  std::size_t refinement = 0;
  double r00 = 0.0;
  double r11 = 0.0;
  double objective = 0.0;
};

struct MaxMinResult {
  double value = 0.0;
  double r00 = 0.0;
  double r11 = 0.0;
  std::vector<MaxMinTraceRow> trace;
};

/// Two-token max-min objective for kernel diagonal (r00, r11).
double two_token_objective(double p, double delta, double r00, double r11);

/// Nested grid search over (r00, r11) in (0,1)^2. Pass 0 scans `grid` interior
/// points per axis; each of the `refinements` later passes rescans a window of
/// +-2 grid steps around the incumbent. Throws Error{BadParams}.
MaxMinResult two_token_maxmin(double p, double delta, std::size_t grid, std::size_t refinements);

/// min over extreme pairs of the inner value for e = r / p0 (column-wise).
/// Throws Error{InfeasibleKernel} unless r is strictly positive and row-stochastic
/// within 1e-9, and Error{TooLarge} for n > 6.
double worst_case_inner_value(const NeighborhoodSpec& spec, const SquareMatrix& kernel);

struct SaddleReport {
  bool passed = true;
  double jstar = 0.0;
  double best_candidate = 0.0;  // max worst-case inner value over tested candidates
  std::size_t tested = 0;
  std::size_t skipped = 0;      // candidates violating the cycle condition
};

/// Perturbs the optimal kernel entrywise by U(-magnitude, magnitude), clamps to
/// stay positive and renormalizes rows, then checks that no candidate's
/// worst-case inner value exceeds jstar + 1e-9. Throws Error{TooLarge} for n > 6.
SaddleReport saddle_check(const NeighborhoodSpec& spec, std::size_t perturbations,
                          double magnitude, CounterRng& rng);

}  // namespace ewm
