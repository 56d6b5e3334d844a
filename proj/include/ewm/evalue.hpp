#pragma once

#include <vector>

#include "ewm/matrix.hpp"
#include "ewm/simplex.hpp"

namespace ewm {

/// Scores e(v, s) >= 0 indexed (outcome, seed), together with the anchor-weighted
/// row sums A(v) = sum_s p0(s) e(v, s) that the null constraint depends on.
class EValueTable {
 public:
  /// Throws Error{NegativeWeight} for a negative or non-finite score.
  explicit EValueTable(SquareMatrix scores);

  std::size_t size() const noexcept { return scores_.size(); }
  const SquareMatrix& scores() const noexcept { return scores_; }
  double operator()(Index v, Index s) const { return scores_(v, s); }

  /// A(v) against `anchor`. Throws Error{DimensionMismatch}.
  std::vector<double> row_sums(const VocabDistribution& anchor) const;

  EValueTable scaled(double k) const { return EValueTable(scores_.scaled(k)); }

 private:
  SquareMatrix scores_;
};

/// The robust log-optimal e-value:
///   e*(v, v) = (1 - delta/2) / p0(v),   e*(v, s) = delta / (2(n-1) p0(s))  for s != v.
EValueTable optimal_evalue(const NeighborhoodSpec& spec);

/// sup over Q(p0, delta) of E_{v~q, s~p0}[e(v, s)], evaluated on the n(n-1)
/// extreme points (the objective is linear in q). A table is a valid e-value
/// iff the result is <= 1 + 1e-10. Throws Error{DimensionMismatch}.
double null_worst_expectation(const EValueTable& e, const NeighborhoodSpec& spec);

inline bool is_valid_evalue(const EValueTable& e, const NeighborhoodSpec& spec) {
  return null_worst_expectation(e, spec) <= 1.0 + 1e-10;
}

/// H(p0) + (1 - delta/2) ln(1 - delta/2) + (delta/2) ln(delta / (2(n-1))), in nats.
double jstar(const NeighborhoodSpec& spec);

/// Row-normalized kernel r(v, s) = p0(s) e(v, s) / A(v). Throws Error{ZeroRow}.
SquareMatrix kernel_of(const EValueTable& e, const NeighborhoodSpec& spec);

/// Inverse of kernel_of for row-stochastic r: e(v, s) = r(v, s) / p0(s).
EValueTable evalue_from_kernel(const SquareMatrix& kernel, const VocabDistribution& anchor);

}  // namespace ewm
