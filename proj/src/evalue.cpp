#include "ewm/evalue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ewm/error.hpp"

namespace ewm {

EValueTable::EValueTable(SquareMatrix scores) : scores_(std::move(scores)) {
  for (double x : scores_.data())
    if (!(x >= 0.0) || !std::isfinite(x))
      throw Error(ErrorCode::NegativeWeight, "e-value scores must be finite and >= 0");
}

std::vector<double> EValueTable::row_sums(const VocabDistribution& anchor) const {
  const std::size_t n = size();
  if (anchor.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "table is " + std::to_string(n) + "x" + std::to_string(n) + ", anchor has " +
                    std::to_string(anchor.size()) + " entries");
  std::vector<double> a(n, 0.0);
  for (Index v = 0; v < n; ++v)
    for (Index s = 0; s < n; ++s) a[v] += anchor[s] * scores_(v, s);
  return a;
}

EValueTable optimal_evalue(const NeighborhoodSpec& spec) {
  const std::size_t n = spec.size();
  const double delta = spec.delta();
  const double diag = 1.0 - delta / 2.0;
  const double off = delta / (2.0 * static_cast<double>(n - 1));
  SquareMatrix e(n);
  for (Index v = 0; v < n; ++v)
    for (Index s = 0; s < n; ++s) e(v, s) = (v == s ? diag : off) / spec.anchor()[s];
  return EValueTable(std::move(e));
}

double null_worst_expectation(const EValueTable& e, const NeighborhoodSpec& spec) {
  const auto a = e.row_sums(spec.anchor());
  // E_q[e] = sum_v q(v) A(v), linear in q.
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pair : enumerate_extremes(spec)) {
    const auto q = extreme_point(spec, pair);
    double value = 0.0;
    for (Index v = 0; v < a.size(); ++v) value += q[v] * a[v];
    worst = std::max(worst, value);
  }
  return worst;
}

double jstar(const NeighborhoodSpec& spec) {
  const double delta = spec.delta();
  const double n = static_cast<double>(spec.size());
  const double keep = 1.0 - delta / 2.0;
  return entropy(spec.anchor()) + keep * std::log(keep) +
         (delta / 2.0) * std::log(delta / (2.0 * (n - 1.0)));
}

SquareMatrix kernel_of(const EValueTable& e, const NeighborhoodSpec& spec) {
  const auto a = e.row_sums(spec.anchor());
  const std::size_t n = e.size();
  SquareMatrix r(n);
  for (Index v = 0; v < n; ++v) {
    if (!(a[v] > 0.0)) throw Error(ErrorCode::ZeroRow, "row " + std::to_string(v) + " sums to 0");
    for (Index s = 0; s < n; ++s) r(v, s) = spec.anchor()[s] * e(v, s) / a[v];
  }
  return r;
}

EValueTable evalue_from_kernel(const SquareMatrix& kernel, const VocabDistribution& anchor) {
  const std::size_t n = kernel.size();
  if (anchor.size() != n) throw Error(ErrorCode::DimensionMismatch, "kernel/anchor size");
  SquareMatrix e(n);
  for (Index v = 0; v < n; ++v)
    for (Index s = 0; s < n; ++s) e(v, s) = kernel(v, s) / anchor[s];
  return EValueTable(std::move(e));
}

}  // namespace ewm
