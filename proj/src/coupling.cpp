#include "ewm/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ewm/error.hpp"

namespace ewm {

CouplingMatrix::CouplingMatrix(SquareMatrix joint, VocabDistribution target,
                               VocabDistribution anchor)
    : joint_(std::move(joint)), target_(std::move(target)), anchor_(std::move(anchor)) {
  const std::size_t n = joint_.size();
  if (target_.size() != n || anchor_.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "coupling marginals do not match matrix size");
  for (double& x : joint_.data()) {
    if (x < 0.0 && x >= -tol::kClamp) x = 0.0;
    if (!(x >= 0.0)) throw Error(ErrorCode::BadWeights, "negative coupling entry");
  }
  const auto rows = joint_.row_sums();
  const auto cols = joint_.col_sums();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(rows[i] - target_[i]) > tol::kIdentity)
      throw Error(ErrorCode::BadWeights, "row " + std::to_string(i) + " sums to " +
                                             std::to_string(rows[i]) + ", target " +
                                             std::to_string(target_[i]));
    if (std::abs(cols[i] - anchor_[i]) > tol::kIdentity)
      throw Error(ErrorCode::BadWeights, "column " + std::to_string(i) + " sums to " +
                                             std::to_string(cols[i]) + ", anchor " +
                                             std::to_string(anchor_[i]));
  }
}

PathSpec::PathSpec(std::vector<Index> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw Error(ErrorCode::InvalidPath, "path needs at least 2 vertices");
  auto sorted = vertices_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorCode::InvalidPath, "repeated vertex in path");
}

namespace {

SquareMatrix diag_of(const VocabDistribution& p) {
  SquareMatrix w(p.size());
  for (Index v = 0; v < p.size(); ++v) w(v, v) = p[v];
  return w;
}

void add_extreme(SquareMatrix& w, const NeighborhoodSpec& spec, ExtremePair pair, double scale) {
  const double half = spec.delta() / 2.0;
  const auto& p0 = spec.anchor();
  for (Index v = 0; v < w.size(); ++v) w(v, v) += scale * p0[v];
  w(pair.gain, pair.loss) += scale * half;
  w(pair.loss, pair.loss) -= scale * half;
}

}  // namespace

CouplingMatrix extreme_coupling(const NeighborhoodSpec& spec, ExtremePair pair) {
  auto q = extreme_point(spec, pair);
  SquareMatrix w(spec.size());
  add_extreme(w, spec, pair, 1.0);
  return CouplingMatrix(std::move(w), make_distribution(std::move(q)), spec.anchor());
}

CouplingMatrix mixture_coupling(const NeighborhoodSpec& spec, const MixtureDecomposition& mix) {
  if (mix.terms.empty()) throw Error(ErrorCode::BadWeights, "empty decomposition");
  double total = 0.0;
  for (const auto& t : mix.terms) {
    if (!(t.weight >= 0.0)) throw Error(ErrorCode::BadWeights, "negative mixture weight");
    total += t.weight;
  }
  if (std::abs(total - 1.0) > tol::kIdentity)
    throw Error(ErrorCode::BadWeights, "mixture weights sum to " + std::to_string(total));

  SquareMatrix w(spec.size());
  for (const auto& t : mix.terms) {
    (void)extreme_point(spec, t.pair);  // validates the pair
    add_extreme(w, spec, t.pair, t.weight);
  }
  return CouplingMatrix(std::move(w), make_distribution(reconstruct(spec, mix)), spec.anchor());
}

CouplingMatrix path_coupling(const NeighborhoodSpec& spec, const PathSpec& path) {
  const std::size_t n = spec.size();
  for (Index u : path.vertices())
    if (u >= n) throw Error(ErrorCode::InvalidPath, "vertex " + std::to_string(u) + " out of range");
  const double half = spec.delta() / 2.0;
  SquareMatrix w = diag_of(spec.anchor());
  const auto& u = path.vertices();
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    w(u[i], u[i + 1]) += half;
    w(u[i + 1], u[i + 1]) -= half;
  }
  auto q = extreme_point(spec, {path.front(), path.back()});
  return CouplingMatrix(std::move(w), make_distribution(std::move(q)), spec.anchor());
}

SampledPair sample_pair(const CouplingMatrix& w, CounterRng& rng) {
  return CouplingSampler(w).locate(rng.uniform());
}

CouplingSampler::CouplingSampler(const CouplingMatrix& w)
    : n_(w.size()), cdf_(w.size() * w.size()), last_nonzero_(0) {
  double acc = 0.0;
  const auto data = w.joint().data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    acc += data[k];
    cdf_[k] = acc;
    if (data[k] > 0.0) last_nonzero_ = k;
  }
}

SampledPair CouplingSampler::locate(double u) const {
  // Total mass can fall a few ulps short of 1; anything past the last
  // cumulative value belongs to the last entry with positive mass.
  const double target = u * cdf_.back();
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(cdf_.begin(), cdf_.end(), target) - cdf_.begin());
  if (k > last_nonzero_) k = last_nonzero_;
  return {k / n_, k % n_};
}

}  // namespace ewm
