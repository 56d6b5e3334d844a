#pragma once

#include <utility>
#include <vector>

#include "ewm/matrix.hpp"
#include "ewm/rng.hpp"
#include "ewm/simplex.hpp"

namespace ewm {

/// Joint distribution w(v, s) with outcome marginal `target` and seed marginal `anchor`.
class CouplingMatrix {
 public:
  /// Clamps entries in [-1e-14, 0) to 0, then checks both marginals within 1e-12.
  /// Throws Error{BadWeights} if the matrix is not a coupling of (target, anchor).
  CouplingMatrix(SquareMatrix joint, VocabDistribution target, VocabDistribution anchor);

  std::size_t size() const noexcept { return joint_.size(); }
  const SquareMatrix& joint() const noexcept { return joint_; }
  double operator()(Index v, Index s) const { return joint_(v, s); }
  const VocabDistribution& target() const noexcept { return target_; }
  const VocabDistribution& anchor() const noexcept { return anchor_; }

 private:
  SquareMatrix joint_;
  VocabDistribution target_;
  VocabDistribution anchor_;
};

/// Simple directed path u0 -> ... -> uK over vocabulary indices, K >= 1.
class PathSpec {
 public:
  /// Throws Error{InvalidPath} on fewer than 2 vertices or a repeated vertex.
  explicit PathSpec(std::vector<Index> vertices);

  const std::vector<Index>& vertices() const noexcept { return vertices_; }
  std::size_t hops() const noexcept { return vertices_.size() - 1; }
  Index front() const { return vertices_.front(); }
  Index back() const { return vertices_.back(); }

 private:
  std::vector<Index> vertices_;
};

/// Generator best response for the vertex q = p0 + (delta/2)(1_a - 1_b):
/// diag(p0) with delta/2 of seed b's mass re-routed to outcome a.
CouplingMatrix extreme_coupling(const NeighborhoodSpec& spec, ExtremePair pair);

/// sum_i lambda_i extreme_coupling(pair_i). Throws Error{BadWeights}.
CouplingMatrix mixture_coupling(const NeighborhoodSpec& spec, const MixtureDecomposition& mix);

/// diag(p0) + (delta/2) sum_i (1_{u_i} 1_{u_{i+1}}^T - 1_{u_{i+1}} 1_{u_{i+1}}^T).
/// Throws Error{InvalidPath} if a vertex is outside the vocabulary.
CouplingMatrix path_coupling(const NeighborhoodSpec& spec, const PathSpec& path);

struct SampledPair {
  Index v = 0;
  Index s = 0;
  friend bool operator==(const SampledPair&, const SampledPair&) = default;
};

/// One exact categorical draw over the n^2 entries (inverse CDF, row-major).
SampledPair sample_pair(const CouplingMatrix& w, CounterRng& rng);

/// Precomputed row-major CDF for repeated draws from the same coupling.
/// Produces the same pair as sample_pair for the same uniform.
class CouplingSampler {
 public:
  explicit CouplingSampler(const CouplingMatrix& w);

  SampledPair draw(CounterRng& rng) const { return locate(rng.uniform()); }
  SampledPair locate(double u) const;

 private:
  std::size_t n_;
  std::vector<double> cdf_;
  std::size_t last_nonzero_;
};

}  // namespace ewm
