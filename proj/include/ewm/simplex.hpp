#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ewm {

using Index = std::size_t;

/// Probability vector over a finite vocabulary {0, ..., n-1}, n >= 2.
/// Only constructible through make_distribution, so every instance is validated.
class VocabDistribution {
 public:
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](Index i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  friend bool operator==(const VocabDistribution&, const VocabDistribution&) = default;

 private:
  explicit VocabDistribution(std::vector<double> w) : weights_(std::move(w)) {}
  friend VocabDistribution make_distribution(std::vector<double> weights);

  std::vector<double> weights_;
};

/// Validates and (when within 1e-9 of the simplex) renormalizes `weights`.
/// Throws Error{TooShort | NegativeWeight | SumNotOne}.
VocabDistribution make_distribution(std::vector<double> weights);

/// The l1 ball Q(anchor, delta) intersected with the simplex.
/// Requires 0 < delta < 2 and min anchor > delta.
class NeighborhoodSpec {
 public:
  NeighborhoodSpec(VocabDistribution anchor, double delta);

  const VocabDistribution& anchor() const noexcept { return anchor_; }
  double delta() const noexcept { return delta_; }
  std::size_t size() const noexcept { return anchor_.size(); }

 private:
  VocabDistribution anchor_;
  double delta_;
};

/// Vertex of Q(p0, delta): p0 + (delta/2)(1_gain - 1_loss).
struct ExtremePair {
  Index gain = 0;
  Index loss = 1;

  friend auto operator<=>(const ExtremePair&, const ExtremePair&) = default;
};

struct MixtureTerm {
  ExtremePair pair;
  double weight = 0.0;
};

struct MixtureDecomposition {
  std::vector<MixtureTerm> terms;
};

/// Shannon entropy in nats; 0 ln 0 = 0.
double entropy(std::span<const double> weights);
inline double entropy(const VocabDistribution& d) { return entropy(d.weights()); }

/// Throws Error{LengthMismatch}.
double l1_distance(std::span<const double> p, std::span<const double> q);
inline double l1_distance(const VocabDistribution& p, const VocabDistribution& q) {
  return l1_distance(p.weights(), q.weights());
}

/// All n(n-1) ordered pairs (a, b), a != b, in lexicographic order.
std::vector<ExtremePair> enumerate_extremes(const NeighborhoodSpec& spec);

/// The probability vector of an extreme point. Throws Error{InvalidPair}.
std::vector<double> extreme_point(const NeighborhoodSpec& spec, ExtremePair pair);

/// Writes q as a convex combination of extreme points.
///
/// The shift s = q - p0 is split into its positive and negative parts and
/// transported northwest-corner style (both sides in ascending index order);
/// each transported unit t from i to j becomes weight 2t/delta on pair (i, j).
/// Any leftover weight 1 - 2m/delta (m = total positive shift) is split evenly
/// over the canceling pair (0,1)/(1,0). Throws Error{OutsideNeighborhood}.
MixtureDecomposition decompose_target(const NeighborhoodSpec& spec, const VocabDistribution& q);

/// sum_i lambda_i q_i for the decomposition's terms.
std::vector<double> reconstruct(const NeighborhoodSpec& spec, const MixtureDecomposition& mix);

/// nu_delta = (1 - delta/2, delta/(2(n-1)), ..., delta/(2(n-1))). Throws Error{BadDelta}.
VocabDistribution noise_profile(std::size_t n, double delta);

}  // namespace ewm
