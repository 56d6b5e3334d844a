#include "ewm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ewm/error.hpp"

namespace ewm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::SumNotOne: return "SumNotOne";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutsideNeighborhood: return "OutsideNeighborhood";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::AlreadyStopped: return "AlreadyStopped";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::InfeasibleKernel: return "InfeasibleKernel";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

VocabDistribution make_distribution(std::vector<double> weights) {
  if (weights.size() < 2)
    throw Error(ErrorCode::TooShort, "distribution needs at least 2 entries, got " +
                                         std::to_string(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(i) + " is " +
                                                 std::to_string(weights[i]));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > tol::kSimplex)
    throw Error(ErrorCode::SumNotOne, "weights sum to " + std::to_string(total));
  if (total != 1.0)
    for (double& w : weights) w /= total;
  return VocabDistribution(std::move(weights));
}

NeighborhoodSpec::NeighborhoodSpec(VocabDistribution anchor, double delta)
    : anchor_(std::move(anchor)), delta_(delta) {
  if (!(delta > 0.0) || !(delta < 2.0))
    throw Error(ErrorCode::InvalidSpec, "delta must lie in (0, 2), got " + std::to_string(delta));
  const auto w = anchor_.weights();
  const double min_p = *std::min_element(w.begin(), w.end());
  if (!(min_p > delta))
    throw Error(ErrorCode::InvalidSpec, "min anchor weight " + std::to_string(min_p) +
                                            " must exceed delta " + std::to_string(delta));
}

double entropy(std::span<const double> weights) {
  double h = 0.0;
  for (double w : weights)
    if (w > 0.0) h -= w * std::log(w);
  return h;
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return d;
}

std::vector<ExtremePair> enumerate_extremes(const NeighborhoodSpec& spec) {
  const std::size_t n = spec.size();
  std::vector<ExtremePair> out;
  out.reserve(n * (n - 1));
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      if (a != b) out.push_back({a, b});
  return out;
}

std::vector<double> extreme_point(const NeighborhoodSpec& spec, ExtremePair pair) {
  const std::size_t n = spec.size();
  if (pair.gain >= n || pair.loss >= n || pair.gain == pair.loss)
    throw Error(ErrorCode::InvalidPair, "(" + std::to_string(pair.gain) + "," +
                                            std::to_string(pair.loss) + ")");
  std::vector<double> q(spec.anchor().weights().begin(), spec.anchor().weights().end());
  const double half = spec.delta() / 2.0;
  q[pair.gain] += half;
  q[pair.loss] -= half;
  return q;
}

namespace {

void add_term(MixtureDecomposition& mix, ExtremePair pair, double weight) {
  for (auto& t : mix.terms) {
    if (t.pair == pair) {
      t.weight += weight;
      return;
    }
  }
  mix.terms.push_back({pair, weight});
}

}  // namespace

MixtureDecomposition decompose_target(const NeighborhoodSpec& spec, const VocabDistribution& q) {
  const auto p0 = spec.anchor().weights();
  const double dist = l1_distance(p0, q.weights());
  if (dist > spec.delta() + tol::kReconstruct)
    throw Error(ErrorCode::OutsideNeighborhood, "l1 distance " + std::to_string(dist) +
                                                    " exceeds delta " +
                                                    std::to_string(spec.delta()));

  // Shifts below this magnitude are rounding noise, not transport.
  constexpr double kShiftFloor = 1e-15;
  std::vector<std::pair<Index, double>> gains, losses;
  for (Index i = 0; i < q.size(); ++i) {
    const double s = q[i] - p0[i];
    if (s > kShiftFloor) gains.emplace_back(i, s);
    if (s < -kShiftFloor) losses.emplace_back(i, -s);
  }

  MixtureDecomposition mix;
  const double scale = 2.0 / spec.delta();
  double moved = 0.0;
  std::size_t gi = 0, li = 0;
  while (gi < gains.size() && li < losses.size()) {
    const double t = std::min(gains[gi].second, losses[li].second);
    add_term(mix, {gains[gi].first, losses[li].first}, t * scale);
    moved += t;
    gains[gi].second -= t;
    losses[li].second -= t;
    if (gains[gi].second <= kShiftFloor) ++gi;
    if (li < losses.size() && losses[li].second <= kShiftFloor) ++li;
  }

  // A residual at rounding level means the target is on the boundary: rescale the
  // transport terms to sum to one instead of padding with dust.
  const double total = moved * scale;
  const double residual = 1.0 - total;
  if (residual > 1e-12) {
    add_term(mix, {0, 1}, residual / 2.0);
    add_term(mix, {1, 0}, residual / 2.0);
  } else if (total > 0.0) {
    for (auto& t : mix.terms) t.weight /= total;
  }
  return mix;
}

std::vector<double> reconstruct(const NeighborhoodSpec& spec, const MixtureDecomposition& mix) {
  std::vector<double> out(spec.size(), 0.0);
  for (const auto& t : mix.terms) {
    const auto qi = extreme_point(spec, t.pair);
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += t.weight * qi[v];
  }
  return out;
}

VocabDistribution noise_profile(std::size_t n, double delta) {
  if (n < 2) throw Error(ErrorCode::TooShort, "n must be at least 2");
  if (!(delta > 0.0) || !(delta < 2.0))
    throw Error(ErrorCode::BadDelta, "delta must lie in (0, 2), got " + std::to_string(delta));
  std::vector<double> nu(n, delta / (2.0 * static_cast<double>(n - 1)));
  nu[0] = 1.0 - delta / 2.0;
  return make_distribution(std::move(nu));
}

}  // namespace ewm
