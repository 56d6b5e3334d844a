#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "ewm/coupling.hpp"
#include "ewm/evalue.hpp"

namespace ewm {

enum class Decision { Running, Rejected };

/// Wealth process W_n = sum_t ln e(v_t, s_t) with the Ville stopping rule
/// W_n >= ln(1/alpha). Wealth lives in log space only.
struct DetectorState {
  double wealth = 0.0;
  std::size_t steps = 0;
  double alpha = 0.05;
  Decision status = Decision::Running;
  std::size_t stop_step = 0;  // meaningful only when Rejected

  double threshold() const;
  bool rejected() const noexcept { return status == Decision::Rejected; }
};

/// Throws Error{BadAlpha} unless 0 < alpha < 1.
DetectorState init_detector(const EValueTable& e, double alpha);

/// Throws Error{AlreadyStopped | IndexOutOfRange}.
DetectorState observe(const DetectorState& state, const EValueTable& e, Index v, Index s);

/// sup over Q(p0, delta) of P(v = s) with v ~ q, s ~ p0:
///   sum_v p0(v)^2 + (delta/2)(max p0 - min p0).
/// delta = 0 is accepted here (no perturbation).
double worst_null_match_prob(const VocabDistribution& anchor, double delta);
inline double worst_null_match_prob(const NeighborhoodSpec& spec) {
  return worst_null_match_prob(spec.anchor(), spec.delta());
}

/// P(Bin(trials, p) >= successes), summed in log space.
double binomial_upper_tail(std::size_t trials, std::size_t successes, double p);

/// Match-count baseline with a Bonferroni schedule: reject at the first k with
/// P(Bin(k, p_bar) >= matches_k) < alpha / (k (k + 1)).
struct BaselineState {
  std::size_t matches = 0;
  std::size_t steps = 0;
  double alpha = 0.05;
  double null_match_prob = 0.5;
  Decision status = Decision::Running;
  std::size_t stop_step = 0;
  double last_p_value = 1.0;

  bool rejected() const noexcept { return status == Decision::Rejected; }
};

/// Throws Error{BadAlpha | BadParams}.
BaselineState init_baseline(double alpha, double null_match_prob);

/// Throws Error{AlreadyStopped}.
BaselineState baseline_observe(const BaselineState& state, Index v, Index s);

struct DetectionReport {
  Decision decision = Decision::Running;  // Running reads as Undecided
  std::optional<std::size_t> stop_step;
  double wealth = 0.0;
  double threshold = 0.0;
  std::size_t steps = 0;
};

/// Folds observe over the first min(budget, stream.size()) pairs.
/// Throws Error{EmptyStream | BadParams}.
DetectionReport batch_detect(const EValueTable& e, double alpha, std::span<const SampledPair> stream,
                             std::size_t budget);

/// Resumes from an existing state.
DetectionReport batch_detect(const EValueTable& e, DetectorState state,
                             std::span<const SampledPair> stream, std::size_t budget);

/// The fold behind batch_detect, returning the final state (for saving and resuming).
DetectorState run_detector(const EValueTable& e, DetectorState state,
                           std::span<const SampledPair> stream, std::size_t budget);

DetectionReport make_report(const DetectorState& state);

struct BaselineReport {
  Decision decision = Decision::Running;
  std::optional<std::size_t> stop_step;
  std::size_t matches = 0;
  std::size_t steps = 0;
  double last_p_value = 1.0;
};

BaselineReport baseline_batch_detect(double alpha, double null_match_prob,
                                     std::span<const SampledPair> stream, std::size_t budget);

}  // namespace ewm
