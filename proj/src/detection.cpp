#include "ewm/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ewm/error.hpp"

namespace ewm {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw Error(ErrorCode::BadAlpha, "alpha must lie in (0, 1), got " + std::to_string(alpha));
}

}  // namespace

double DetectorState::threshold() const { return -std::log(alpha); }

DetectorState init_detector(const EValueTable& e, double alpha) {
  check_alpha(alpha);
  (void)e;  // the threshold does not depend on the table
  DetectorState st;
  st.alpha = alpha;
  return st;
}

DetectorState observe(const DetectorState& state, const EValueTable& e, Index v, Index s) {
  if (state.rejected())
    throw Error(ErrorCode::AlreadyStopped,
                "detector rejected at step " + std::to_string(state.stop_step));
  if (v >= e.size() || s >= e.size())
    throw Error(ErrorCode::IndexOutOfRange, "(" + std::to_string(v) + "," + std::to_string(s) +
                                                ") outside vocabulary of size " +
                                                std::to_string(e.size()));
  DetectorState next = state;
  next.wealth += std::log(e(v, s));
  next.steps += 1;
  if (next.wealth >= next.threshold()) {
    next.status = Decision::Rejected;
    next.stop_step = next.steps;
  }
  return next;
}

double worst_null_match_prob(const VocabDistribution& anchor, double delta) {
  const auto w = anchor.weights();
  double sq = 0.0;
  for (double x : w) sq += x * x;
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return sq + (delta / 2.0) * (*hi - *lo);
}

double binomial_upper_tail(std::size_t trials, std::size_t successes, double p) {
  if (successes == 0) return 1.0;
  if (successes > trials) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double k = static_cast<double>(trials);
  const double lp = std::log(p), lq = std::log1p(-p);
  // Terms are summed relative to the largest (the one at j = successes when the
  // mean is below `successes`, which is the regime that matters here).
  double log_max = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(trials - successes + 1);
  for (std::size_t j = successes; j <= trials; ++j) {
    const double jj = static_cast<double>(j);
    const double lt = std::lgamma(k + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(k - jj + 1.0) +
                      jj * lp + (k - jj) * lq;
    logs.push_back(lt);
    log_max = std::max(log_max, lt);
  }
  double acc = 0.0;
  for (double lt : logs) acc += std::exp(lt - log_max);
  return std::min(1.0, std::exp(log_max) * acc);
}

BaselineState init_baseline(double alpha, double null_match_prob) {
  check_alpha(alpha);
  if (!(null_match_prob > 0.0) || !(null_match_prob < 1.0))
    throw Error(ErrorCode::BadParams, "null match probability must lie in (0, 1)");
  BaselineState st;
  st.alpha = alpha;
  st.null_match_prob = null_match_prob;
  return st;
}

BaselineState baseline_observe(const BaselineState& state, Index v, Index s) {
  if (state.rejected())
    throw Error(ErrorCode::AlreadyStopped,
                "baseline rejected at step " + std::to_string(state.stop_step));
  BaselineState next = state;
  next.steps += 1;
  if (v == s) next.matches += 1;
  next.last_p_value = binomial_upper_tail(next.steps, next.matches, next.null_match_prob);
  const double k = static_cast<double>(next.steps);
  if (next.last_p_value < next.alpha / (k * (k + 1.0))) {
    next.status = Decision::Rejected;
    next.stop_step = next.steps;
  }
  return next;
}

DetectionReport batch_detect(const EValueTable& e, double alpha, std::span<const SampledPair> stream,
                             std::size_t budget) {
  return batch_detect(e, init_detector(e, alpha), stream, budget);
}

DetectionReport batch_detect(const EValueTable& e, DetectorState state,
                             std::span<const SampledPair> stream, std::size_t budget) {
  return make_report(run_detector(e, state, stream, budget));
}

DetectorState run_detector(const EValueTable& e, DetectorState state,
                           std::span<const SampledPair> stream, std::size_t budget) {
  if (stream.empty()) throw Error(ErrorCode::EmptyStream, "no observations");
  if (budget < 1) throw Error(ErrorCode::BadParams, "budget must be >= 1");
  check_alpha(state.alpha);
  const std::size_t limit = std::min(budget, stream.size());
  for (std::size_t t = 0; t < limit && !state.rejected(); ++t)
    state = observe(state, e, stream[t].v, stream[t].s);
  return state;
}

DetectionReport make_report(const DetectorState& state) {
  DetectionReport rep;
  rep.decision = state.status;
  if (state.rejected()) rep.stop_step = state.stop_step;
  rep.wealth = state.wealth;
  rep.threshold = state.threshold();
  rep.steps = state.steps;
  return rep;
}

BaselineReport baseline_batch_detect(double alpha, double null_match_prob,
                                     std::span<const SampledPair> stream, std::size_t budget) {
  if (stream.empty()) throw Error(ErrorCode::EmptyStream, "no observations");
  if (budget < 1) throw Error(ErrorCode::BadParams, "budget must be >= 1");
  BaselineState st = init_baseline(alpha, null_match_prob);
  const std::size_t limit = std::min(budget, stream.size());
  for (std::size_t t = 0; t < limit && !st.rejected(); ++t)
    st = baseline_observe(st, stream[t].v, stream[t].s);
  BaselineReport rep;
  rep.decision = st.status;
  if (st.rejected()) rep.stop_step = st.stop_step;
  rep.matches = st.matches;
  rep.steps = st.steps;
  rep.last_p_value = st.last_p_value;
  return rep;
}

}  // namespace ewm
