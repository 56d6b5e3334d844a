#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ewm/coupling.hpp"
#include "ewm/detection.hpp"
#include "ewm/evalue.hpp"
#include "ewm/rng.hpp"

namespace ewm {

// Adversary policies. Every policy emits extreme points of Q(p0, delta).
struct FixedPair {
  ExtremePair pair;
};
struct RoundRobin {};
struct RandomPair {};
/// Picks the pair whose mean ln e over its last `window` draws is smallest;
/// pairs never played go first.
struct HistoryGreedy {
  std::size_t window = 32;
};

using AdversaryPolicy = std::variant<FixedPair, RoundRobin, RandomPair, HistoryGreedy>;

/// "fixed:a,b" | "round-robin" | "random" | "greedy[:window]". Throws Error{FormatError}.
AdversaryPolicy parse_policy(const std::string& text);
std::string describe(const AdversaryPolicy& policy);

/// Per-step seed: mix64(base ^ (alpha_index * golden) ^ trial_index).
constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t alpha_index,
                                   std::uint64_t trial_index) noexcept {
  return mix64(base_seed ^ (alpha_index * kGoldenGamma) ^ trial_index);
}

/// Everything the generator needs per step, precomputed once per experiment:
/// the best-response coupling for every extreme pair and ln e for every cell.
class ProcessContext {
 public:
  ProcessContext(NeighborhoodSpec spec, EValueTable e);

  const NeighborhoodSpec& spec() const noexcept { return spec_; }
  const EValueTable& evalue() const noexcept { return e_; }
  const std::vector<ExtremePair>& pairs() const noexcept { return pairs_; }
  std::size_t pair_index(ExtremePair pair) const;
  const CouplingMatrix& coupling(std::size_t pair_index) const { return couplings_[pair_index]; }
  const CouplingSampler& sampler(std::size_t pair_index) const { return samplers_[pair_index]; }
  double log_e(Index v, Index s) const { return log_e_(v, s); }

 private:
  NeighborhoodSpec spec_;
  EValueTable e_;
  std::vector<ExtremePair> pairs_;
  std::vector<CouplingMatrix> couplings_;
  std::vector<CouplingSampler> samplers_;
  SquareMatrix log_e_;
};

/// Steps played so far plus, per pair, the last `window` log e-values.
class ProcessHistory {
 public:
  ProcessHistory(std::size_t pair_count, std::size_t window);

  std::size_t steps() const noexcept { return steps_; }
  void record(std::size_t pair_index, double log_e);
  /// nullopt when the pair has not been played.
  std::optional<double> window_mean(std::size_t pair_index) const;

 private:
  std::size_t steps_ = 0;
  std::size_t window_;
  std::vector<std::vector<double>> recent_;
  std::vector<std::size_t> next_slot_;
};

struct StepOutcome {
  std::size_t pair_index = 0;
  ExtremePair pair;
  const CouplingMatrix* coupling = nullptr;  // w_t; its target() is q_t
  SampledPair sample;
  double log_e = 0.0;
};

/// One round of the adversary/generator process. Step numbers are 1-based:
/// round-robin plays pair (t - 1) mod n(n-1) at step t. Records into `history`.
StepOutcome step_process(const AdversaryPolicy& policy, ProcessHistory& history,
                         const ProcessContext& ctx, CounterRng& rng);

struct ExperimentConfig {
  NeighborhoodSpec spec;
  std::vector<double> alphas;
  std::size_t trials = 1;
  AdversaryPolicy policy = FixedPair{{0, 1}};
  std::optional<std::size_t> horizon_cap;  // default ceil(10 ln(1/alpha) / J*)
  std::uint64_t base_seed = 0;
};

/// Throws Error{BadAlpha | BadParams}.
void validate(const ExperimentConfig& config);

std::size_t default_horizon(const NeighborhoodSpec& spec, double alpha, double multiple = 10.0);
std::size_t horizon_for(const ExperimentConfig& config, double alpha);

struct TrialRecord {
  std::optional<std::size_t> stop_step;
  double final_wealth = 0.0;
  std::size_t steps_run = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Runs the process with e* until rejection or the horizon cap.
TrialRecord run_trial(const ProcessContext& ctx, const ExperimentConfig& config,
                      std::size_t alpha_index, std::size_t trial_index);

/// All trials for one alpha, in trial order.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, std::size_t alpha_index,
                                    unsigned threads = 0);

struct StoppingRow {
  double alpha = 0.0;
  double log_inv_alpha = 0.0;
  double mean_tau = 0.0;
  double std_err = 0.0;
  double ratio = 0.0;
  std::size_t censored_count = 0;
};

/// Monte Carlo mean stopping time per alpha. Censored trials count as the horizon
/// cap. Aggregation uses exact integer sums, so output is thread-count independent.
std::vector<StoppingRow> estimate_stopping(const ExperimentConfig& config, unsigned threads = 0);

struct NullCalibration {
  double alpha = 0.0;
  std::size_t trials = 0;
  std::size_t horizon = 0;
  std::size_t false_positives = 0;
  double rate = 0.0;
};

/// Draws v ~ q_null and s ~ p0 independently and counts streams whose wealth
/// under `e` ever reaches ln(1/alpha) within `horizon`. Throws Error{OutsideNeighborhood}.
NullCalibration calibrate_null(const NeighborhoodSpec& spec, const EValueTable& e, double alpha,
                               std::size_t trials, std::size_t horizon,
                               const VocabDistribution& q_null, std::uint64_t seed,
                               unsigned threads = 0);

struct DriftEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t steps = 0;
};

/// Empirical mean of ln e(v_t, s_t) along one long run of the process.
DriftEstimate measure_drift(const ProcessContext& ctx, const AdversaryPolicy& policy,
                            std::size_t steps, std::uint64_t seed);

struct PairedStops {
  std::size_t evalue = 0;    // stop step, or horizon if censored
  std::size_t baseline = 0;

  friend bool operator==(const PairedStops&, const PairedStops&) = default;
};

/// Runs the e-value detector and the Bonferroni baseline on the same sampled
/// stream per trial.
std::vector<PairedStops> compare_with_baseline(const ExperimentConfig& config, double alpha,
                                               std::size_t horizon, unsigned threads = 0);

/// One-sided sign test: P(Bin(wins + losses, 1/2) >= wins).
double sign_test_p_value(std::size_t wins, std::size_t losses);

unsigned resolve_threads(unsigned requested);

}  // namespace ewm
