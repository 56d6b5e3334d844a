#include "ewm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ewm/error.hpp"

namespace ewm {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled exactly once, so writes to slot i need no synchronization.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 64;
  auto body = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
}

/// Inverse-CDF categorical sampler over a probability vector.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> p) : cdf_(p.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      cdf_[i] = acc;
      if (p[i] > 0.0) last_ = i;
    }
  }
  Index draw(CounterRng& rng) const {
    const double target = rng.uniform() * cdf_.back();
    auto k = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), target) -
                                      cdf_.begin());
    return std::min(k, last_);
  }

 private:
  std::vector<double> cdf_;
  std::size_t last_ = 0;
};

}  // namespace

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

AdversaryPolicy parse_policy(const std::string& text) {
  if (text == "round-robin") return RoundRobin{};
  if (text == "random") return RandomPair{};
  if (text == "greedy") return HistoryGreedy{};
  auto bad = [&] { return Error(ErrorCode::FormatError, "unknown policy '" + text + "'"); };
  try {
    if (text.rfind("greedy:", 0) == 0) {
      const long w = std::stol(text.substr(7));
      if (w < 1) throw bad();
      return HistoryGreedy{static_cast<std::size_t>(w)};
    }
    if (text.rfind("fixed:", 0) == 0) {
      const auto body = text.substr(6);
      const auto comma = body.find(',');
      if (comma == std::string::npos) throw bad();
      const long a = std::stol(body.substr(0, comma));
      const long b = std::stol(body.substr(comma + 1));
      if (a < 0 || b < 0 || a == b) throw bad();
      return FixedPair{{static_cast<Index>(a), static_cast<Index>(b)}};
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  throw bad();
}

std::string describe(const AdversaryPolicy& policy) {
  return std::visit(
      Overloaded{
          [](const FixedPair& f) {
            return "fixed:" + std::to_string(f.pair.gain) + "," + std::to_string(f.pair.loss);
          },
          [](const RoundRobin&) { return std::string("round-robin"); },
          [](const RandomPair&) { return std::string("random"); },
          [](const HistoryGreedy& g) { return "greedy:" + std::to_string(g.window); },
      },
      policy);
}

ProcessContext::ProcessContext(NeighborhoodSpec spec, EValueTable e)
    : spec_(std::move(spec)), e_(std::move(e)), pairs_(enumerate_extremes(spec_)),
      log_e_(spec_.size()) {
  if (e_.size() != spec_.size()) throw Error(ErrorCode::DimensionMismatch, "table vs spec");
  couplings_.reserve(pairs_.size());
  samplers_.reserve(pairs_.size());
  for (const auto& pair : pairs_) {
    couplings_.push_back(extreme_coupling(spec_, pair));
    samplers_.emplace_back(couplings_.back());
  }
  for (Index v = 0; v < spec_.size(); ++v)
    for (Index s = 0; s < spec_.size(); ++s) log_e_(v, s) = std::log(e_(v, s));
}

std::size_t ProcessContext::pair_index(ExtremePair pair) const {
  const std::size_t n = spec_.size();
  if (pair.gain >= n || pair.loss >= n || pair.gain == pair.loss)
    throw Error(ErrorCode::InvalidPair, "pair outside vocabulary");
  // Lexicographic order skips the diagonal.
  return pair.gain * (n - 1) + (pair.loss < pair.gain ? pair.loss : pair.loss - 1);
}

ProcessHistory::ProcessHistory(std::size_t pair_count, std::size_t window)
    : window_(std::max<std::size_t>(window, 1)), recent_(pair_count), next_slot_(pair_count, 0) {}

void ProcessHistory::record(std::size_t pair_index, double log_e) {
  ++steps_;
  auto& buf = recent_[pair_index];
  if (buf.size() < window_) {
    buf.push_back(log_e);
  } else {
    buf[next_slot_[pair_index]] = log_e;
    next_slot_[pair_index] = (next_slot_[pair_index] + 1) % window_;
  }
}

std::optional<double> ProcessHistory::window_mean(std::size_t pair_index) const {
  const auto& buf = recent_[pair_index];
  if (buf.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : buf) sum += x;
  return sum / static_cast<double>(buf.size());
}

StepOutcome step_process(const AdversaryPolicy& policy, ProcessHistory& history,
                         const ProcessContext& ctx, CounterRng& rng) {
  const std::size_t count = ctx.pairs().size();
  const std::size_t idx = std::visit(
      Overloaded{
          [&](const FixedPair& f) { return ctx.pair_index(f.pair); },
          [&](const RoundRobin&) { return history.steps() % count; },
          [&](const RandomPair&) { return static_cast<std::size_t>(rng.below(count)); },
          [&](const HistoryGreedy&) {
            std::size_t best = 0;
            double best_mean = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < count; ++i) {
              const auto mean = history.window_mean(i);
              if (!mean) return i;
              if (*mean < best_mean) {
                best_mean = *mean;
                best = i;
              }
            }
            return best;
          },
      },
      policy);

  StepOutcome out;
  out.pair_index = idx;
  out.pair = ctx.pairs()[idx];
  out.coupling = &ctx.coupling(idx);
  out.sample = ctx.sampler(idx).draw(rng);
  out.log_e = ctx.log_e(out.sample.v, out.sample.s);
  history.record(idx, out.log_e);
  return out;
}

void validate(const ExperimentConfig& config) {
  if (config.alphas.empty()) throw Error(ErrorCode::BadParams, "alpha list is empty");
  for (double a : config.alphas)
    if (!(a > 0.0) || !(a < 1.0))
      throw Error(ErrorCode::BadAlpha, "alpha must lie in (0, 1), got " + std::to_string(a));
  if (config.trials < 1) throw Error(ErrorCode::BadParams, "trials must be >= 1");
  if (config.horizon_cap && *config.horizon_cap < 1)
    throw Error(ErrorCode::BadParams, "horizon cap must be >= 1");
  if (const auto* f = std::get_if<FixedPair>(&config.policy)) {
    const std::size_t n = config.spec.size();
    if (f->pair.gain >= n || f->pair.loss >= n || f->pair.gain == f->pair.loss)
      throw Error(ErrorCode::InvalidPair, "fixed pair outside vocabulary");
  }
}

std::size_t default_horizon(const NeighborhoodSpec& spec, double alpha, double multiple) {
  return static_cast<std::size_t>(std::ceil(multiple * -std::log(alpha) / jstar(spec)));
}

std::size_t horizon_for(const ExperimentConfig& config, double alpha) {
  return config.horizon_cap ? *config.horizon_cap : default_horizon(config.spec, alpha);
}

namespace {

std::size_t window_of(const AdversaryPolicy& policy) {
  if (const auto* g = std::get_if<HistoryGreedy>(&policy)) return g->window;
  return 1;
}

}  // namespace

TrialRecord run_trial(const ProcessContext& ctx, const ExperimentConfig& config,
                      std::size_t alpha_index, std::size_t trial_index) {
  const double alpha = config.alphas.at(alpha_index);
  const double threshold = -std::log(alpha);
  const std::size_t horizon = horizon_for(config, alpha);

  TrialRecord rec;
  rec.seed = trial_seed(config.base_seed, alpha_index, trial_index);
  CounterRng rng(rec.seed);
  ProcessHistory history(ctx.pairs().size(), window_of(config.policy));
  double wealth = 0.0;
  std::size_t t = 0;
  while (t < horizon) {
    const auto step = step_process(config.policy, history, ctx, rng);
    wealth += step.log_e;
    ++t;
    if (wealth >= threshold) {
      rec.stop_step = t;
      break;
    }
  }
  rec.final_wealth = wealth;
  rec.steps_run = t;
  return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, std::size_t alpha_index,
                                    unsigned threads) {
  validate(config);
  const ProcessContext ctx(config.spec, optimal_evalue(config.spec));
  std::vector<TrialRecord> out(config.trials);
  parallel_for(config.trials, threads,
               [&](std::size_t i) { out[i] = run_trial(ctx, config, alpha_index, i); });
  return out;
}

std::vector<StoppingRow> estimate_stopping(const ExperimentConfig& config, unsigned threads) {
  validate(config);
  const ProcessContext ctx(config.spec, optimal_evalue(config.spec));
  const std::size_t trials = config.trials;
  const std::size_t jobs = config.alphas.size() * trials;
  std::vector<std::uint32_t> stops(jobs);
  std::vector<std::uint8_t> censored(jobs);
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t ai = job / trials;
    const auto rec = run_trial(ctx, config, ai, job % trials);
    stops[job] = static_cast<std::uint32_t>(rec.stop_step ? *rec.stop_step : rec.steps_run);
    censored[job] = rec.stop_step ? 0 : 1;
  });

  std::vector<StoppingRow> rows;
  rows.reserve(config.alphas.size());
  for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
    std::uint64_t sum = 0, sum_sq = 0;
    StoppingRow row;
    for (std::size_t i = 0; i < trials; ++i) {
      const std::uint64_t tau = stops[ai * trials + i];
      sum += tau;
      sum_sq += tau * tau;
      row.censored_count += censored[ai * trials + i];
    }
    const long double n = static_cast<long double>(trials);
    const long double mean = static_cast<long double>(sum) / n;
    long double var = 0.0L;
    if (trials > 1)
      var = (static_cast<long double>(sum_sq) - static_cast<long double>(sum) * mean) / (n - 1.0L);
    row.alpha = config.alphas[ai];
    row.log_inv_alpha = -std::log(row.alpha);
    row.mean_tau = static_cast<double>(mean);
    row.std_err = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
    row.ratio = row.mean_tau / row.log_inv_alpha;
    rows.push_back(row);
  }
  return rows;
}

NullCalibration calibrate_null(const NeighborhoodSpec& spec, const EValueTable& e, double alpha,
                               std::size_t trials, std::size_t horizon,
                               const VocabDistribution& q_null, std::uint64_t seed,
                               unsigned threads) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw Error(ErrorCode::BadAlpha, "alpha must lie in (0, 1)");
  if (trials < 1 || horizon < 1) throw Error(ErrorCode::BadParams, "trials and horizon must be >= 1");
  if (e.size() != spec.size()) throw Error(ErrorCode::DimensionMismatch, "table vs spec");
  const double dist = l1_distance(spec.anchor(), q_null);
  if (dist > spec.delta() + tol::kReconstruct)
    throw Error(ErrorCode::OutsideNeighborhood,
                "null target is " + std::to_string(dist) + " from the anchor");

  const CategoricalSampler outcome(q_null.weights());
  const CategoricalSampler signal(spec.anchor().weights());
  SquareMatrix log_e(e.size());
  for (Index v = 0; v < e.size(); ++v)
    for (Index s = 0; s < e.size(); ++s) log_e(v, s) = std::log(e(v, s));
  const double threshold = -std::log(alpha);

  std::vector<std::uint8_t> hit(trials, 0);
  parallel_for(trials, threads, [&](std::size_t i) {
    CounterRng rng(trial_seed(seed, 0, i));
    double wealth = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const Index v = outcome.draw(rng);
      const Index s = signal.draw(rng);
      wealth += log_e(v, s);
      if (wealth >= threshold) {
        hit[i] = 1;
        return;
      }
    }
  });

  NullCalibration out;
  out.alpha = alpha;
  out.trials = trials;
  out.horizon = horizon;
  for (auto h : hit) out.false_positives += h;
  out.rate = static_cast<double>(out.false_positives) / static_cast<double>(trials);
  return out;
}

DriftEstimate measure_drift(const ProcessContext& ctx, const AdversaryPolicy& policy,
                            std::size_t steps, std::uint64_t seed) {
  if (steps < 2) throw Error(ErrorCode::BadParams, "drift needs at least 2 steps");
  CounterRng rng(seed);
  ProcessHistory history(ctx.pairs().size(), window_of(policy));
  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    const double x = step_process(policy, history, ctx, rng).log_e;
    const double d = x - mean;
    mean += d / static_cast<double>(t);
    m2 += d * (x - mean);
  }
  const double n = static_cast<double>(steps);
  return {mean, std::sqrt(m2 / (n - 1.0) / n), steps};
}

std::vector<PairedStops> compare_with_baseline(const ExperimentConfig& config, double alpha,
                                               std::size_t horizon, unsigned threads) {
  validate(config);
  if (horizon < 1) throw Error(ErrorCode::BadParams, "horizon must be >= 1");
  const ProcessContext ctx(config.spec, optimal_evalue(config.spec));
  const double p_bar = worst_null_match_prob(config.spec);
  std::vector<PairedStops> out(config.trials);
  parallel_for(config.trials, threads, [&](std::size_t i) {
    CounterRng rng(trial_seed(config.base_seed, 0, i));
    ProcessHistory history(ctx.pairs().size(), window_of(config.policy));
    std::vector<SampledPair> stream;
    stream.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t)
      stream.push_back(step_process(config.policy, history, ctx, rng).sample);
    const auto ev = batch_detect(ctx.evalue(), alpha, stream, horizon);
    const auto bl = baseline_batch_detect(alpha, p_bar, stream, horizon);
    out[i] = {ev.stop_step.value_or(horizon), bl.stop_step.value_or(horizon)};
  });
  return out;
}

double sign_test_p_value(std::size_t wins, std::size_t losses) {
  return binomial_upper_tail(wins + losses, wins, 0.5);
}

}  // namespace ewm
