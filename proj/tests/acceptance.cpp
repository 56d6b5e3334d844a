// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ewm/cli.hpp"
#include "ewm/coupling.hpp"
#include "ewm/detection.hpp"
#include "ewm/evalue.hpp"
#include "ewm/oracles.hpp"
#include "ewm/simulation.hpp"
#include "generators.hpp"

using namespace ewm;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NeighborhoodSpec two_token(double p, double delta) {
  return NeighborhoodSpec(make_distribution({p, 1.0 - p}), delta);
}

Outcome closed_form() {
  CounterRng rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto spec = testing::random_spec(rng, 2, 8);
    const double gap = entropy(spec.anchor()) - entropy(noise_profile(spec.size(), spec.delta()));
    worst = std::max(worst, std::abs(jstar(spec) - gap));
  }
  return {worst <= 1e-12, fmt("100 specs, max |jstar - (H(p0) - H(nu))| = %.3g", worst)};
}

Outcome null_audit() {
  CounterRng rng(1002);
  double worst = 0.0;
  bool scaled_fails = true;
  for (int k = 0; k < 100; ++k) {
    const auto spec = testing::random_spec(rng, 2, 8);
    const auto e = optimal_evalue(spec);
    worst = std::max(worst, std::abs(null_worst_expectation(e, spec) - 1.0));
    scaled_fails = scaled_fails && !is_valid_evalue(e.scaled(1.01), spec);
  }
  return {worst <= 1e-10 && scaled_fails,
          fmt("100 specs, max |audit - 1| = %.3g; 1.01 e* rejected on all: %s", worst,
              scaled_fails ? "yes" : "no")};
}

Outcome maxmin_reproduction() {
  Outcome o;
  for (double p : {0.2, 0.5, 0.75}) {
    const auto res = two_token_maxmin(p, 0.01, 256, 4);
    const double j = jstar(two_token(p, 0.01));
    const double err = std::abs(res.value - j);
    o.passed = o.passed && err <= 1e-4;
    o.detail += fmt("p=%.2f J=%.6f closed=%.6f err=%.2g; ", p, res.value, j, err);
  }
  return o;
}

Outcome saddle_audit() {
  Outcome o;
  const std::vector<NeighborhoodSpec> specs{
      NeighborhoodSpec(make_distribution({0.5, 0.5}), 0.1),
      NeighborhoodSpec(make_distribution({0.4, 0.3, 0.3}), 0.1),
      NeighborhoodSpec(make_distribution({0.1, 0.2, 0.3, 0.4}), 0.05),
  };
  CounterRng rng(1004);
  for (const auto& spec : specs) {
    const auto rep = saddle_check(spec, 200, 0.05, rng);
    const auto m = log_scores(optimal_evalue(spec));
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& pair : enumerate_extremes(spec)) {
      const double v = best_path_inner_value(m, spec, pair).value;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const bool uniform = hi - lo <= 1e-12 && std::abs(hi - rep.jstar) <= 1e-12;
    o.passed = o.passed && rep.passed && rep.tested > 0 && uniform;
    o.detail += fmt("n=%zu tested=%zu skipped=%zu best=%.9f jstar=%.9f spread=%.2g; ", spec.size(), rep.tested,
                    rep.skipped, rep.best_candidate, rep.jstar, hi - lo);
  }
  return o;
}

Outcome stopping_reproduction() {
  Outcome o;
  const auto alphas = cli::parse_alpha_grid("log:1e-2:1e-120:30");
  for (double p : {0.2, 0.5, 0.75}) {
    ExperimentConfig cfg{two_token(p, 0.1), alphas, 10'000, FixedPair{{0, 1}}, std::nullopt, 20240};
    const auto rows = estimate_stopping(cfg);
    const double target = 1.0 / jstar(cfg.spec);
    const double rel = std::abs(rows.back().ratio - target) / target;

    // Monotone decrease within noise: no step up beyond 3 combined standard errors.
    std::size_t violations = 0;
    double worst_z = -INFINITY;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double se_a = rows[i - 1].std_err / rows[i - 1].log_inv_alpha;
      const double se_b = rows[i].std_err / rows[i].log_inv_alpha;
      const double z = (rows[i].ratio - rows[i - 1].ratio) / std::sqrt(se_a * se_a + se_b * se_b);
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++violations;
    }
    std::size_t censored = 0;
    for (const auto& r : rows) censored += r.censored_count;
    const bool above_first = rows.front().ratio > rows.back().ratio;
    o.passed = o.passed && rel <= 0.02 && violations == 0 && above_first;
    o.detail += fmt("p=%.2f ratio=%.5f 1/J*=%.5f rel=%.2f%% max_up_z=%.2f censored=%zu; ", p, rows.back().ratio,
                    target, 100 * rel, worst_z, censored);
  }
  return o;
}

Outcome ville_calibration() {
  Outcome o;
  std::size_t checks = 0;
  double worst_margin = INFINITY;
  for (double p : {0.2, 0.5, 0.75}) {
    const auto spec = two_token(p, 0.1);
    const auto e = optimal_evalue(spec);
    std::vector<VocabDistribution> nulls{spec.anchor()};
    for (const auto& pair : enumerate_extremes(spec)) nulls.push_back(make_distribution(extreme_point(spec, pair)));
    for (double alpha : {0.1, 0.05, 0.02}) {
      const auto horizon = static_cast<std::size_t>(std::ceil(5.0 * std::log(1.0 / alpha) / jstar(spec)));
      const double bound = alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / 10'000);
      for (std::size_t qi = 0; qi < nulls.size(); ++qi) {
        const auto cal = calibrate_null(spec, e, alpha, 10'000, horizon, nulls[qi], 6000 + qi);
        ++checks;
        worst_margin = std::min(worst_margin, bound - cal.rate);
        if (cal.rate > bound) {
          o.passed = false;
          o.detail += fmt("FAIL p=%.2f alpha=%.2f rate=%.4f bound=%.4f; ", p, alpha, cal.rate, bound);
        }
        if (p == 0.5 && qi == 0)
          o.detail += fmt("p=0.5 q=p0 alpha=%.2f rate=%.4f bound=%.4f; ", alpha, cal.rate, bound);
      }
    }
  }
  o.detail += fmt("%zu (anchor, q_null, alpha) cells, min slack %.4f", checks, worst_margin);
  return o;
}

Outcome coupling_correctness() {
  CounterRng rng(1007);
  double worst = 0.0;
  std::size_t band_checks = 0, band_fails = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto spec = testing::random_spec(rng, 2, 8);
    const auto q = testing::random_target(rng, spec);
    const auto w = mixture_coupling(spec, decompose_target(spec, q));
    const auto rows = w.joint().row_sums();
    const auto cols = w.joint().col_sums();
    for (Index i = 0; i < spec.size(); ++i) {
      worst = std::max(worst, std::abs(rows[i] - q[i]));
      worst = std::max(worst, std::abs(cols[i] - spec.anchor()[i]));
    }
    if (k % 50 == 0) {
      const std::size_t draws = 100'000;
      const CouplingSampler sampler(w);
      std::vector<std::size_t> counts(spec.size());
      for (std::size_t d = 0; d < draws; ++d) ++counts[sampler.draw(rng).v];
      for (Index i = 0; i < spec.size(); ++i) {
        const double sd = std::sqrt(q[i] * (1 - q[i]) / draws);
        ++band_checks;
        if (std::abs(static_cast<double>(counts[i]) / draws - q[i]) > 4 * sd) ++band_fails;
      }
    }
  }
  return {worst <= 1e-12 && band_fails == 0,
          fmt("1000 (spec, q) pairs, max marginal error %.3g; 10^5-draw 4-sigma bands %zu/%zu inside", worst,
              band_checks - band_fails, band_checks)};
}

Outcome growth_identity() {
  CounterRng rng(1008);
  double worst = 0.0;
  std::size_t pairs = 0;
  for (int k = 0; k < 100; ++k) {
    const auto spec = testing::random_spec(rng, 2, 8);
    const auto e = optimal_evalue(spec);
    const double j = jstar(spec);
    for (const auto& pair : enumerate_extremes(spec)) {
      const auto w = extreme_coupling(spec, pair);
      double g = 0.0;
      for (Index v = 0; v < spec.size(); ++v)
        for (Index s = 0; s < spec.size(); ++s)
          if (w(v, s) > 0.0) g += w(v, s) * std::log(e(v, s));
      worst = std::max(worst, std::abs(g - j));
      ++pairs;
    }
  }
  return {worst <= 1e-12, fmt("100 specs, %zu extreme pairs, max |sum w* ln e* - jstar| = %.3g", pairs, worst)};
}

Outcome baseline_comparison() {
  const double alpha = 0.02;
  ExperimentConfig cfg{two_token(0.5, 0.3), {alpha}, 1000, FixedPair{{0, 1}}, std::nullopt, 9090};
  const std::size_t horizon = default_horizon(cfg.spec, alpha) * 4;
  const auto stops = compare_with_baseline(cfg, alpha, horizon);
  double sum_e = 0.0, sum_b = 0.0;
  std::size_t wins = 0, losses = 0, censored_b = 0;
  for (const auto& s : stops) {
    sum_e += static_cast<double>(s.evalue);
    sum_b += static_cast<double>(s.baseline);
    if (s.evalue < s.baseline) ++wins;
    if (s.evalue > s.baseline) ++losses;
    if (s.baseline >= horizon) ++censored_b;
  }
  const double mean_e = sum_e / static_cast<double>(stops.size());
  const double mean_b = sum_b / static_cast<double>(stops.size());
  const double p_value = sign_test_p_value(wins, losses);
  return {mean_e < mean_b && p_value < 0.01,
          fmt("mean stop e-value %.3f vs baseline %.3f; wins %zu losses %zu ties %zu; sign test p = %.3g; "
              "baseline censored %zu",
              mean_e, mean_b, wins, losses, stops.size() - wins - losses, p_value, censored_b)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form cross-checks", 1.0, closed_form},
      {2, "null audit", 1.0, null_audit},
      {3, "two-token max-min reproduction", 10.0, maxmin_reproduction},
      {4, "saddle-point audit", 30.0, saddle_audit},
      {5, "stopping-time reproduction", 300.0, stopping_reproduction},
      {6, "Ville calibration", 120.0, ville_calibration},
      {7, "coupling correctness", 60.0, coupling_correctness},
      {8, "growth identity", 60.0, growth_identity},
      {9, "baseline comparison", 60.0, baseline_comparison},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool ok = o.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s [%d] %s (%.2fs, limit %.0fs%s): %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_seconds, in_time ? "" : ", over time", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
