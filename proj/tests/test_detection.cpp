#include <doctest.h>

#include <cmath>
#include <vector>

#include "ewm/detection.hpp"
#include "ewm/error.hpp"
#include "generators.hpp"

using namespace ewm;

namespace {

NeighborhoodSpec spec2() { return NeighborhoodSpec(make_distribution({0.5, 0.5}), 0.1); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ewm::Error");
  return ErrorCode::UsageError;
}

}  // namespace

TEST_CASE("init_detector thresholds") {
  const auto e = optimal_evalue(spec2());
  CHECK(init_detector(e, 0.02).threshold() == doctest::Approx(3.91202300542815).epsilon(1e-14));
  // 120 ln 10 to 15 digits.
  CHECK(std::abs(init_detector(e, 1e-120).threshold() - 276.310211159285) < 1e-9);
  CHECK(code_of([&] { init_detector(e, 1.5); }) == ErrorCode::BadAlpha);
  CHECK(code_of([&] { init_detector(e, 0.0); }) == ErrorCode::BadAlpha);
}

TEST_CASE("observe accumulates log e-values") {
  const auto e = optimal_evalue(spec2());
  auto st = observe(init_detector(e, 0.05), e, 0, 0);
  CHECK(st.wealth == doctest::Approx(0.641854).epsilon(1e-6));
  st = observe(st, e, 0, 1);
  CHECK(st.wealth == doctest::Approx(0.641854 - 2.302585).epsilon(1e-6));
  CHECK(st.steps == 2);

  const auto half = observe(init_detector(e, 0.5), e, 0, 0);
  CHECK(half.status == Decision::Running);

  CHECK(code_of([&] { observe(st, e, 2, 0); }) == ErrorCode::IndexOutOfRange);

  auto stopped = init_detector(e, 0.9);
  stopped = observe(stopped, e, 1, 1);
  CHECK(stopped.rejected());
  CHECK(stopped.stop_step == 1);
  CHECK(code_of([&] { observe(stopped, e, 0, 0); }) == ErrorCode::AlreadyStopped);
}

TEST_CASE("worst_null_match_prob") {
  CHECK(worst_null_match_prob(spec2()) == doctest::Approx(0.5));
  CHECK(worst_null_match_prob(make_distribution({0.75, 0.25}), 0.1) == doctest::Approx(0.65));
  CHECK(worst_null_match_prob(make_distribution({0.75, 0.25}), 0.0) == doctest::Approx(0.625));
}

TEST_CASE("worst_null_match_prob is the sup over the ball") {
  CounterRng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = testing::random_spec(rng);
    const double bound = worst_null_match_prob(spec);
    double best = 0.0;
    for (const auto& pair : enumerate_extremes(spec)) {
      const auto q = extreme_point(spec, pair);
      double m = 0.0;
      for (Index v = 0; v < spec.size(); ++v) m += q[v] * spec.anchor()[v];
      best = std::max(best, m);
    }
    CHECK(std::abs(best - bound) < 1e-12);
  }
}

TEST_CASE("binomial_upper_tail") {
  CHECK(binomial_upper_tail(10, 0, 0.3) == 1.0);
  CHECK(binomial_upper_tail(12, 12, 0.5) == doctest::Approx(std::ldexp(1.0, -12)).epsilon(1e-12));
  CHECK(binomial_upper_tail(5, 3, 0.5) == doctest::Approx(0.5));
  CHECK(binomial_upper_tail(4, 5, 0.5) == 0.0);
  // P(Bin(20, 0.3) >= 10) = 0.0479618973... by direct summation.
  double direct = 0.0;
  for (int k = 10; k <= 20; ++k) direct += std::exp(std::lgamma(21.0) - std::lgamma(k + 1.0) - std::lgamma(21.0 - k) +
                                                    k * std::log(0.3) + (20 - k) * std::log(0.7));
  CHECK(binomial_upper_tail(20, 10, 0.3) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("baseline schedule") {
  auto st = init_baseline(0.05, 0.5);
  st = baseline_observe(st, 0, 0);
  CHECK(st.last_p_value == doctest::Approx(0.5));
  CHECK_FALSE(st.rejected());
  for (int k = 2; k <= 10; ++k) st = baseline_observe(st, 1, 1);
  CHECK(st.matches == 10);
  CHECK_FALSE(st.rejected());
  st = baseline_observe(st, 0, 0);
  CHECK_FALSE(st.rejected());
  st = baseline_observe(st, 0, 0);
  CHECK(st.rejected());
  CHECK(st.stop_step == 12);
  CHECK(code_of([&] { baseline_observe(st, 0, 0); }) == ErrorCode::AlreadyStopped);
  CHECK(code_of([] { init_baseline(0.05, 1.0); }) == ErrorCode::BadParams);
  CHECK(code_of([] { init_baseline(2.0, 0.5); }) == ErrorCode::BadAlpha);

  double total = 0.0;
  for (int k = 1; k <= 1'000'000; ++k) total += 1.0 / (static_cast<double>(k) * (k + 1));
  CHECK(total == doctest::Approx(1.0 - 1.0 / 1'000'001).epsilon(1e-12));
}

TEST_CASE("batch_detect") {
  const auto e = optimal_evalue(spec2());
  const std::vector<SampledPair> diag(20, SampledPair{0, 0});
  const auto rep = batch_detect(e, 0.02, diag, 100);
  CHECK(rep.decision == Decision::Rejected);
  REQUIRE(rep.stop_step);
  CHECK(*rep.stop_step == 7);
  CHECK(rep.steps == 7);
  CHECK(rep.wealth == doctest::Approx(7 * std::log(1.9)));

  const auto short_budget = batch_detect(e, 0.02, diag, 6);
  CHECK(short_budget.decision == Decision::Running);
  CHECK_FALSE(short_budget.stop_step);
  CHECK(short_budget.steps == 6);

  const std::vector<SampledPair> off(1000, SampledPair{0, 1});
  const auto never = batch_detect(e, 0.02, off, 1000);
  CHECK(never.decision == Decision::Running);
  CHECK(never.wealth < 0.0);

  CHECK(code_of([&] { batch_detect(e, 0.02, std::vector<SampledPair>{}, 10); }) == ErrorCode::EmptyStream);
  CHECK(code_of([&] { batch_detect(e, 0.02, diag, 0); }) == ErrorCode::BadParams);
}

TEST_CASE("batch_detect resumes from a saved state") {
  const auto e = optimal_evalue(spec2());
  const std::vector<SampledPair> diag(20, SampledPair{1, 1});
  const auto first = run_detector(e, init_detector(e, 0.02), diag, 4);
  CHECK(first.steps == 4);
  const auto rep = batch_detect(e, first, diag, 20);
  REQUIRE(rep.stop_step);
  CHECK(*rep.stop_step == 7);
}

TEST_CASE("baseline_batch_detect") {
  const std::vector<SampledPair> diag(30, SampledPair{0, 0});
  const auto rep = baseline_batch_detect(0.05, 0.5, diag, 30);
  REQUIRE(rep.stop_step);
  CHECK(*rep.stop_step == 12);
  CHECK(rep.matches == 12);
}

TEST_CASE("property: status is a function of the running maximum of wealth") {
  CounterRng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = testing::random_spec(rng, 2, 5);
    const auto e = optimal_evalue(spec);
    const double alpha = 0.01 + 0.5 * rng.uniform();
    auto st = init_detector(e, alpha);
    double running_max = 0.0;
    for (int k = 0; k < 200 && !st.rejected(); ++k) {
      st = observe(st, e, rng.below(spec.size()), rng.below(spec.size()));
      running_max = std::max(running_max, st.wealth);
      CHECK(st.rejected() == (running_max >= st.threshold()));
    }
  }
}
