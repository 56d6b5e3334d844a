#include <doctest.h>

#include <cmath>

#include "ewm/error.hpp"
#include "ewm/oracles.hpp"
#include "generators.hpp"

using namespace ewm;

namespace {

NeighborhoodSpec spec2() { return NeighborhoodSpec(make_distribution({0.5, 0.5}), 0.1); }
NeighborhoodSpec spec3() { return NeighborhoodSpec(make_distribution({0.4, 0.3, 0.3}), 0.1); }

ScoreMatrix zeros_with(std::size_t n, std::initializer_list<std::tuple<Index, Index, double>> cells) {
  SquareMatrix m(n, 0.0);
  for (auto [v, s, x] : cells) m(v, s) = x;
  return ScoreMatrix(m);
}

}  // namespace

TEST_CASE("ScoreMatrix and log_scores") {
  SquareMatrix bad(2, 0.0);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(ScoreMatrix{bad}, Error);
  SquareMatrix zero(2, 1.0);
  zero(1, 0) = 0.0;
  CHECK_THROWS_AS(log_scores(EValueTable(zero)), Error);
  CHECK(log_scores(optimal_evalue(spec2()))(0, 0) == doctest::Approx(std::log(1.9)));
}

TEST_CASE("path_gain") {
  const auto m = log_scores(optimal_evalue(spec3()));
  // ln(0.025 / 0.95) from a 40-digit evaluation.
  CHECK(std::abs(path_gain(m, PathSpec({0, 2})) - -3.63758615972639) < 1e-12);
  CHECK(std::abs(path_gain(m, PathSpec({0, 1, 2})) - 2 * -3.63758615972639) < 1e-12);
  CHECK(path_gain(zeros_with(3, {}), PathSpec({2, 0})) == 0.0);
}

TEST_CASE("best_path_inner_value examples") {
  const auto spec = spec3();
  const auto m = log_scores(optimal_evalue(spec));
  const auto r = best_path_inner_value(m, spec, {0, 2});
  CHECK(std::abs(r.value - 0.855727372971354) < 1e-12);
  CHECK(r.best_path.vertices() == std::vector<Index>{0, 2});

  // J0 = H(p0) + ln(0.95) = 1.03760668095767.
  double j0 = 0.0;
  for (Index v = 0; v < 3; ++v) j0 += spec.anchor()[v] * m(v, v);
  CHECK(std::abs(j0 - 1.03760668095767) < 1e-12);

  const auto r2 = best_path_inner_value(log_scores(optimal_evalue(spec2())), spec2(), {1, 0});
  CHECK(std::abs(r2.value - 0.494631937214073) < 1e-12);

  const NeighborhoodSpec spec4(make_distribution({0.25, 0.25, 0.25, 0.25}), 0.1);
  const auto bonus = zeros_with(4, {{0, 3, 50.0}, {3, 1, 50.0}});
  const auto r4 = best_path_inner_value(bonus, spec4, {0, 1});
  CHECK(r4.best_path.vertices() == std::vector<Index>{0, 3, 1});
  CHECK(r4.value == doctest::Approx(0.05 * 100.0));

  const auto flat = best_path_inner_value(zeros_with(4, {}), spec4, {0, 1});
  CHECK(flat.best_path.vertices() == std::vector<Index>{0, 1});

  const NeighborhoodSpec big(make_distribution(std::vector<double>(11, 1.0 / 11)), 0.05);
  CHECK_THROWS_AS(best_path_inner_value(zeros_with(11, {}), big, {0, 1}), Error);
}

TEST_CASE("cycle_condition_check") {
  CHECK(cycle_condition_check(log_scores(optimal_evalue(spec3())), 3));
  CHECK(cycle_condition_check(zeros_with(4, {}), 4));
  CHECK_FALSE(cycle_condition_check(zeros_with(3, {{0, 1, 1.0}, {1, 0, 1.0}}), 3));
  // A 3-cycle violation invisible to the length-2 cap.
  const auto tri = zeros_with(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}, {1, 0, -1.0}, {2, 1, -1.0}, {0, 2, -1.0}});
  CHECK(cycle_condition_check(tri, 2));
  CHECK_FALSE(cycle_condition_check(tri, 3));
  CHECK_THROWS_AS(cycle_condition_check(zeros_with(9, {}), 9), Error);
  CHECK_NOTHROW(cycle_condition_check(zeros_with(9, {}), 3));
}

TEST_CASE("two_token_objective and maxmin") {
  // At the closed-form optimum the objective equals J*.
  CHECK(std::abs(two_token_objective(0.5, 0.01, 0.995, 0.995) - 0.661668114612779) < 1e-12);

  const auto res = two_token_maxmin(0.5, 0.01, 256, 4);
  CHECK(std::abs(res.value - 0.661668114612779) < 1e-4);
  CHECK(res.r00 == doctest::Approx(0.995).epsilon(1e-3));
  CHECK(res.r11 == doctest::Approx(0.995).epsilon(1e-3));
  CHECK(res.trace.size() == 5);
  for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i].objective >= res.trace[i - 1].objective);

  CHECK(std::abs(two_token_maxmin(0.2, 0.01, 256, 4).value - 0.468923357591021) < 1e-4);
  CHECK_THROWS_AS(two_token_maxmin(0.5, 0.6, 256, 4), Error);
  CHECK_THROWS_AS(two_token_maxmin(0.5, 0.01, 16, 4), Error);
  CHECK_THROWS_AS(two_token_maxmin(0.5, 0.01, 256, 0), Error);
}

TEST_CASE("two_token_maxmin converges over the parameter grid") {
  for (double p : {0.2, 0.5, 0.75})
    for (double delta : {0.01, 0.1}) {
      const double j = jstar(NeighborhoodSpec(make_distribution({p, 1 - p}), delta));
      CHECK(std::abs(two_token_maxmin(p, delta, 256, 4).value - j) <= 1e-4);
    }
}

TEST_CASE("worst_case_inner_value and saddle_check") {
  const auto spec = spec2();
  const auto rstar = kernel_of(optimal_evalue(spec), spec);
  CHECK(std::abs(worst_case_inner_value(spec, rstar) - jstar(spec)) < 1e-12);
  CHECK_THROWS_AS(worst_case_inner_value(spec, rstar.scaled(1.1)), Error);

  CounterRng rng(51);
  const auto rep = saddle_check(spec, 200, 0.05, rng);
  CHECK(rep.passed);
  CHECK(rep.tested + rep.skipped == 200);
  CHECK(rep.best_candidate <= jstar(spec) + 1e-9);

  const auto still = saddle_check(spec, 5, 0.0, rng);
  CHECK(still.passed);
  CHECK(std::abs(still.best_candidate - jstar(spec)) < 1e-12);
}

TEST_CASE("property: inner-value uniformity and single-hop optimality under e*") {
  CounterRng rng(52);
  for (int trial = 0; trial < 60; ++trial) {
    const auto spec = testing::random_spec(rng, 2, 6);
    const auto e = optimal_evalue(spec);
    const auto m = log_scores(e);
    const double j = jstar(spec);
    CHECK(cycle_condition_check(m, spec.size()));
    for (const auto& pair : enumerate_extremes(spec)) {
      const auto r = best_path_inner_value(m, spec, pair);
      CHECK(std::abs(r.value - j) < 1e-12);
      CHECK(r.best_path.hops() == 1);

      const auto w = extreme_coupling(spec, pair);
      double direct = 0.0;
      for (Index v = 0; v < spec.size(); ++v)
        for (Index s = 0; s < spec.size(); ++s) direct += w(v, s) * m(v, s);
      CHECK(std::abs(direct - r.value) < 1e-12);

      const double one_hop = path_gain(m, PathSpec({pair.gain, pair.loss}));
      for (Index mid = 0; mid < spec.size(); ++mid) {
        if (mid == pair.gain || mid == pair.loss) continue;
        CHECK(path_gain(m, PathSpec({pair.gain, mid, pair.loss})) < one_hop);
      }
    }
  }
}

TEST_CASE("property: random perturbations of r* never beat jstar") {
  CounterRng rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = testing::random_spec(rng, 2, 4);
    const auto rep = saddle_check(spec, 50, 0.05, rng);
    CHECK(rep.passed);
  }
}
