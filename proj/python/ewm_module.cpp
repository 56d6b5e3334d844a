#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ewm/cli.hpp"
#include "ewm/coupling.hpp"
#include "ewm/detection.hpp"
#include "ewm/error.hpp"
#include "ewm/evalue.hpp"
#include "ewm/oracles.hpp"
#include "ewm/simulation.hpp"

namespace py = pybind11;
using namespace ewm;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const SquareMatrix& m) {
  Rows out(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

NeighborhoodSpec make_spec(const std::vector<double>& anchor, double delta) {
  return NeighborhoodSpec(make_distribution(anchor), delta);
}

std::vector<SampledPair> to_stream(const std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<SampledPair> out;
  out.reserve(pairs.size());
  for (auto [v, s] : pairs) out.push_back({v, s});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anchored e-value watermarking: optimal e-values, couplings and sequential detection";

  py::register_exception<Error>(m, "EwmError", PyExc_ValueError);

  m.def("entropy", [](const std::vector<double>& w) { return entropy(make_distribution(w)); },
        py::arg("weights"));
  m.def("noise_profile",
        [](std::size_t n, double delta) {
          const auto nu = noise_profile(n, delta);
          return std::vector<double>(nu.weights().begin(), nu.weights().end());
        },
        py::arg("n"), py::arg("delta"));
  m.def("jstar", [](const std::vector<double>& anchor, double delta) { return jstar(make_spec(anchor, delta)); },
        py::arg("anchor"), py::arg("delta"));
  m.def("optimal_evalue",
        [](const std::vector<double>& anchor, double delta) {
          return to_rows(optimal_evalue(make_spec(anchor, delta)).scores());
        },
        py::arg("anchor"), py::arg("delta"));
  m.def("null_worst_expectation",
        [](const Rows& scores, const std::vector<double>& anchor, double delta) {
          SquareMatrix s(scores.size());
          for (std::size_t r = 0; r < scores.size(); ++r) {
            if (scores[r].size() != scores.size())
              throw Error(ErrorCode::DimensionMismatch, "scores must be square");
            for (std::size_t c = 0; c < scores.size(); ++c) s(r, c) = scores[r][c];
          }
          return null_worst_expectation(EValueTable(std::move(s)), make_spec(anchor, delta));
        },
        py::arg("scores"), py::arg("anchor"), py::arg("delta"));
  m.def("decompose_target",
        [](const std::vector<double>& anchor, double delta, const std::vector<double>& target) {
          std::vector<std::tuple<Index, Index, double>> out;
          for (const auto& t : decompose_target(make_spec(anchor, delta), make_distribution(target)).terms)
            out.emplace_back(t.pair.gain, t.pair.loss, t.weight);
          return out;
        },
        py::arg("anchor"), py::arg("delta"), py::arg("target"));
  m.def("extreme_coupling",
        [](const std::vector<double>& anchor, double delta, Index gain, Index loss) {
          return to_rows(extreme_coupling(make_spec(anchor, delta), {gain, loss}).joint());
        },
        py::arg("anchor"), py::arg("delta"), py::arg("gain"), py::arg("loss"));
  m.def("mixture_coupling",
        [](const std::vector<double>& anchor, double delta, const std::vector<double>& target) {
          const auto spec = make_spec(anchor, delta);
          return to_rows(mixture_coupling(spec, decompose_target(spec, make_distribution(target))).joint());
        },
        py::arg("anchor"), py::arg("delta"), py::arg("target"));
  m.def("batch_detect",
        [](const std::vector<double>& anchor, double delta, double alpha,
           const std::vector<std::pair<Index, Index>>& stream, std::optional<std::size_t> budget) {
          const auto spec = make_spec(anchor, delta);
          const auto pairs = to_stream(stream);
          const auto rep = batch_detect(optimal_evalue(spec), alpha, pairs,
                                        budget.value_or(std::max<std::size_t>(pairs.size(), 1)));
          py::dict d;
          d["decision"] = rep.decision == Decision::Rejected ? "rejected" : "undecided";
          d["stop_step"] = rep.stop_step ? py::object(py::int_(*rep.stop_step)) : py::object(py::none());
          d["wealth"] = rep.wealth;
          d["threshold"] = rep.threshold;
          d["steps"] = rep.steps;
          return d;
        },
        py::arg("anchor"), py::arg("delta"), py::arg("alpha"), py::arg("stream"),
        py::arg("budget") = py::none());
  m.def("two_token_maxmin",
        [](double p, double delta, std::size_t grid, std::size_t refinements) {
          const auto res = two_token_maxmin(p, delta, grid, refinements);
          return py::make_tuple(res.value, res.r00, res.r11);
        },
        py::arg("p"), py::arg("delta"), py::arg("grid") = 256, py::arg("refinements") = 4);
  m.def("estimate_stopping",
        [](const std::vector<double>& anchor, double delta, const std::vector<double>& alphas,
           std::size_t trials, std::uint64_t seed, const std::string& policy, unsigned threads) {
          ExperimentConfig cfg{make_spec(anchor, delta), alphas, trials, parse_policy(policy), std::nullopt, seed};
          std::vector<py::dict> out;
          {
            py::gil_scoped_release release;
            for (const auto& r : estimate_stopping(cfg, threads)) {
              py::gil_scoped_acquire acquire;
              py::dict d;
              d["alpha"] = r.alpha;
              d["log_inv_alpha"] = r.log_inv_alpha;
              d["mean_tau"] = r.mean_tau;
              d["std_err"] = r.std_err;
              d["ratio"] = r.ratio;
              d["censored_count"] = r.censored_count;
              out.push_back(std::move(d));
            }
          }
          return out;
        },
        py::arg("anchor"), py::arg("delta"), py::arg("alphas"), py::arg("trials"), py::arg("seed") = 0,
        py::arg("policy") = "fixed:0,1", py::arg("threads") = 0);
  m.def("calibrate_null",
        [](const std::vector<double>& anchor, double delta, double alpha, std::size_t trials,
           std::size_t horizon, std::optional<std::vector<double>> q_null, std::uint64_t seed,
           double evalue_scale) {
          const auto spec = make_spec(anchor, delta);
          const auto q = q_null ? make_distribution(*q_null) : spec.anchor();
          py::gil_scoped_release release;
          return calibrate_null(spec, optimal_evalue(spec).scaled(evalue_scale), alpha, trials, horizon, q, seed)
              .rate;
        },
        py::arg("anchor"), py::arg("delta"), py::arg("alpha"), py::arg("trials"), py::arg("horizon"),
        py::arg("q_null") = py::none(), py::arg("seed") = 0, py::arg("evalue_scale") = 1.0);
  m.def("run_command",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "ewm");
          std::ostringstream out, err;
          const int code = cli::run_command(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
