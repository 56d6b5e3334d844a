#include "ewm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ewm/coupling.hpp"
#include "ewm/detection.hpp"
#include "ewm/error.hpp"
#include "ewm/evalue.hpp"
#include "ewm/io.hpp"
#include "ewm/oracles.hpp"
#include "ewm/simulation.hpp"

namespace ewm::cli {

using io::json;

namespace {

double parse_real(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(x))
    throw Error(ErrorCode::FormatError, "not a number: '" + s + "'");
  return x;
}

}  // namespace

std::vector<double> parse_alpha_grid(const std::string& token) {
  if (token.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(token.substr(4));
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw Error(ErrorCode::FormatError, "expected log:<start>:<end>:<count>");
    const double start = parse_real(parts[0]);
    const double end = parse_real(parts[1]);
    const double count_real = parse_real(parts[2]);
    if (count_real < 2 || count_real != std::floor(count_real))
      throw Error(ErrorCode::FormatError, "log grid needs an integer count >= 2");
    if (!(start > 0.0) || !(end > 0.0))
      throw Error(ErrorCode::FormatError, "log grid endpoints must be positive");
    const auto count = static_cast<std::size_t>(count_real);
    std::vector<double> out(count);
    const double ls = std::log(start), le = std::log(end);
    for (std::size_t i = 0; i < count; ++i)
      out[i] = std::exp(ls + (le - ls) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = start;
    out.back() = end;
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(token);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_real(item));
  if (out.empty()) throw Error(ErrorCode::FormatError, "empty alpha list");
  return out;
}

namespace {

struct SpecFlags {
  std::string anchor;
  std::string anchor_file;
  double delta = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--anchor", anchor, "Anchor as a JSON array, or a path to a JSON file");
    app->add_option("--anchor-file", anchor_file, "JSON file holding the anchor (array or spec object)");
    app->add_option("--delta", delta, "l1 robustness radius")->required();
  }

  NeighborhoodSpec resolve() const {
    json j;
    const auto trimmed = anchor.substr(std::min(anchor.find_first_not_of(" \t"), anchor.size()));
    if (!anchor.empty() && trimmed.front() == '[') {
      j = io::parse(anchor);
    } else if (!anchor.empty()) {
      j = io::read_json_file(anchor);
    } else if (!anchor_file.empty()) {
      j = io::read_json_file(anchor_file);
    } else {
      throw Error(ErrorCode::UsageError, "one of --anchor or --anchor-file is required");
    }
    if (j.is_object() && j.contains("anchor")) j = j["anchor"];
    return NeighborhoodSpec(io::distribution_from_json(j), delta);
  }
};

class Output {
 public:
  Output(std::ostream& fallback, std::string path) : fallback_(fallback), path_(std::move(path)) {}

  void write(const std::string& text) const {
    if (path_.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path_);
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + path_);
  }

 private:
  std::ostream& fallback_;
  std::string path_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

unsigned threads_from(long value) { return value <= 0 ? 0u : static_cast<unsigned>(value); }

std::vector<SampledPair> read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return io::read_stream_csv(in);
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anchored e-value watermarking: optimal e-values, couplings and sequential detection",
               argv.empty() ? "ewm" : argv.front()};
  app.require_subcommand(1);

  enum class Phase { Resolve, Execute };
  Phase phase = Phase::Resolve;

  // jstar
  SpecFlags jstar_spec;
  std::string jstar_out;
  auto* c_jstar = app.add_subcommand("jstar", "Optimal log-growth rate for an anchor and radius");
  jstar_spec.attach(c_jstar);
  c_jstar->add_option("--out", jstar_out);
  c_jstar->callback([&] {
    const auto spec = jstar_spec.resolve();
    phase = Phase::Execute;
    const double h = entropy(spec.anchor());
    const double h_nu = entropy(noise_profile(spec.size(), spec.delta()));
    const double j = jstar(spec);
    Output(out, jstar_out)
        .write(dump({{"n", spec.size()},
                     {"delta", spec.delta()},
                     {"entropy", io::sig12(h)},
                     {"noise_entropy", io::sig12(h_nu)},
                     {"jstar", io::sig12(j)},
                     {"inv_jstar", io::sig12(1.0 / j)}}));
  });

  // maxmin2
  double mm_p = 0.5, mm_delta = 0.01;
  std::size_t mm_grid = 256, mm_ref = 4;
  std::string mm_trace, mm_out;
  auto* c_mm = app.add_subcommand("maxmin2", "Two-token max-min solver by nested grid search");
  c_mm->add_option("--p", mm_p, "Anchor is (p, 1-p)")->required();
  c_mm->add_option("--delta", mm_delta)->capture_default_str();
  c_mm->add_option("--grid", mm_grid)->capture_default_str();
  c_mm->add_option("--refinements", mm_ref)->capture_default_str();
  c_mm->add_option("--trace", mm_trace, "CSV trace refinement,r00,r11,objective");
  c_mm->add_option("--out", mm_out);
  c_mm->callback([&] {
    const NeighborhoodSpec spec(make_distribution({mm_p, 1.0 - mm_p}), mm_delta);
    if (mm_grid < 64 || mm_ref < 1)
      throw Error(ErrorCode::BadParams, "need --grid >= 64 and --refinements >= 1");
    phase = Phase::Execute;
    const auto res = two_token_maxmin(mm_p, mm_delta, mm_grid, mm_ref);
    const double j = jstar(spec);
    if (!mm_trace.empty()) {
      std::ostringstream csv;
      io::write_maxmin_trace_csv(csv, res.trace);
      Output(out, mm_trace).write(csv.str());
    }
    Output(out, mm_out)
        .write(dump({{"p", mm_p},
                     {"delta", mm_delta},
                     {"grid", mm_grid},
                     {"refinements", mm_ref},
                     {"value", io::sig12(res.value)},
                     {"jstar", io::sig12(j)},
                     {"abs_error", io::sig12(std::abs(res.value - j))},
                     {"r00", io::sig12(res.r00)},
                     {"r11", io::sig12(res.r11)}}));
  });

  // sweep-tau
  SpecFlags sw_spec;
  std::string sw_alphas = "log:1e-2:1e-120:30", sw_policy = "fixed:0,1", sw_out;
  std::size_t sw_trials = 10000;
  std::optional<std::size_t> sw_horizon;
  std::uint64_t sw_seed = 0;
  long sw_threads = 0;
  auto* c_sw = app.add_subcommand("sweep-tau", "Monte Carlo mean stopping time over an alpha grid");
  sw_spec.attach(c_sw);
  c_sw->add_option("--alphas", sw_alphas)->capture_default_str();
  c_sw->add_option("--trials", sw_trials)->capture_default_str();
  c_sw->add_option("--seed", sw_seed)->capture_default_str();
  c_sw->add_option("--policy", sw_policy, "fixed:a,b | round-robin | random | greedy[:window]")
      ->capture_default_str();
  c_sw->add_option("--horizon", sw_horizon, "Step cap per trial (default ceil(10 ln(1/alpha)/J*))");
  c_sw->add_option("--threads", sw_threads)->envname("EWM_THREADS");
  c_sw->add_option("--out", sw_out);
  c_sw->callback([&] {
    ExperimentConfig cfg{sw_spec.resolve(), parse_alpha_grid(sw_alphas), sw_trials,
                         parse_policy(sw_policy), sw_horizon, sw_seed};
    validate(cfg);
    phase = Phase::Execute;
    const auto rows = estimate_stopping(cfg, threads_from(sw_threads));
    std::ostringstream csv;
    io::write_stopping_csv(csv, rows);
    Output(out, sw_out).write(csv.str());
    std::size_t censored = 0;
    for (const auto& r : rows) censored += r.censored_count;
    if (censored > 0) err << "warning: " << censored << " censored trials counted at the horizon cap\n";
  });

  // calibrate-null
  SpecFlags cn_spec;
  std::string cn_alphas = "0.1,0.05,0.02", cn_q, cn_out;
  std::size_t cn_trials = 10000;
  std::optional<std::size_t> cn_horizon;
  double cn_multiple = 5.0, cn_scale = 1.0;
  std::uint64_t cn_seed = 0;
  long cn_threads = 0;
  auto* c_cn = app.add_subcommand("calibrate-null", "False-positive rate of the detector under the null");
  cn_spec.attach(c_cn);
  c_cn->add_option("--alphas", cn_alphas)->capture_default_str();
  c_cn->add_option("--trials", cn_trials)->capture_default_str();
  c_cn->add_option("--horizon", cn_horizon, "Fixed step horizon (overrides --horizon-multiple)");
  c_cn->add_option("--horizon-multiple", cn_multiple, "Horizon = ceil(multiple ln(1/alpha) / J*)")
      ->capture_default_str();
  c_cn->add_option("--q-null", cn_q, "Null outcome distribution as a JSON array (default: anchor)");
  c_cn->add_option("--evalue-scale", cn_scale, "Multiply e* by this factor (negative control)")
      ->capture_default_str();
  c_cn->add_option("--seed", cn_seed)->capture_default_str();
  c_cn->add_option("--threads", cn_threads)->envname("EWM_THREADS");
  c_cn->add_option("--out", cn_out);
  c_cn->callback([&] {
    const auto spec = cn_spec.resolve();
    const auto alphas = parse_alpha_grid(cn_alphas);
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::BadAlpha, "alpha must lie in (0, 1)");
    const auto q = cn_q.empty() ? spec.anchor() : io::distribution_from_json(io::parse(cn_q));
    if (l1_distance(spec.anchor(), q) > spec.delta() + tol::kReconstruct)
      throw Error(ErrorCode::OutsideNeighborhood, "--q-null lies outside the neighborhood");
    if (!(cn_scale > 0.0) || !(cn_multiple > 0.0) || cn_trials < 1 || (cn_horizon && *cn_horizon < 1))
      throw Error(ErrorCode::BadParams, "scale, horizon and trials must be positive");
    phase = Phase::Execute;
    const auto e = optimal_evalue(spec).scaled(cn_scale);
    std::vector<NullCalibration> rows;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const std::size_t horizon = cn_horizon ? *cn_horizon : default_horizon(spec, alphas[i], cn_multiple);
      rows.push_back(calibrate_null(spec, e, alphas[i], cn_trials, horizon, q, trial_seed(cn_seed, i, 0),
                                    threads_from(cn_threads)));
    }
    std::ostringstream csv;
    io::write_calibration_csv(csv, rows);
    Output(out, cn_out).write(csv.str());
  });

  // generate
  SpecFlags gen_spec;
  std::string gen_policy = "fixed:0,1", gen_target, gen_out;
  std::size_t gen_steps = 1000;
  std::uint64_t gen_seed = 0;
  auto* c_gen = app.add_subcommand("generate", "Sample a watermarked (v, s) stream");
  gen_spec.attach(c_gen);
  c_gen->add_option("--steps", gen_steps)->capture_default_str();
  c_gen->add_option("--seed", gen_seed)->capture_default_str();
  auto* gen_policy_opt = c_gen->add_option("--policy", gen_policy, "Adversary policy")->capture_default_str();
  c_gen->add_option("--target", gen_target, "Fixed target q as a JSON array (mixture coupling)")
      ->excludes(gen_policy_opt);
  c_gen->add_option("--out", gen_out, "CSV step,v,s (stdout if omitted)");
  c_gen->callback([&] {
    const auto spec = gen_spec.resolve();
    if (gen_steps < 1) throw Error(ErrorCode::BadParams, "--steps must be >= 1");
    std::optional<CouplingMatrix> fixed;
    std::optional<AdversaryPolicy> policy;
    if (!gen_target.empty()) {
      const auto q = io::distribution_from_json(io::parse(gen_target));
      fixed = mixture_coupling(spec, decompose_target(spec, q));
    } else {
      policy = parse_policy(gen_policy);
      ExperimentConfig probe{spec, {0.5}, 1, *policy, std::nullopt, 0};
      validate(probe);
    }
    phase = Phase::Execute;
    std::vector<SampledPair> stream;
    stream.reserve(gen_steps);
    CounterRng rng(gen_seed);
    if (fixed) {
      const CouplingSampler sampler(*fixed);
      for (std::size_t t = 0; t < gen_steps; ++t) stream.push_back(sampler.draw(rng));
    } else {
      const ProcessContext ctx(spec, optimal_evalue(spec));
      ProcessHistory history(ctx.pairs().size(),
                             std::holds_alternative<HistoryGreedy>(*policy)
                                 ? std::get<HistoryGreedy>(*policy).window
                                 : 1);
      for (std::size_t t = 0; t < gen_steps; ++t)
        stream.push_back(step_process(*policy, history, ctx, rng).sample);
    }
    std::ostringstream csv;
    io::write_stream_csv(csv, stream);
    Output(out, gen_out).write(csv.str());
  });

  // detect
  SpecFlags det_spec;
  std::string det_method = "evalue", det_stream, det_table, det_state_in, det_state_out, det_out;
  double det_alpha = 0.02;
  std::optional<std::size_t> det_budget;
  auto* c_det = app.add_subcommand("detect", "Sequential detection over a stream CSV");
  det_spec.attach(c_det);
  c_det->add_option("--alpha", det_alpha)->capture_default_str();
  c_det->add_option("--method", det_method)
      ->check(CLI::IsMember({"evalue", "baseline"}))
      ->capture_default_str();
  c_det->add_option("--stream", det_stream, "CSV step,v,s")->required();
  c_det->add_option("--budget", det_budget, "Maximum observations (default: whole stream)");
  c_det->add_option("--evalue-file", det_table, R"(Custom table {"n":..,"scores":[..]} instead of e*)");
  c_det->add_option("--state-in", det_state_in, "Resume from a saved detector state");
  c_det->add_option("--state-out", det_state_out, "Save the detector state after this run");
  c_det->add_option("--out", det_out);
  c_det->callback([&] {
    const auto spec = det_spec.resolve();
    if (!(det_alpha > 0.0 && det_alpha < 1.0)) throw Error(ErrorCode::BadAlpha, "--alpha must lie in (0, 1)");
    if (det_budget && *det_budget < 1) throw Error(ErrorCode::BadParams, "--budget must be >= 1");
    const auto e = det_table.empty() ? optimal_evalue(spec) : io::evalue_from_json(io::read_json_file(det_table));
    if (e.size() != spec.size()) throw Error(ErrorCode::DimensionMismatch, "e-value table vs anchor");
    std::optional<DetectorState> resume;
    if (!det_state_in.empty()) resume = io::detector_from_json(io::read_json_file(det_state_in));
    if (resume && det_method != "evalue")
      throw Error(ErrorCode::UsageError, "--state-in applies to --method evalue only");
    const auto stream = read_stream_file(det_stream);
    phase = Phase::Execute;
    const std::size_t budget = det_budget.value_or(std::max<std::size_t>(stream.size(), 1));
    json report;
    if (det_method == "evalue") {
      const DetectorState start = resume ? *resume : init_detector(e, det_alpha);
      if (start.rejected()) throw Error(ErrorCode::AlreadyStopped, "saved detector already rejected");
      const auto final_state = run_detector(e, start, stream, budget);
      report = io::to_json(make_report(final_state));
      report["method"] = "evalue";
      if (!det_state_out.empty()) Output(out, det_state_out).write(dump(io::to_json(final_state)));
    } else {
      report = io::to_json(baseline_batch_detect(det_alpha, worst_null_match_prob(spec), stream, budget));
      report["method"] = "baseline";
      report["threshold_schedule"] = "alpha/(k(k+1))";
    }
    Output(out, det_out).write(dump(report));
  });

  // decompose
  SpecFlags dec_spec;
  std::string dec_target, dec_out;
  auto* c_dec = app.add_subcommand("decompose", "Write a target as a mixture of extreme points");
  dec_spec.attach(c_dec);
  c_dec->add_option("--target", dec_target, "Target q as a JSON array")->required();
  c_dec->add_option("--out", dec_out);
  c_dec->callback([&] {
    const auto spec = dec_spec.resolve();
    const auto q = io::distribution_from_json(io::parse(dec_target));
    if (q.size() != spec.size()) throw Error(ErrorCode::LengthMismatch, "target vs anchor length");
    phase = Phase::Execute;
    const auto mix = decompose_target(spec, q);
    const auto back = reconstruct(spec, mix);
    double err_inf = 0.0;
    for (std::size_t v = 0; v < back.size(); ++v) err_inf = std::max(err_inf, std::abs(back[v] - q[v]));
    Output(out, dec_out)
        .write(dump({{"terms", io::to_json(mix)},
                     {"l1_distance", io::sig12(l1_distance(spec.anchor(), q))},
                     {"reconstruction_error", io::sig12(err_inf)}}));
  });

  // audit
  SpecFlags au_spec;
  std::string au_table, au_out;
  std::size_t au_perturb = 200;
  double au_magnitude = 0.05;
  std::uint64_t au_seed = 0;
  auto* c_au = app.add_subcommand("audit", "Null-constraint, cycle-condition and saddle-point audit");
  au_spec.attach(c_au);
  c_au->add_option("--evalue-file", au_table, "Audit this table instead of e*");
  c_au->add_option("--perturbations", au_perturb)->capture_default_str();
  c_au->add_option("--magnitude", au_magnitude)->capture_default_str();
  c_au->add_option("--seed", au_seed)->capture_default_str();
  c_au->add_option("--out", au_out);
  c_au->callback([&] {
    const auto spec = au_spec.resolve();
    const auto e = au_table.empty() ? optimal_evalue(spec) : io::evalue_from_json(io::read_json_file(au_table));
    if (e.size() != spec.size()) throw Error(ErrorCode::DimensionMismatch, "e-value table vs anchor");
    if (!(au_magnitude >= 0.0)) throw Error(ErrorCode::BadParams, "--magnitude must be >= 0");
    phase = Phase::Execute;
    const double worst = null_worst_expectation(e, spec);
    json report{{"n", spec.size()},
                {"delta", spec.delta()},
                {"jstar", io::sig12(jstar(spec))},
                {"null_worst_expectation", io::sig12(worst)},
                {"valid", worst <= 1.0 + 1e-10}};
    bool positive = true;
    for (double x : e.scores().data()) positive = positive && x > 0.0;
    if (positive && spec.size() <= 8) {
      const auto m = log_scores(e);
      const bool cyc = cycle_condition_check(m, spec.size());
      report["cycle_condition"] = cyc;
      if (spec.size() <= 10) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& pair : enumerate_extremes(spec)) {
          const double v = best_path_inner_value(m, spec, pair).value;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        report["inner_value_min"] = io::sig12(lo);
        report["inner_value_max"] = io::sig12(hi);
        report["inner_value_spread"] = hi - lo;
      }
    } else {
      report["cycle_condition"] = nullptr;
    }
    if (au_table.empty() && spec.size() <= 6) {
      CounterRng rng(au_seed);
      const auto sr = saddle_check(spec, au_perturb, au_magnitude, rng);
      report["saddle"] = {{"passed", sr.passed},
                          {"tested", sr.tested},
                          {"skipped", sr.skipped},
                          {"best_candidate", io::sig12(sr.best_candidate)}};
    } else {
      report["saddle"] = nullptr;
    }
    Output(out, au_out).write(dump(report));
  });

  try {
    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(args.begin(), args.end());
    app.parse(args);
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return 2;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    if (ex.code() == ErrorCode::IoError) return 1;
    return phase == Phase::Resolve ? 2 : 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace ewm::cli
