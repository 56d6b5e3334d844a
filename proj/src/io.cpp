#include "ewm/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ewm/error.hpp"

namespace ewm::io {

double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json to_json(const VocabDistribution& d) {
  return json(std::vector<double>(d.weights().begin(), d.weights().end()));
}

VocabDistribution distribution_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "distribution must be a JSON array");
  std::vector<double> w;
  for (const auto& x : j) {
    if (!x.is_number()) throw Error(ErrorCode::FormatError, "distribution entries must be numbers");
    w.push_back(x.get<double>());
  }
  return make_distribution(std::move(w));
}

json to_json(const NeighborhoodSpec& spec) {
  return {{"anchor", to_json(spec.anchor())}, {"delta", spec.delta()}};
}

NeighborhoodSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("anchor") || !j.contains("delta") || !j["delta"].is_number())
    throw Error(ErrorCode::FormatError, R"(spec must be {"anchor": [...], "delta": x})");
  return NeighborhoodSpec(distribution_from_json(j["anchor"]), j["delta"].get<double>());
}

json to_json(const EValueTable& e) {
  const auto d = e.scores().data();
  return {{"n", e.size()}, {"scores", std::vector<double>(d.begin(), d.end())}};
}

EValueTable evalue_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("scores"))
    throw Error(ErrorCode::FormatError, R"(e-value table must be {"n": n, "scores": [...]})");
  const auto n = j["n"].get<std::size_t>();
  const auto& s = j["scores"];
  if (!s.is_array() || s.size() != n * n)
    throw Error(ErrorCode::FormatError, "scores must hold n*n numbers");
  SquareMatrix m(n);
  for (std::size_t k = 0; k < n * n; ++k) m.data()[k] = s[k].get<double>();
  return EValueTable(std::move(m));
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(const DetectorState& st) {
  json status = st.rejected() ? json{{"rejected_at", st.stop_step}} : json("running");
  // ln 0 = -inf wealth (a zero score was observed) is stored as null.
  return {{"wealth", finite_or_null(st.wealth)},
          {"steps", st.steps},
          {"alpha", st.alpha},
          {"status", status}};
}

DetectorState detector_from_json(const json& j) {
  try {
    DetectorState st;
    st.wealth = j.at("wealth").is_null() ? -std::numeric_limits<double>::infinity()
                                         : j.at("wealth").get<double>();
    st.steps = j.at("steps").get<std::size_t>();
    st.alpha = j.at("alpha").get<double>();
    const auto& status = j.at("status");
    if (status.is_string() && status.get<std::string>() == "running") {
      st.status = Decision::Running;
    } else if (status.is_object() && status.contains("rejected_at")) {
      st.status = Decision::Rejected;
      st.stop_step = status["rejected_at"].get<std::size_t>();
    } else {
      throw Error(ErrorCode::FormatError, "unknown detector status");
    }
    if (!(st.alpha > 0.0 && st.alpha < 1.0)) throw Error(ErrorCode::BadAlpha, "alpha in state");
    return st;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::FormatError, std::string("detector state: ") + ex.what());
  }
}

json to_json(const DetectionReport& rep) {
  return {{"decision", rep.decision == Decision::Rejected ? "rejected" : "undecided"},
          {"stop_step", rep.stop_step ? json(*rep.stop_step) : json(nullptr)},
          {"wealth", std::isfinite(rep.wealth) ? json(sig12(rep.wealth)) : json(nullptr)},
          {"threshold", sig12(rep.threshold)},
          {"steps", rep.steps}};
}

json to_json(const BaselineReport& rep) {
  return {{"decision", rep.decision == Decision::Rejected ? "rejected" : "undecided"},
          {"stop_step", rep.stop_step ? json(*rep.stop_step) : json(nullptr)},
          {"matches", rep.matches},
          {"steps", rep.steps},
          {"p_value", sig12(rep.last_p_value)}};
}

json to_json(const MixtureDecomposition& mix) {
  json terms = json::array();
  for (const auto& t : mix.terms)
    terms.push_back({{"gain", t.pair.gain}, {"loss", t.pair.loss}, {"weight", sig12(t.weight)}});
  return terms;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    throw Error(ErrorCode::FormatError, ex.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void write_stream_csv(std::ostream& out, const std::vector<SampledPair>& stream) {
  out << "step,v,s\n";
  for (std::size_t t = 0; t < stream.size(); ++t)
    out << (t + 1) << ',' << stream[t].v << ',' << stream[t].s << '\n';
}

std::vector<SampledPair> read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, "stream CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "step,v,s") throw Error(ErrorCode::FormatError, "stream CSV header must be step,v,s");
  std::vector<SampledPair> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long long step = 0, v = 0, s = 0;
    char c1 = 0, c2 = 0;
    std::istringstream row(line);
    if (!(row >> step >> c1 >> v >> c2 >> s) || c1 != ',' || c2 != ',' || v < 0 || s < 0)
      throw Error(ErrorCode::FormatError, "bad stream row at line " + std::to_string(lineno));
    out.push_back({static_cast<Index>(v), static_cast<Index>(s)});
  }
  return out;
}

void write_stopping_csv(std::ostream& out, const std::vector<StoppingRow>& rows) {
  out << "alpha,log_inv_alpha,mean_tau,std_err,ratio,censored_count\n";
  for (const auto& r : rows)
    out << fmt12(r.alpha) << ',' << fmt12(r.log_inv_alpha) << ',' << fmt12(r.mean_tau) << ','
        << fmt12(r.std_err) << ',' << fmt12(r.ratio) << ',' << r.censored_count << '\n';
}

void write_calibration_csv(std::ostream& out, const std::vector<NullCalibration>& rows) {
  out << "alpha,trials,horizon,false_positives,rate\n";
  for (const auto& r : rows)
    out << fmt12(r.alpha) << ',' << r.trials << ',' << r.horizon << ',' << r.false_positives << ','
        << fmt12(r.rate) << '\n';
}

void write_maxmin_trace_csv(std::ostream& out, const std::vector<MaxMinTraceRow>& rows) {
  out << "refinement,r00,r11,objective\n";
  for (const auto& r : rows)
    out << r.refinement << ',' << fmt12(r.r00) << ',' << fmt12(r.r11) << ',' << fmt12(r.objective)
        << '\n';
}

}  // namespace ewm::io
