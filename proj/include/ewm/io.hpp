#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewm/detection.hpp"
#include "ewm/evalue.hpp"
#include "ewm/oracles.hpp"
#include "ewm/simplex.hpp"
#include "ewm/simulation.hpp"

namespace ewm::io {

using nlohmann::json;

/// Rounds to 12 significant digits; nlohmann then prints the short form.
double sig12(double x);
/// printf("%.12g") formatting used for every CSV number.
std::string fmt12(double x);

json to_json(const VocabDistribution& d);
VocabDistribution distribution_from_json(const json& j);

json to_json(const NeighborhoodSpec& spec);
NeighborhoodSpec spec_from_json(const json& j);

/// {"n": n, "scores": row-major}. Doubles are written in shortest round-trip
/// form (at most 17 significant digits), so reading back is bit-identical.
json to_json(const EValueTable& e);
EValueTable evalue_from_json(const json& j);

json to_json(const DetectorState& st);
DetectorState detector_from_json(const json& j);

json to_json(const DetectionReport& rep);
json to_json(const BaselineReport& rep);
json to_json(const MixtureDecomposition& mix);

/// Parses JSON text; wraps parse failures as Error{FormatError}.
json parse(const std::string& text);
json read_json_file(const std::string& path);

/// CSV `step,v,s` with 1-based step and 0-based indices.
void write_stream_csv(std::ostream& out, const std::vector<SampledPair>& stream);
std::vector<SampledPair> read_stream_csv(std::istream& in);

void write_stopping_csv(std::ostream& out, const std::vector<StoppingRow>& rows);
void write_calibration_csv(std::ostream& out, const std::vector<NullCalibration>& rows);
void write_maxmin_trace_csv(std::ostream& out, const std::vector<MaxMinTraceRow>& rows);

}  // namespace ewm::io
