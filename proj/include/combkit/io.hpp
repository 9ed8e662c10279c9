// JSON serialization of labeled operators ("OperatorFile", version 1):
//
//   {"version": 1,
//    "systems": [{"name": "out1", "dim": 2, "role": "out", "tooth": 1}, ...],
//    "matrix": [[[re, im], ...], ...]}
//
// The matrix is row-major over the listed systems, first system slowest.
// Testers are stored as {"version": 1, "outcomes": [{"name": ..., "operator": <operator>}, ...]}.
#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>

#include <utility>
#include <vector>

#include "combkit/network.hpp"
#include "combkit/tensorspace.hpp"

namespace combkit {

using Json = nlohmann::json;

/// Throws InputError on any schema violation.
LabeledOperator operator_from_json(const Json& j);
Json operator_to_json(const LabeledOperator& op);

LabeledOperator read_operator(std::istream& is);
void write_operator(std::ostream& os, const LabeledOperator& op);

/// InputError when the file cannot be opened or parsed.
LabeledOperator read_operator_file(const std::string& path);
void write_operator_file(const std::string& path, const LabeledOperator& op);

using TesterOutcomes = std::vector<std::pair<std::string, LabeledOperator>>;

Json tester_to_json(const Tester& t);
/// Outcomes only; the normalization is recomputed by the caller.
TesterOutcomes tester_outcomes_from_json(const Json& j);

/// Parses a whole file; InputError when it cannot be opened or parsed.
Json read_json_file(const std::string& path);

/// Finite doubles as numbers; infinities and NaN as the strings "inf",
/// "-inf" and "nan".
Json number_to_json(double x);
double number_from_json(const Json& j);

/// Shortest text that reads back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_number(double x);

}  // namespace combkit
