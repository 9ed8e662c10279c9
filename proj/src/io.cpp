#include "combkit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "combkit/errors.hpp"

namespace combkit {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double finite(const Json& j) {
  if (!j.is_number()) throw InputError("operator file: matrix entries must be numbers");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InputError("operator file: non-finite matrix entry");
  return x;
}

}  // namespace

LabeledOperator operator_from_json(const Json& j) {
  const Json& version = field(j, "version");
  if (!version.is_number_integer() || version.get<int>() != 1)
    throw InputError("operator file: unsupported version");
  const Json& sys = field(j, "systems");
  if (!sys.is_array()) throw InputError("operator file: 'systems' must be an array");
  std::vector<SystemLabel> systems;
  Eigen::Index side = 1;
  for (const auto& s : sys) {
    SystemLabel l;
    const Json& name = field(s, "name");
    const Json& dim = field(s, "dim");
    const Json& role = field(s, "role");
    const Json& tooth = field(s, "tooth");
    if (!name.is_string() || !dim.is_number_integer() || !role.is_string() ||
        !tooth.is_number_integer())
      throw InputError("operator file: malformed system entry");
    l.name = name.get<std::string>();
    l.dim = dim.get<Eigen::Index>();
    const auto r = role.get<std::string>();
    if (r != "in" && r != "out") throw InputError("operator file: role must be 'in' or 'out'");
    l.role = r == "in" ? Role::in : Role::out;
    l.tooth = tooth.get<int>();
    if (l.dim < 1 || l.tooth < 1) throw InputError("operator file: dimensions and teeth start at 1");
    side *= l.dim;
    systems.push_back(std::move(l));
  }
  const Json& rows = field(j, "matrix");
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != side)
    throw InputError("operator file: matrix must have one row per basis state");
  Eigen::MatrixXcd m(side, side);
  for (Eigen::Index r = 0; r < side; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != side)
      throw InputError("operator file: matrix is not square");
    for (Eigen::Index c = 0; c < side; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2) throw InputError("operator file: entries are [re, im] pairs");
      m(r, c) = {finite(e[0]), finite(e[1])};
    }
  }
  return LabeledOperator(std::move(systems), std::move(m));
}

Json operator_to_json(const LabeledOperator& op) {
  Json sys = Json::array();
  for (const auto& s : op.systems())
    sys.push_back({{"name", s.name}, {"dim", s.dim}, {"role", std::string(to_string(s.role))},
                   {"tooth", s.tooth}});
  Json rows = Json::array();
  const auto& m = op.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return {{"version", 1}, {"systems", std::move(sys)}, {"matrix", std::move(rows)}};
}

LabeledOperator read_operator(std::istream& is) {
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::exception& e) {
    throw InputError(std::string("operator file: ") + e.what());
  }
  return operator_from_json(j);
}

void write_operator(std::ostream& os, const LabeledOperator& op) {
  os << operator_to_json(op).dump(1) << '\n';
}

LabeledOperator read_operator_file(const std::string& path) {
  return operator_from_json(read_json_file(path));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

Json tester_to_json(const Tester& t) {
  Json outcomes = Json::array();
  for (const auto& [name, op] : t.outcomes)
    outcomes.push_back({{"name", name}, {"operator", operator_to_json(op)}});
  return {{"version", 1}, {"outcomes", std::move(outcomes)}};
}

TesterOutcomes tester_outcomes_from_json(const Json& j) {
  const Json& version = field(j, "version");
  if (!version.is_number_integer() || version.get<int>() != 1)
    throw InputError("tester file: unsupported version");
  const Json& list = field(j, "outcomes");
  if (!list.is_array() || list.empty()) throw InputError("tester file: 'outcomes' must be a nonempty array");
  TesterOutcomes out;
  for (const auto& o : list) {
    const Json& name = field(o, "name");
    if (!name.is_string()) throw InputError("tester file: outcome names must be strings");
    out.emplace_back(name.get<std::string>(), operator_from_json(field(o, "operator")));
  }
  return out;
}

void write_operator_file(const std::string& path, const LabeledOperator& op) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_operator(out, op);
}

Json number_to_json(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw InputError("expected a number or one of \"inf\", \"-inf\", \"nan\"");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace combkit
