#pragma once

// File formats. JSON numbers are written with 17 significant digits and CSV
// numbers with 12, so golden files stay byte-stable across runs.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptsim/errors.hpp"
#include "ptsim/fock.hpp"
#include "ptsim/mesh.hpp"

namespace ptsim {

using ordered_json = nlohmann::ordered_json;

inline std::string format_number(double x, int significant_digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0; // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, x);
  return buf;
}

namespace detail {

inline void write_json_value(std::ostream& os, const ordered_json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
  case ordered_json::value_t::object: {
    if (j.empty()) { os << "{}"; return; }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ",\n";
      first = false;
      os << pad << ordered_json(it.key()).dump() << ": ";
      write_json_value(os, it.value(), indent, depth + 1);
    }
    os << "\n" << close_pad << "}";
    return;
  }
  case ordered_json::value_t::array: {
    if (j.empty()) { os << "[]"; return; }
    // Arrays of scalars stay on one line.
    bool scalars = true;
    for (const auto& v : j) scalars = scalars && !v.is_structured();
    if (scalars) {
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ", ";
        write_json_value(os, j[i], indent, depth + 1);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) os << ",\n";
      os << pad;
      write_json_value(os, j[i], indent, depth + 1);
    }
    os << "\n" << close_pad << "]";
    return;
  }
  case ordered_json::value_t::number_float: {
    const double v = j.get<double>();
    // JSON has no inf/nan; emit null for them.
    if (!std::isfinite(v)) os << "null";
    else os << format_number(v, 17);
    return;
  }
  default: os << j.dump(); return;
  }
}

} // namespace detail

/// Pretty JSON with 2-space indentation and 17-significant-digit floats.
inline std::string to_json_text(const ordered_json& j) {
  std::ostringstream os;
  detail::write_json_value(os, j, 2, 0);
  os << "\n";
  return os.str();
}

// -- Mesh programs ----------------------------------------------------------

inline ordered_json to_json(const MeshProgram& p) {
  ordered_json stages = ordered_json::array();
  for (const auto& s : p.stages)
    stages.push_back({{"pair", {s.first_mode, s.first_mode + 1}}, {"theta", s.theta}, {"phi", s.phi}});
  ordered_json phases = ordered_json::array();
  for (double v : p.output_phases) phases.push_back(v);
  return {{"modes", p.modes}, {"stages", stages}, {"output_phases", phases}};
}

inline MeshProgram mesh_program_from_json(const ordered_json& j) {
  try {
    MeshProgram p;
    p.modes = j.at("modes").get<std::size_t>();
    for (const auto& s : j.at("stages")) {
      const auto pair = s.at("pair");
      const auto i = pair.at(0).get<std::size_t>(), k = pair.at(1).get<std::size_t>();
      if (k != i + 1) throw SpecError("mesh stages must act on adjacent modes");
      p.stages.push_back({i, s.at("theta").get<double>(), s.at("phi").get<double>()});
    }
    for (const auto& v : j.at("output_phases")) p.output_phases.push_back(v.get<double>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed mesh program: ") + e.what());
  }
}

// -- Fock distributions -----------------------------------------------------

inline ordered_json to_json(const PatternConstraint& c) {
  switch (c.kind) {
  case PatternConstraint::Kind::Any: return {{"kind", "any"}};
  case PatternConstraint::Kind::Antibunched: return {{"kind", "antibunched"}};
  case PatternConstraint::Kind::MaxPerMode: return {{"kind", "max_per_mode"}, {"max_per_mode", c.max_per_mode}};
  }
  return {};
}

inline PatternConstraint constraint_from_json(const ordered_json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "any") return PatternConstraint::any();
  if (kind == "antibunched") return PatternConstraint::antibunched();
  if (kind == "max_per_mode") return PatternConstraint::at_most(j.at("max_per_mode").get<int>());
  throw SpecError("unknown pattern constraint '" + kind + "'");
}

inline ordered_json to_json(const PatternFilter& f) {
  return {{"constraint", to_json(f.constraint)}, {"support_modes", f.support_modes}};
}

inline PatternFilter filter_from_json(const ordered_json& j) {
  try {
    return {constraint_from_json(j.at("constraint")), j.at("support_modes").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed pattern filter: ") + e.what());
  }
}

inline ordered_json to_json(const FockDistribution& d) {
  ordered_json entries = ordered_json::object();
  for (const auto& [p, prob] : d.entries) entries[p.key()] = prob;
  return {{"filter", to_json(d.filter)}, {"entries", entries}};
}

inline OccupationPattern pattern_from_key(const std::string& key) {
  std::vector<int> occ;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const auto comma = key.find(',', pos);
    const std::string item = key.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || end != item.c_str() + item.size() || v < 0)
      throw SpecError("malformed occupation key '" + key + "'");
    occ.push_back(static_cast<int>(v));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return OccupationPattern(std::move(occ));
}

inline FockDistribution distribution_from_json(const ordered_json& j) {
  FockDistribution d;
  d.filter = filter_from_json(j.at("filter"));
  for (auto it = j.at("entries").begin(); it != j.at("entries").end(); ++it)
    d.entries.emplace_back(pattern_from_key(it.key()), it.value().get<double>());
  return d;
}

// -- Tables -----------------------------------------------------------------

/// A time series or sweep: named columns of doubles. `distributions` lists
/// column ranges [begin, end) whose entries form normalised probability
/// rows (used for invariant checks and shot sampling).
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::size_t, std::size_t>> distributions;
};

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c], 12);
    }
    out += '\n';
  }
  return out;
}

inline ordered_json to_json(const Table& t) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  return {{"name", t.name}, {"columns", t.columns}, {"rows", rows}};
}

} // namespace ptsim
