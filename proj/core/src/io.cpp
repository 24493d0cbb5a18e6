#include "cutstop/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cutstop {

namespace {

using nlohmann::json;

double bound_from_json(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw MilpError("unrecognized bound string '" + s + "'");
  }
  if (v.is_number()) return v.get<double>();
  if (v.is_null()) return kInf;  // callers decide the sign by position
  throw MilpError("bound must be a number or 'inf'/'-inf'");
}

json bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

RowSense sense_from_string(const std::string& s) {
  if (s == "<=" || s == "<" || s == "L") return RowSense::LessEqual;
  if (s == ">=" || s == ">" || s == "G") return RowSense::GreaterEqual;
  if (s == "=" || s == "==" || s == "E") return RowSense::Equal;
  throw MilpError("unrecognized row sense '" + s + "'");
}

}  // namespace

MilpInstance parse_instance_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MilpError(std::string("instance json parse error: ") + e.what());
  }
  if (!doc.is_object()) throw MilpError("instance json must be an object");

  std::vector<double> objective = doc.at("objective").get<std::vector<double>>();
  const bool maximize = doc.value("sense", "min") == "max";

  std::vector<SparseRow> rows;
  std::vector<RowSense> senses;
  for (const auto& jr : doc.at("rows")) {
    SparseRow row;
    for (const auto& [key, val] : jr.at("coeffs").items()) {
      row.index.push_back(std::stoi(key));
      row.value.push_back(val.get<double>());
    }
    row.rhs = jr.at("rhs").get<double>();
    rows.push_back(std::move(row));
    senses.push_back(sense_from_string(jr.value("sense", "<=")));
  }

  std::vector<int> integer_set;
  if (doc.contains("integer_set")) integer_set = doc["integer_set"].get<std::vector<int>>();

  std::vector<std::pair<double, double>> bounds;
  if (doc.contains("bounds")) {
    for (const auto& jb : doc["bounds"]) {
      if (!jb.is_array() || jb.size() != 2) throw MilpError("bounds entries must be [lo, hi]");
      double lo = jb[0].is_null() ? -kInf : bound_from_json(jb[0]);
      double hi = jb[1].is_null() ? kInf : bound_from_json(jb[1]);
      bounds.emplace_back(lo, hi);
    }
  } else {
    bounds.assign(objective.size(), {0.0, kInf});
  }

  return build_instance(std::move(objective), std::move(rows), std::move(senses),
                        std::move(integer_set), std::move(bounds), maximize,
                        doc.value("name", std::string{}));
}

std::string instance_to_json(const MilpInstance& inst) {
  json doc;
  doc["name"] = inst.name;
  doc["sense"] = inst.negated_from_max ? "max" : "min";
  // report the objective in the stated sense so round-trips are stable
  json obj = json::array();
  for (double c : inst.objective) obj.push_back(inst.negated_from_max ? -c : c);
  doc["objective"] = obj;

  json rows = json::array();
  for (const auto& row : inst.rows) {
    json jr;
    json coeffs = json::object();
    for (std::size_t k = 0; k < row.size(); ++k)
      coeffs[std::to_string(row.index[k])] = row.value[k];
    jr["coeffs"] = std::move(coeffs);
    jr["rhs"] = row.rhs;
    jr["sense"] = "<=";
    rows.push_back(std::move(jr));
  }
  doc["rows"] = std::move(rows);
  doc["integer_set"] = inst.integer_set;

  json bounds = json::array();
  for (int j = 0; j < inst.num_vars(); ++j)
    bounds.push_back(json::array({bound_to_json(inst.lower[j]), bound_to_json(inst.upper[j])}));
  doc["bounds"] = std::move(bounds);
  return doc.dump(2);
}

MilpInstance read_instance_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MilpError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  MilpInstance inst = parse_instance_json(buf.str());
  if (inst.name.empty()) inst.name = path;
  return inst;
}

void write_instance_json(const MilpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MilpError("cannot write " + path);
  out << instance_to_json(inst) << "\n";
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

MilpInstance parse_instance_mps(std::istream& in, const std::string& name_hint) {
  enum class Section { None, Rows, Columns, Rhs, Bounds, Ranges, ObjSense };
  Section section = Section::None;

  std::string name = name_hint;
  bool maximize = false;
  std::string obj_row;
  std::vector<std::string> row_names;
  std::vector<RowSense> row_senses;
  std::map<std::string, int> row_index;
  std::vector<std::string> col_names;
  std::map<std::string, int> col_index;
  std::vector<double> objective;
  std::vector<std::map<int, double>> col_entries;  // per column: row -> coeff
  std::vector<std::pair<double, double>> bounds;
  std::vector<std::uint8_t> integral;
  std::map<std::string, double> rhs_by_row;
  bool in_integer_block = false;

  auto column_id = [&](const std::string& cname) {
    auto it = col_index.find(cname);
    if (it != col_index.end()) return it->second;
    const int id = static_cast<int>(col_names.size());
    col_index.emplace(cname, id);
    col_names.push_back(cname);
    objective.push_back(0.0);
    col_entries.emplace_back();
    bounds.emplace_back(0.0, kInf);  // MPS default
    integral.push_back(0);
    return id;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    const bool header = !std::isspace(static_cast<unsigned char>(line[0]));
    auto toks = tokenize(line);
    if (toks.empty()) continue;

    if (header) {
      const std::string& kw = toks[0];
      if (kw == "NAME") {
        if (toks.size() > 1) name = toks[1];
        section = Section::None;
      } else if (kw == "OBJSENSE") {
        section = Section::ObjSense;
        if (toks.size() > 1) maximize = toks[1] == "MAX" || toks[1] == "MAXIMIZE";
      } else if (kw == "ROWS") {
        section = Section::Rows;
      } else if (kw == "COLUMNS") {
        section = Section::Columns;
      } else if (kw == "RHS") {
        section = Section::Rhs;
      } else if (kw == "RANGES") {
        throw MilpError("RANGES section is not supported");
      } else if (kw == "BOUNDS") {
        section = Section::Bounds;
      } else if (kw == "ENDATA") {
        break;
      } else {
        throw MilpError("unrecognized MPS section '" + kw + "'");
      }
      continue;
    }

    switch (section) {
      case Section::ObjSense:
        maximize = toks[0] == "MAX" || toks[0] == "MAXIMIZE";
        break;
      case Section::Rows: {
        if (toks.size() < 2) throw MilpError("malformed ROWS line");
        const std::string& type = toks[0];
        const std::string& rname = toks[1];
        if (type == "N") {
          if (obj_row.empty()) obj_row = rname;
        } else {
          RowSense sense;
          if (type == "L") sense = RowSense::LessEqual;
          else if (type == "G") sense = RowSense::GreaterEqual;
          else if (type == "E") sense = RowSense::Equal;
          else throw MilpError("unrecognized row type '" + type + "'");
          row_index.emplace(rname, static_cast<int>(row_names.size()));
          row_names.push_back(rname);
          row_senses.push_back(sense);
        }
        break;
      }
      case Section::Columns: {
        if (toks.size() >= 3 && toks[1] == "'MARKER'") {
          if (toks[2] == "'INTORG'") in_integer_block = true;
          else if (toks[2] == "'INTEND'") in_integer_block = false;
          break;
        }
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw MilpError("malformed COLUMNS line");
        const int col = column_id(toks[0]);
        if (in_integer_block) {
          integral[col] = 1;
          bounds[col] = {0.0, 1.0};  // MPS integer default; BOUNDS may widen
        }
        for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
          const std::string& rname = toks[k];
          const double val = std::stod(toks[k + 1]);
          if (rname == obj_row) {
            objective[col] = val;
          } else {
            auto it = row_index.find(rname);
            if (it == row_index.end()) throw MilpError("unknown row '" + rname + "' in COLUMNS");
            col_entries[col][it->second] = val;
          }
        }
        break;
      }
      case Section::Rhs: {
        if (toks.size() < 3) throw MilpError("malformed RHS line");
        for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
          if (toks[k] == obj_row) continue;  // objective offset ignored
          rhs_by_row[toks[k]] = std::stod(toks[k + 1]);
        }
        break;
      }
      case Section::Bounds: {
        if (toks.size() < 3) throw MilpError("malformed BOUNDS line");
        const std::string& type = toks[0];
        const int col = column_id(toks[2]);
        const double val = toks.size() > 3 ? std::stod(toks[3]) : 0.0;
        if (type == "UP") bounds[col].second = val;
        else if (type == "LO") bounds[col].first = val;
        else if (type == "FX") bounds[col] = {val, val};
        else if (type == "BV") { bounds[col] = {0.0, 1.0}; integral[col] = 1; }
        else if (type == "MI") bounds[col].first = -kInf;
        else if (type == "PL") bounds[col].second = kInf;
        else if (type == "UI") { bounds[col].second = val; integral[col] = 1; }
        else if (type == "LI") { bounds[col].first = val; integral[col] = 1; }
        else throw MilpError("unsupported bound type '" + type + "'");
        break;
      }
      default:
        throw MilpError("data line outside a section");
    }
  }

  if (obj_row.empty()) throw MilpError("MPS file has no objective (N) row");
  if (col_names.empty()) throw MilpError("MPS file has no columns");

  const int m = static_cast<int>(col_names.size());
  std::vector<SparseRow> rows(row_names.size());
  for (std::size_t r = 0; r < row_names.size(); ++r) {
    auto it = rhs_by_row.find(row_names[r]);
    rows[r].rhs = it == rhs_by_row.end() ? 0.0 : it->second;
  }
  for (int c = 0; c < m; ++c)
    for (const auto& [r, v] : col_entries[c]) {
      rows[r].index.push_back(c);
      rows[r].value.push_back(v);
    }

  std::vector<int> integer_set;
  for (int c = 0; c < m; ++c)
    if (integral[c]) integer_set.push_back(c);

  return build_instance(std::move(objective), std::move(rows), std::move(row_senses),
                        std::move(integer_set), std::move(bounds), maximize, name);
}

MilpInstance read_instance_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MilpError("cannot open " + path);
  return parse_instance_mps(in, path);
}

MilpInstance read_instance(const std::string& path) {
  auto ends_with = [&](const std::string& suffix) {
    return path.size() >= suffix.size() &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".json")) return read_instance_json(path);
  if (ends_with(".mps") || ends_with(".mps.txt")) return read_instance_mps(path);
  throw MilpError("unrecognized instance extension: " + path);
}

}  // namespace cutstop
