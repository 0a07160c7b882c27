#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbnmon/clustering.hpp"
#include "dbnmon/errors.hpp"
#include "dbnmon/model.hpp"
#include "dbnmon/particle_table.hpp"

namespace dbnmon {

/// Shortest round-trip decimal representation; used everywhere a float lands
/// in a CSV so outputs are byte-stable.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// model files (JSON)

namespace detail {

inline const char* kind_name(VarKind k) {
  return k == VarKind::state ? "state" : "observation";
}

inline nlohmann::ordered_json cpt_to_json(const DbnModel& model, const Cpt& cpt,
                                          bool transition) {
  nlohmann::ordered_json j;
  j["child"] = model.name(cpt.child);
  nlohmann::ordered_json parents = nlohmann::ordered_json::array();
  for (const ParentRef& p : cpt.parents) {
    if (transition)
      parents.push_back((p.slice == Slice::previous ? std::string("prev:") : std::string("cur:")) +
                        model.name(p.var));
    else
      parents.push_back(model.name(p.var));
  }
  j["parents"] = std::move(parents);
  j["probs"] = cpt.probs;
  return j;
}

}  // namespace detail

inline std::string model_to_json(const DbnModel& model) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json vars = nlohmann::ordered_json::array();
  for (const Variable& v : model.variables) {
    nlohmann::ordered_json jv;
    jv["name"] = v.name;
    jv["cardinality"] = v.cardinality;
    jv["kind"] = detail::kind_name(v.kind);
    vars.push_back(std::move(jv));
  }
  j["variables"] = std::move(vars);
  nlohmann::ordered_json prior = nlohmann::ordered_json::array();
  for (const Cpt& c : model.prior) prior.push_back(detail::cpt_to_json(model, c, false));
  j["prior"] = std::move(prior);
  nlohmann::ordered_json transition = nlohmann::ordered_json::array();
  for (const Cpt& c : model.transition) transition.push_back(detail::cpt_to_json(model, c, true));
  j["transition"] = std::move(transition);
  return j.dump(2) + "\n";
}

inline DbnModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  DbnModel model;
  try {
    for (const auto& jv : j.at("variables")) {
      Variable v;
      v.name = jv.at("name").get<std::string>();
      v.cardinality = jv.at("cardinality").get<int>();
      std::string kind = jv.at("kind").get<std::string>();
      if (kind == "state")
        v.kind = VarKind::state;
      else if (kind == "observation")
        v.kind = VarKind::observation;
      else
        throw IoError("variable '" + v.name + "' has unknown kind '" + kind + "'");
      model.variables.push_back(std::move(v));
    }
    auto resolve = [&](const std::string& name, const std::string& context) {
      auto v = model.find(name);
      if (!v)
        throw IoError("unknown variable reference '" + name + "' in " + context);
      return *v;
    };
    auto parse_cpts = [&](const nlohmann::json& section, bool transition) {
      std::vector<Cpt> out;
      for (const auto& jc : section) {
        Cpt c;
        std::string child = jc.at("child").get<std::string>();
        c.child = resolve(child, transition ? "transition" : "prior");
        for (const auto& jp : jc.at("parents")) {
          std::string ref = jp.get<std::string>();
          ParentRef p;
          std::string context =
              (transition ? "transition cpt of " : "prior cpt of ") + child;
          if (transition) {
            if (ref.rfind("prev:", 0) == 0) {
              p.slice = Slice::previous;
              p.var = resolve(ref.substr(5), context);
            } else if (ref.rfind("cur:", 0) == 0) {
              p.slice = Slice::current;
              p.var = resolve(ref.substr(4), context);
            } else {
              throw IoError("transition parent '" + ref + "' of '" + child +
                            "' lacks a prev:/cur: slice tag");
            }
          } else {
            p.slice = Slice::current;
            p.var = resolve(ref, context);
          }
          c.parents.push_back(p);
        }
        c.probs = jc.at("probs").get<std::vector<double>>();
        out.push_back(std::move(c));
      }
      return out;
    };
    model.prior = parse_cpts(j.at("prior"), false);
    model.transition = parse_cpts(j.at("transition"), true);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }

  // cpts arrive in file order; index them by child id
  auto reindex = [&](std::vector<Cpt>& cpts, const char* label) {
    std::vector<Cpt> indexed(model.var_count());
    std::vector<char> seen(model.var_count(), 0);
    if (cpts.size() != model.var_count())
      throw IoError(std::string(label) + " section must hold exactly one cpt per variable");
    for (Cpt& c : cpts) {
      if (seen[c.child])
        throw IoError(std::string("duplicate ") + label + " cpt for '" +
                      model.name(c.child) + "'");
      seen[c.child] = 1;
      indexed[c.child] = std::move(c);
    }
    cpts = std::move(indexed);
  };
  reindex(model.prior, "prior");
  reindex(model.transition, "transition");

  auto violations = validate_model(model);
  if (!violations.empty()) {
    std::string msg = "model file fails validation:";
    for (const Violation& v : violations) msg += "\n  " + v.where + ": " + v.message;
    throw ValidationError(msg);
  }
  return model;
}

inline void save_model(const DbnModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << model_to_json(model);
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline DbnModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// trajectory files (CSV with `# hidden` / `# observed` section markers)

namespace detail {

inline void write_section(std::ostream& out, const char* marker,
                          const std::vector<Assignment>& slices,
                          const std::vector<VarId>& vars, const DbnModel& model) {
  out << "# " << marker << "\n";
  out << "t";
  for (VarId v : vars) out << "," << model.name(v);
  out << "\n";
  for (std::size_t t = 0; t < slices.size(); ++t) {
    out << t;
    for (VarId v : vars) out << "," << slices[t].get(v);
    out << "\n";
  }
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline void save_trajectory(const Trajectory& traj, const DbnModel& model,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (traj.has_hidden())
    detail::write_section(out, "hidden", traj.hidden, model.state_vars(), model);
  detail::write_section(out, "observed", traj.observed, model.observation_vars(), model);
  if (!out) throw IoError("failed writing '" + path + "'");
}

/// Observations-only variant used as filtering input.
inline void save_observations(const Trajectory& traj, const DbnModel& model,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  detail::write_section(out, "observed", traj.observed, model.observation_vars(), model);
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline Trajectory load_trajectory(const DbnModel& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path + "'");
  Trajectory traj;
  std::string line;
  std::string section = "observed";  // headerless files are observations-only
  std::vector<VarId> columns;
  bool want_header = true;
  std::size_t line_no = 0;
  std::size_t expected_t = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      std::string name = line.substr(1);
      std::size_t b = name.find_first_not_of(" \t\r");
      std::size_t e = name.find_last_not_of(" \t\r");
      name = b == std::string::npos ? "" : name.substr(b, e - b + 1);
      if (name != "hidden" && name != "observed")
        throw IoError(path + ":" + std::to_string(line_no) + ": unknown section '" + name + "'");
      section = name;
      want_header = true;
      expected_t = 0;
      continue;
    }
    auto cells = detail::split_csv(line);
    if (want_header) {
      if (cells.empty() || cells[0] != "t")
        throw IoError(path + ":" + std::to_string(line_no) + ": header must start with 't'");
      columns.clear();
      for (std::size_t i = 1; i < cells.size(); ++i) {
        auto v = model.find(cells[i]);
        if (!v)
          throw IoError(path + ":" + std::to_string(line_no) + ": unknown variable '" +
                        cells[i] + "' in header");
        columns.push_back(*v);
      }
      want_header = false;
      continue;
    }
    if (cells.size() != columns.size() + 1)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(columns.size() + 1) + " fields");
    std::size_t t = 0;
    try {
      t = std::stoul(cells[0]);
    } catch (...) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad time index '" + cells[0] + "'");
    }
    if (t != expected_t)
      throw IoError(path + ":" + std::to_string(line_no) + ": time indices must be consecutive from 0");
    ++expected_t;
    Assignment a(model.var_count());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      int value = 0;
      try {
        value = std::stoi(cells[i + 1]);
      } catch (...) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad value '" + cells[i + 1] + "'");
      }
      if (value < 0 || value >= model.cardinality(columns[i]))
        throw IoError(path + ":" + std::to_string(line_no) + ": value " +
                      std::to_string(value) + " out of range for '" +
                      model.name(columns[i]) + "'");
      a.set(columns[i], static_cast<Value>(value));
    }
    (section == "hidden" ? traj.hidden : traj.observed).push_back(std::move(a));
  }
  if (traj.observed.empty())
    throw IoError(path + ": no observed section found");
  if (traj.has_hidden() && traj.hidden.size() != traj.observed.size())
    throw IoError(path + ": hidden and observed sections disagree on length");
  // completeness over the respective variable sets
  auto check = [&](const std::vector<Assignment>& slices, const std::vector<VarId>& vars,
                   const char* what) {
    for (std::size_t t = 0; t < slices.size(); ++t)
      if (!slices[t].complete_over(vars))
        throw IoError(path + ": " + what + " slice " + std::to_string(t) +
                      " is incomplete over its variable set");
  };
  if (traj.has_hidden()) check(traj.hidden, model.state_vars(), "hidden");
  check(traj.observed, model.observation_vars(), "observed");
  return traj;
}

inline Clustering load_clustering(const DbnModel& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open clusters file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::size_t e = text.find_last_not_of(" \t\r\n");
  if (e == std::string::npos) throw IoError("clusters file '" + path + "' is empty");
  return parse_clustering(text.substr(0, e + 1), model);
}

// ---------------------------------------------------------------------------
// particle table dumps (CSV, trailing weight column)

inline void write_particle_csv(const ParticleTable& table, const DbnModel& model,
                               std::ostream& out) {
  const std::size_t base = model.var_count();
  for (std::size_t i = 0; i < table.schema().size(); ++i) {
    if (i) out << ",";
    VarId v = table.schema()[i];
    if (v < base)
      out << model.name(v);
    else
      out << model.name(v - static_cast<VarId>(base)) << "@prev";
  }
  if (!table.schema().empty()) out << ",";
  out << "weight\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto row = table.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) out << row[i] << ",";
    out << format_double(table.weight(r)) << "\n";
  }
}

}  // namespace dbnmon
