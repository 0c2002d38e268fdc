#pragma once

// JSON problem documents.
//
// A document is one UTF-8 JSON object.  Network mode:
//   {"mode": "network", "N": 4, "n": 2, "A": [[...]], "H": [[...]],
//    "C": [[...]], "L": [[...]], "L_bar": [[...]], "sensors": [1, 2]}
// Multi-agent mode replaces H with B and the adjacencies with weighted edge
// lists given as [i, j, weight] triples:
//   {"mode": "multiagent", "N": 3, "n": 2, "A": ..., "B": ..., "C": ...,
//    "weights": [[1, 2, 1.0], ...], "weights_bar": [...], "observed": [1, 3]}
// Optional keys "tol", "t_final", "samples" override the analysis defaults;
// anything else at the top level is rejected so that a typoed key cannot
// silently fall back to a default.

#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "netdiscern/model.hpp"

namespace netdiscern {

// A malformed or inconsistent problem file.  The message names the offending
// field (or carries the parser's line/column for syntax errors).
class SpecFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpecDocument {
  std::string mode;  // "network" | "multiagent"
  std::optional<NetworkSpec> network;
  std::optional<MultiAgentSpec> multiagent;
  // Present only when the file sets them; command-line flags outrank them,
  // and the library defaults fill whatever remains.
  std::optional<double> tol;
  std::optional<double> t_final;
  std::optional<int> samples;
};

namespace detail {

inline int spec_int(const nlohmann::json& j, const char* field, int min_value) {
  if (!j.is_number_integer())
    throw SpecFormatError(strf("\"%s\" must be an integer", field));
  const long long v = j.get<long long>();
  if (v < min_value)
    throw SpecFormatError(
        strf("\"%s\" must be at least %d (got %lld)", field, min_value, v));
  return static_cast<int>(v);
}

inline double spec_number(const nlohmann::json& j, const char* field) {
  if (!j.is_number())
    throw SpecFormatError(strf("\"%s\" must be a number", field));
  return j.get<double>();
}

// rows < 0 leaves the row count free (C may have any output dimension).
inline Eigen::MatrixXd spec_matrix(const nlohmann::json& j, const char* field,
                                   Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || j.empty())
    throw SpecFormatError(
        strf("\"%s\" must be a non-empty array of rows", field));
  const Eigen::Index r = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array())
    throw SpecFormatError(strf("\"%s\" rows must be arrays", field));
  const Eigen::Index c = static_cast<Eigen::Index>(j[0].size());
  if (c == 0)
    throw SpecFormatError(strf("\"%s\" rows must not be empty", field));
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
      throw SpecFormatError(
          strf("\"%s\" row %ld has a different length than row 0", field,
               static_cast<long>(i + 1)));
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto& cell = row[static_cast<size_t>(k)];
      if (!cell.is_number())
        throw SpecFormatError(strf("\"%s\"[%ld][%ld] is not a number", field,
                                   static_cast<long>(i + 1),
                                   static_cast<long>(k + 1)));
      m(i, k) = cell.get<double>();
    }
  }
  if ((rows >= 0 && r != rows) || c != cols) {
    const std::string want =
        rows >= 0 ? std::to_string(static_cast<long>(rows)) : "p";
    throw SpecFormatError(strf("\"%s\" must be %s x %ld, file has %ld x %ld",
                               field, want.c_str(), static_cast<long>(cols),
                               static_cast<long>(r), static_cast<long>(c)));
  }
  return m;
}

inline std::vector<int> spec_int_list(const nlohmann::json& j,
                                      const char* field) {
  if (!j.is_array())
    throw SpecFormatError(strf("\"%s\" must be an array of integers", field));
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer())
      throw SpecFormatError(
          strf("\"%s\" entries must be integers", field));
    out.push_back(e.get<int>());
  }
  return out;
}

inline std::vector<MultiAgentSpec::Edge> spec_edges(const nlohmann::json& j,
                                                    const char* field) {
  if (!j.is_array())
    throw SpecFormatError(
        strf("\"%s\" must be an array of [i, j, weight] triples", field));
  std::vector<MultiAgentSpec::Edge> out;
  for (size_t k = 0; k < j.size(); ++k) {
    const auto& t = j[k];
    if (!t.is_array() || t.size() != 3)
      throw SpecFormatError(strf("\"%s\"[%zu] must be an [i, j, weight] triple",
                                 field, k + 1));
    MultiAgentSpec::Edge e;
    if (!t[0].is_number_integer() || !t[1].is_number_integer())
      throw SpecFormatError(
          strf("\"%s\"[%zu] endpoints must be integers", field, k + 1));
    e.i = t[0].get<int>();
    e.j = t[1].get<int>();
    if (!t[2].is_number())
      throw SpecFormatError(
          strf("\"%s\"[%zu] weight must be a number", field, k + 1));
    e.weight = t[2].get<double>();
    out.push_back(e);
  }
  return out;
}

inline void spec_check_keys(const nlohmann::json& j,
                            const std::set<std::string>& required,
                            const std::set<std::string>& optional) {
  for (const auto& item : j.items()) {
    if (!required.count(item.key()) && !optional.count(item.key()))
      throw SpecFormatError(
          strf("unknown top-level key \"%s\"", item.key().c_str()));
  }
  for (const auto& key : required)
    if (!j.contains(key))
      throw SpecFormatError(strf("missing required key \"%s\"", key.c_str()));
}

inline void spec_overrides(const nlohmann::json& j, SpecDocument& doc) {
  if (j.contains("tol")) {
    doc.tol = spec_number(j["tol"], "tol");
    if (!(*doc.tol > 0.0))
      throw SpecFormatError("\"tol\" must be positive");
  }
  if (j.contains("t_final")) {
    doc.t_final = spec_number(j["t_final"], "t_final");
    if (!(*doc.t_final > 0.0))
      throw SpecFormatError("\"t_final\" must be positive");
  }
  if (j.contains("samples")) doc.samples = spec_int(j["samples"], "samples", 2);
}

}  // namespace detail

inline SpecDocument parse_spec_document(const nlohmann::json& j) {
  if (!j.is_object())
    throw SpecFormatError("the document must be a JSON object");
  if (!j.contains("mode") || !j["mode"].is_string())
    throw SpecFormatError("\"mode\" must be \"network\" or \"multiagent\"");

  SpecDocument doc;
  doc.mode = j["mode"].get<std::string>();
  const std::set<std::string> overrides = {"tol", "t_final", "samples"};

  if (doc.mode == "network") {
    detail::spec_check_keys(
        j, {"mode", "N", "n", "A", "H", "C", "L", "L_bar", "sensors"},
        overrides);
    const int N = detail::spec_int(j["N"], "N", 2);
    const int n = detail::spec_int(j["n"], "n", 1);
    NetworkSpec s;
    s.A = detail::spec_matrix(j["A"], "A", n, n);
    s.H = detail::spec_matrix(j["H"], "H", n, n);
    s.C = detail::spec_matrix(j["C"], "C", -1, n);
    s.L = detail::spec_matrix(j["L"], "L", N, N);
    s.L_bar = detail::spec_matrix(j["L_bar"], "L_bar", N, N);
    s.sensors = detail::spec_int_list(j["sensors"], "sensors");
    doc.network = std::move(s);
  } else if (doc.mode == "multiagent") {
    detail::spec_check_keys(
        j,
        {"mode", "N", "n", "A", "B", "C", "weights", "weights_bar", "observed"},
        overrides);
    const int N = detail::spec_int(j["N"], "N", 2);
    const int n = detail::spec_int(j["n"], "n", 1);
    MultiAgentSpec s;
    s.num_agents = N;
    s.A = detail::spec_matrix(j["A"], "A", n, n);
    s.B = detail::spec_matrix(j["B"], "B", n, n);
    s.C = detail::spec_matrix(j["C"], "C", -1, n);
    s.edges = detail::spec_edges(j["weights"], "weights");
    s.edges_bar = detail::spec_edges(j["weights_bar"], "weights_bar");
    s.observed = detail::spec_int_list(j["observed"], "observed");
    doc.multiagent = std::move(s);
  } else {
    throw SpecFormatError(detail::strf(
        "unknown mode \"%s\" (expected \"network\" or \"multiagent\")",
        doc.mode.c_str()));
  }
  detail::spec_overrides(j, doc);

  const ValidationReport report = doc.network ? validate_spec(*doc.network)
                                              : validate_spec(*doc.multiagent);
  if (!report.ok()) {
    std::string msg = "invalid problem";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw SpecFormatError(msg);
  }
  return doc;
}

inline SpecDocument load_spec_document(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw SpecFormatError(
        detail::strf("cannot open \"%s\"", path.c_str()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecFormatError(
        detail::strf("%s: %s", path.c_str(), e.what()));
  }
  return parse_spec_document(j);
}

}  // namespace netdiscern
