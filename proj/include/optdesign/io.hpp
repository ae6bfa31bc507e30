#pragma once

// Problem and report files.
//
// Problem file (JSON): fields `m`, `n`, one of `points` (list of length-m
// vectors) or `matrices` (list of symmetric matrices as row-major lower
// triangles of length m(m+1)/2), and `criterion` {kind: "A"|"c"|"D"|"pmean",
// p (pmean only), K: "identity" | list of rows}.
//
// Report file (JSON): `w` as sparse index->value pairs for entries > 1e-12,
// `objective`, `iterations`, `mu_trace`, `support_size`, `wall_time_seconds`,
// plus solver/termination metadata and `n` so the sparse weights can be
// re-densified.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "optdesign/errors.hpp"
#include "optdesign/problem.hpp"
#include "optdesign/report.hpp"

namespace optdesign {

namespace detail {

using nlohmann::json;

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + name + "': " + e.what());
  }
}

inline CriterionSpec parse_criterion(const json& j, int m) {
  const json& c = j.at("criterion");
  const std::string kind = field<std::string>(c, "kind");

  Matrix K;
  bool identity = true;
  if (c.contains("K") && !(c.at("K").is_string() && c.at("K") == "identity")) {
    const auto rows = field<std::vector<std::vector<double>>>(c, "K");
    if (rows.empty() || rows.size() != static_cast<size_t>(m))
      throw ParseError("criterion.K must have m rows");
    const size_t k = rows.front().size();
    if (k < 1 || k > static_cast<size_t>(m))
      throw ParseError("criterion.K needs k columns with 1 <= k <= m");
    K.resize(m, static_cast<long>(k));
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != k) throw ParseError("criterion.K rows have unequal lengths");
      for (size_t cc = 0; cc < k; ++cc) K(static_cast<long>(r), static_cast<long>(cc)) = rows[r][cc];
    }
    identity = false;
  }

  try {
    if (kind == "A") return identity ? CriterionSpec::a(m) : CriterionSpec::a(K);
    if (kind == "D") return identity ? CriterionSpec::d(m) : CriterionSpec::d(K);
    if (kind == "c") {
      if (identity) throw ParseError("c-criterion requires an explicit K column");
      if (K.cols() != 1) throw ParseError("c-criterion requires exactly one K column");
      return CriterionSpec::c(K.col(0));
    }
    if (kind == "pmean") {
      const double p = field<double>(c, "p");
      return identity ? CriterionSpec::pmean(m, p) : CriterionSpec::pmean(K, p);
    }
  } catch (const Error& e) {
    throw ParseError(std::string("criterion: ") + e.what());
  }
  throw ParseError("criterion.kind must be one of A, c, D, pmean");
}

inline json criterion_to_json(const CriterionSpec& spec) {
  json c;
  c["kind"] = to_string(spec.kind());
  if (spec.kind() == CriterionKind::PMean) c["p"] = spec.p();
  if (spec.identity_k()) {
    c["K"] = "identity";
  } else {
    std::vector<std::vector<double>> rows(spec.m(), std::vector<double>(spec.k()));
    for (int r = 0; r < spec.m(); ++r)
      for (int k = 0; k < spec.k(); ++k) rows[r][k] = spec.k_matrix()(r, k);
    c["K"] = rows;
  }
  return c;
}

}  // namespace detail

inline DesignProblem load_problem(const std::string& path) {
  using detail::field;
  const auto j = detail::parse_file(path);
  const int m = field<int>(j, "m");
  const int n = field<int>(j, "n");
  if (m < 1 || n < 1) throw ParseError("m and n must be positive");
  if (j.contains("points") == j.contains("matrices"))
    throw ParseError("exactly one of 'points' and 'matrices' is required");

  const CriterionSpec spec = detail::parse_criterion(j, m);

  if (j.contains("points")) {
    const auto pts = field<std::vector<std::vector<double>>>(j, "points");
    if (pts.size() != static_cast<size_t>(n)) throw ParseError("'points' must list n vectors");
    DesignSpace space;
    space.label = "file";
    space.points.resize(m, n);
    for (int i = 0; i < n; ++i) {
      if (pts[i].size() != static_cast<size_t>(m))
        throw ParseError("point " + std::to_string(i + 1) + " must have length m");
      for (int r = 0; r < m; ++r) space.points(r, i) = pts[i][r];
    }
    return DesignProblem::assemble(space, spec);
  }

  const auto mats = field<std::vector<std::vector<double>>>(j, "matrices");
  if (mats.size() != static_cast<size_t>(n)) throw ParseError("'matrices' must list n matrices");
  std::vector<SymMatrix> atoms;
  atoms.reserve(mats.size());
  for (int i = 0; i < n; ++i) {
    if (mats[i].size() != static_cast<size_t>(svec_length(m)))
      throw ParseError("matrix " + std::to_string(i + 1) +
                       " must hold m(m+1)/2 lower-triangle entries");
    Matrix A(m, m);
    size_t idx = 0;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c <= r; ++c) {
        A(r, c) = mats[i][idx++];
        A(c, r) = A(r, c);
      }
    atoms.emplace_back(std::move(A));
  }
  return DesignProblem::from_atoms(atoms, spec, "file");
}

inline void save_problem(const DesignProblem& problem, const std::string& path) {
  using detail::json;
  json j;
  j["m"] = problem.m();
  j["n"] = problem.n();
  j["criterion"] = detail::criterion_to_json(problem.criterion());
  if (problem.points()) {
    std::vector<std::vector<double>> pts(problem.n(), std::vector<double>(problem.m()));
    for (int i = 0; i < problem.n(); ++i)
      for (int r = 0; r < problem.m(); ++r) pts[i][r] = (*problem.points())(r, i);
    j["points"] = pts;
  } else {
    std::vector<std::vector<double>> mats;
    mats.reserve(problem.n());
    for (int i = 0; i < problem.n(); ++i) {
      const SymMatrix A = problem.atom(i);
      std::vector<double> tri;
      tri.reserve(svec_length(problem.m()));
      for (int r = 0; r < problem.m(); ++r)
        for (int c = 0; c <= r; ++c) tri.push_back(A(r, c));
      mats.push_back(std::move(tri));
    }
    j["matrices"] = mats;
  }
  detail::write_file(path, j);
}

inline void save_report(const SolveReport& report, const std::string& path) {
  using detail::json;
  json j;
  json w = json::object();
  for (long i = 0; i < report.w.size(); ++i)
    if (report.w[i] > 1e-12) w[std::to_string(i)] = report.w[i];
  j["w"] = w;
  j["n"] = report.w.size();
  j["objective"] = report.objective;
  j["best_objective"] = report.best_objective;
  j["iterations"] = report.iterations;
  j["mu_trace"] = report.mu_trace;
  j["support_size"] = report.support_size();
  j["wall_time_seconds"] = report.wall_time_seconds;
  j["solver"] = report.solver;
  j["termination"] = to_string(report.termination);
  detail::write_file(path, j);
}

// Rehydrates the subset of a report that the file format carries.
inline SolveReport load_report(const std::string& path) {
  using detail::field;
  const auto j = detail::parse_file(path);
  SolveReport report;
  const long n = field<long>(j, "n");
  report.w = Vector::Zero(n);
  for (const auto& [key, val] : j.at("w").items()) {
    const long i = std::stol(key);
    if (i < 0 || i >= n) throw ParseError("weight index " + key + " out of range");
    report.w[i] = val.get<double>();
  }
  report.objective = field<double>(j, "objective");
  report.best_objective = field<double>(j, "best_objective");
  report.iterations = field<long>(j, "iterations");
  report.mu_trace = field<std::vector<double>>(j, "mu_trace");
  report.wall_time_seconds = field<double>(j, "wall_time_seconds");
  report.solver = field<std::string>(j, "solver");
  const std::string term = field<std::string>(j, "termination");
  report.termination = term == "Converged"  ? TerminationReason::Converged
                       : term == "MaxIters" ? TerminationReason::MaxIters
                                            : TerminationReason::MuStop;
  report.best_w = report.w;
  return report;
}

}  // namespace optdesign
