#pragma once

// Benchmark driver behind the CLI: one RunConfig describes a problem cell
// (generated space or file), a criterion with its K mode, and the solvers to
// run; run() produces one BenchRow per (seed, solver). Independent cells may
// run on worker threads (capped by OPTDESIGN_THREADS); each solve itself is
// single-threaded and results land in deterministic order.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "optdesign/errors.hpp"
#include "optdesign/io.hpp"
#include "optdesign/ipsolver.hpp"
#include "optdesign/multsolver.hpp"
#include "optdesign/problem.hpp"

namespace optdesign {

enum class KMode { Identity, Random, File };
enum class OutputFormat { Csv, Json, Md };

inline const char* to_string(KMode k) {
  switch (k) {
    case KMode::Identity: return "identity";
    case KMode::Random: return "random";
    case KMode::File: return "file";
  }
  return "?";
}

struct RunConfig {
  std::optional<SpaceFamily> space;  // exactly one of space / problem_file
  std::string problem_file;
  int n = 0;  // chi3: grid parameter, the design holds n^2 points

  std::optional<CriterionKind> criterion;  // required with space
  double p = 0.0;                          // pmean only

  KMode k_mode = KMode::Identity;
  int k = 0;                     // columns of a random K
  std::vector<uint64_t> seeds;   // one cell per seed in Random mode
  std::string k_file;            // KMode::File: JSON {"K": [[row], ...]}

  bool run_ip = true;
  bool run_mult = true;
  IPConfig ip;
  MultConfig mult;

  OutputFormat format = OutputFormat::Csv;
  std::string output_path;  // empty: stdout
  TraceSink progress;
};

struct BenchRow {
  std::string space;
  int n = 0;
  std::string criterion;
  std::optional<double> p;
  std::string k_mode;
  std::string solver;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> best_objective;
  long iterations = 0;
  std::optional<long> inner_newton_steps;
  double wall_time_seconds = 0.0;
  std::string termination;
  int support_size = 0;
  std::optional<std::string> error;
};

// Gaussian m x k coefficient matrix, i.i.d. N(0,1) entries via Box-Muller on
// a fixed 53-bit mapping, so a seed pins the matrix bit for bit. Resamples up
// to 3 times if the draw is numerically rank deficient.
inline Matrix random_K(int m, int k, uint64_t seed) {
  if (k < 1 || k > m) throw ConfigError("random K requires 1 <= k <= m");
  std::mt19937_64 engine(seed);
  const auto uniform01 = [&engine]() {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
  };
  for (int attempt = 0; attempt < 4; ++attempt) {
    Matrix K(m, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < m; ++i) {
        const double u1 = uniform01(), u2 = uniform01();
        K(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      }
    const Vector sv = K.jacobiSvd().singularValues();
    if (sv[sv.size() - 1] > 1e-10 * sv[0]) return K;
  }
  throw RankDeficientAfterRetries("random K rank deficient after 3 resamples (m=" +
                                  std::to_string(m) + ", k=" + std::to_string(k) + ")");
}

namespace detail {

inline Matrix load_k_file(const std::string& path) {
  const auto j = parse_file(path);
  const auto rows = field<std::vector<std::vector<double>>>(j, "K");
  if (rows.empty() || rows.front().empty()) throw ParseError("K file holds no rows");
  Matrix K(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size())
      throw ParseError("K file rows have unequal lengths");
    for (size_t c = 0; c < rows[r].size(); ++c)
      K(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
  }
  return K;
}

inline CriterionSpec make_criterion(CriterionKind kind, int m, double p,
                                    const std::optional<Matrix>& K) {
  if (!K) {
    switch (kind) {
      case CriterionKind::A: return CriterionSpec::a(m);
      case CriterionKind::D: return CriterionSpec::d(m);
      case CriterionKind::PMean: return CriterionSpec::pmean(m, p);
      case CriterionKind::C:
        throw ConfigError("c-criterion needs an explicit coefficient vector");
    }
  }
  switch (kind) {
    case CriterionKind::A: return CriterionSpec::a(*K);
    case CriterionKind::D: return CriterionSpec::d(*K);
    case CriterionKind::PMean: return CriterionSpec::pmean(*K, p);
    case CriterionKind::C:
      if (K->cols() != 1) throw ConfigError("c-criterion requires exactly one column");
      return CriterionSpec::c(K->col(0));
  }
  throw ConfigError("unknown criterion kind");
}

inline BenchRow row_from_report(const RunConfig& config, const DesignProblem& problem,
                                const SolveReport& r) {
  BenchRow row;
  row.space = problem.label();
  row.n = config.n > 0 ? config.n : problem.n();
  row.criterion = to_string(problem.criterion().kind());
  if (problem.criterion().kind() == CriterionKind::PMean) row.p = problem.criterion().p();
  row.k_mode = to_string(config.k_mode);
  row.solver = r.solver;
  row.objective = r.objective;
  if (r.solver == "mult") row.best_objective = r.best_objective;
  row.iterations = r.iterations;
  if (r.solver == "ip") row.inner_newton_steps = r.iterations;
  row.wall_time_seconds = r.wall_time_seconds;
  row.termination = to_string(r.termination);
  row.support_size = r.support_size();
  return row;
}

inline int worker_count(size_t cells) {
  int cap = 1;
  if (const char* env = std::getenv("OPTDESIGN_THREADS")) {
    cap = std::atoi(env);
    if (cap < 1) cap = 1;
  }
  return static_cast<int>(std::min<size_t>(cap, cells));
}

}  // namespace detail

inline std::vector<BenchRow> run(const RunConfig& config) {
  if (config.space.has_value() == !config.problem_file.empty())
    throw ConfigError("exactly one of a space family and a problem file is required");
  if (!config.run_ip && !config.run_mult) throw ConfigError("no solver selected");
  if (config.k_mode == KMode::Random && config.seeds.empty())
    throw ConfigError("random K mode needs at least one seed");

  // Base problem; its criterion is replaced per cell below when K varies.
  DesignProblem base = [&]() {
    if (!config.problem_file.empty()) return load_problem(config.problem_file);
    if (config.n < 1) throw ConfigError("design size n must be positive");
    if (!config.criterion) throw ConfigError("generated spaces need --criterion");
    const DesignSpace space = generate_space(*config.space, config.n);
    // Assemble with an identity-K placeholder of the right kind, then let the
    // per-cell step install the real K; identity runs use it as-is.
    const CriterionKind kind = *config.criterion;
    const double p = config.p;
    if (kind == CriterionKind::PMean && !(p < 0.0))
      throw ConfigError("pmean requires --p < 0");
    std::optional<Matrix> K;
    if (config.k_mode == KMode::File) K = detail::load_k_file(config.k_file);
    if (config.k_mode == KMode::Random)
      K = random_K(space.m(), config.k, config.seeds.front());
    return DesignProblem::assemble(space, detail::make_criterion(kind, space.m(), p, K));
  }();

  if (!config.problem_file.empty() && config.criterion) {
    std::optional<Matrix> K;
    if (config.k_mode == KMode::File) K = detail::load_k_file(config.k_file);
    if (config.k_mode == KMode::Random) K = random_K(base.m(), config.k, config.seeds.front());
    base = base.with_criterion(detail::make_criterion(*config.criterion, base.m(), config.p, K));
  }

  const std::vector<uint64_t> seeds =
      config.k_mode == KMode::Random ? config.seeds : std::vector<uint64_t>{0};

  struct Cell {
    uint64_t seed;
    std::string solver;
  };
  std::vector<Cell> cells;
  for (uint64_t seed : seeds) {
    if (config.run_ip) cells.push_back({seed, "ip"});
    if (config.run_mult) cells.push_back({seed, "mult"});
  }

  std::vector<BenchRow> rows(cells.size());
  std::atomic<size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const Cell& cell = cells[idx];
      try {
        DesignProblem problem =
            (config.k_mode == KMode::Random && cell.seed != seeds.front())
                ? base.with_criterion(detail::make_criterion(
                      *config.criterion, base.m(), config.p,
                      random_K(base.m(), config.k, cell.seed)))
                : base;
        const SolveReport report = cell.solver == "ip"
                                       ? solve_ip(problem, config.ip, config.progress)
                                       : solve_mult(problem, config.mult, config.progress);
        rows[idx] = detail::row_from_report(config, problem, report);
      } catch (const Error& e) {
        BenchRow& row = rows[idx];
        row.space = config.space ? to_string(*config.space) : config.problem_file;
        row.n = config.n;
        row.criterion = config.criterion ? to_string(*config.criterion) : "file";
        row.k_mode = to_string(config.k_mode);
        row.solver = cell.solver;
        row.error = e.what();
      }
      if (config.k_mode == KMode::Random) rows[idx].k_mode += ":" + std::to_string(cell.seed);
    }
  };

  const int workers = detail::worker_count(cells.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  return rows;
}

// ---- table emission ---------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::vector<std::string> row_fields(const BenchRow& r) {
  return {r.space,
          std::to_string(r.n),
          r.criterion,
          r.p ? fmt_double(*r.p) : "",
          r.k_mode,
          r.solver,
          fmt_double(r.objective),
          r.best_objective ? fmt_double(*r.best_objective) : "",
          std::to_string(r.iterations),
          r.inner_newton_steps ? std::to_string(*r.inner_newton_steps) : "",
          fmt_double(r.wall_time_seconds),
          r.termination,
          std::to_string(r.support_size),
          r.error.value_or("")};
}

inline const std::vector<std::string>& row_header() {
  static const std::vector<std::string> header = {
      "space",      "n",          "criterion",         "p",
      "k_mode",     "solver",     "objective",         "best_objective",
      "iterations", "inner_newton_steps", "wall_time_seconds", "termination",
      "support_size", "error"};
  return header;
}

inline nlohmann::json row_to_json(const BenchRow& r) {
  nlohmann::json j;
  j["space"] = r.space;
  j["n"] = r.n;
  j["criterion"] = r.criterion;
  if (r.p) j["p"] = *r.p;
  j["k_mode"] = r.k_mode;
  j["solver"] = r.solver;
  j["objective"] = r.objective;
  if (r.best_objective) j["best_objective"] = *r.best_objective;
  j["iterations"] = r.iterations;
  if (r.inner_newton_steps) j["inner_newton_steps"] = *r.inner_newton_steps;
  j["wall_time_seconds"] = r.wall_time_seconds;
  j["termination"] = r.termination;
  j["support_size"] = r.support_size;
  if (r.error) j["error"] = *r.error;
  return j;
}

}  // namespace detail

inline void emit(const std::vector<BenchRow>& rows, OutputFormat format, std::ostream& out) {
  switch (format) {
    case OutputFormat::Csv: {
      const auto& header = detail::row_header();
      for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
      for (const BenchRow& r : rows) {
        const auto fields = detail::row_fields(r);
        for (size_t i = 0; i < fields.size(); ++i)
          out << fields[i] << (i + 1 < fields.size() ? "," : "\n");
      }
      break;
    }
    case OutputFormat::Json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const BenchRow& r : rows) arr.push_back(detail::row_to_json(r));
      out << arr.dump(2) << "\n";
      break;
    }
    case OutputFormat::Md: {
      out << "| space | n | criterion | p | K | solver | iters | cpu (s) | obj |\n";
      out << "|---|---|---|---|---|---|---|---|---|\n";
      for (const BenchRow& r : rows) {
        out << "| " << r.space << " | " << r.n << " | " << r.criterion << " | "
            << (r.p ? detail::fmt_double(*r.p) : "-") << " | " << r.k_mode << " | "
            << r.solver << " | " << r.iterations << " | "
            << detail::fmt_double(r.wall_time_seconds) << " | ";
        if (r.error)
          out << "error: " << *r.error;
        else if (r.best_objective && r.termination == "MaxIters")
          out << detail::fmt_double(*r.best_objective) << " (min over iterations)";
        else
          out << detail::fmt_double(r.objective);
        out << " |\n";
      }
      break;
    }
  }
}

inline void emit(const std::vector<BenchRow>& rows, OutputFormat format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  emit(rows, format, out);
  if (!out) throw IoError("failed writing " + path);
}

// Reads back rows emitted as JSON.
inline std::vector<BenchRow> load_rows(const std::string& path) {
  const auto arr = detail::parse_file(path);
  if (!arr.is_array()) throw ParseError(path + ": expected a JSON array of rows");
  std::vector<BenchRow> rows;
  for (const auto& j : arr) {
    BenchRow r;
    r.space = detail::field<std::string>(j, "space");
    r.n = detail::field<int>(j, "n");
    r.criterion = detail::field<std::string>(j, "criterion");
    if (j.contains("p")) r.p = j.at("p").get<double>();
    r.k_mode = detail::field<std::string>(j, "k_mode");
    r.solver = detail::field<std::string>(j, "solver");
    r.objective = detail::field<double>(j, "objective");
    if (j.contains("best_objective")) r.best_objective = j.at("best_objective").get<double>();
    r.iterations = detail::field<long>(j, "iterations");
    if (j.contains("inner_newton_steps"))
      r.inner_newton_steps = j.at("inner_newton_steps").get<long>();
    r.wall_time_seconds = detail::field<double>(j, "wall_time_seconds");
    r.termination = detail::field<std::string>(j, "termination");
    r.support_size = detail::field<int>(j, "support_size");
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace optdesign
