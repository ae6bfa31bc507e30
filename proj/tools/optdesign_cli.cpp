// Command-line driver: run the interior-point and multiplicative solvers on
// generated or file-based design problems, emit result tables, and execute
// the verification suites.
//
// Exit codes: 0 success, 1 solver error, 2 configuration error,
// 3 verification failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optdesign/optdesign.hpp"

namespace {

using namespace optdesign;

SpaceFamily parse_space(const std::string& s) {
  if (s == "chi1") return SpaceFamily::Chi1;
  if (s == "chi2") return SpaceFamily::Chi2;
  if (s == "chi3") return SpaceFamily::Chi3;
  if (s == "chi4") return SpaceFamily::Chi4;
  throw ConfigError("unknown design space '" + s + "'");
}

CriterionKind parse_criterion(const std::string& s) {
  if (s == "A") return CriterionKind::A;
  if (s == "c") return CriterionKind::C;
  if (s == "D") return CriterionKind::D;
  if (s == "pmean") return CriterionKind::PMean;
  throw ConfigError("unknown criterion '" + s + "'");
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  if (s == "md") return OutputFormat::Md;
  throw ConfigError("unknown output format '" + s + "'");
}

void print_trace(const TraceRecord& rec) {
  if (rec.mu > 0.0)
    std::fprintf(stderr, "[ip] outer=%d mu=%.3e inner=%d f=%.10g |grad|=%.3e alpha=%.3e\n",
                 rec.outer, rec.mu, rec.inner, rec.f, rec.grad_norm, rec.alpha);
  else
    std::fprintf(stderr, "[mult] iter=%d objective=%.10g ratio=%.6f\n", rec.inner, rec.f,
                 rec.grad_norm);
}

DesignProblem build_problem(const RunConfig& config) {
  if (!config.problem_file.empty()) {
    DesignProblem problem = load_problem(config.problem_file);
    if (config.criterion) {
      std::optional<Matrix> K;
      if (config.k_mode == KMode::Random)
        K = random_K(problem.m(), config.k, config.seeds.front());
      else if (config.k_mode == KMode::File)
        K = detail::load_k_file(config.k_file);
      return problem.with_criterion(
          detail::make_criterion(*config.criterion, problem.m(), config.p, K));
    }
    return problem;
  }
  const DesignSpace space = generate_space(*config.space, config.n);
  std::optional<Matrix> K;
  if (config.k_mode == KMode::Random) K = random_K(space.m(), config.k, config.seeds.front());
  if (config.k_mode == KMode::File) K = detail::load_k_file(config.k_file);
  return DesignProblem::assemble(
      space, detail::make_criterion(*config.criterion, space.m(), config.p, K));
}

int run_command(const RunConfig& config, const std::string& report_path) {
  std::vector<BenchRow> rows;
  if (!report_path.empty()) {
    // Single cell solved once; its full report goes to the report file and
    // its summary row to the table output.
    if (config.run_ip == config.run_mult || config.seeds.size() > 1)
      throw ConfigError("--report requires exactly one solver and at most one seed");
    const DesignProblem problem = build_problem(config);
    const SolveReport report = config.run_ip
                                   ? solve_ip(problem, config.ip, config.progress)
                                   : solve_mult(problem, config.mult, config.progress);
    save_report(report, report_path);
    rows.push_back(detail::row_from_report(config, problem, report));
  } else {
    rows = run(config);
  }

  if (config.output_path.empty())
    emit(rows, config.format, std::cout);
  else
    emit(rows, config.format, config.output_path);

  for (const BenchRow& row : rows)
    if (row.error) {
      std::cerr << "solver error: " << *row.error << "\n";
      return 1;
    }
  return 0;
}

int verify_command(const std::string& suite_name) {
  std::vector<SuiteResult> suites;
  if (suite_name == "all") {
    suites = verify_all();
  } else if (suite_name == "derivatives") {
    suites = {verify_derivatives()};
  } else if (suite_name == "ranks") {
    suites = {verify_ranks()};
  } else if (suite_name == "smw") {
    suites = {verify_smw()};
  } else if (suite_name == "tiny-analytic") {
    suites = {verify_tiny_analytic()};
  } else if (suite_name == "tables") {
    suites = {verify_tables()};
  } else {
    throw ConfigError("unknown verification suite '" + suite_name + "'");
  }

  bool ok = true;
  for (const SuiteResult& suite : suites) {
    for (const CheckResult& c : suite.checks) {
      std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << suite.suite << ": " << c.name
                << " — " << c.detail << "\n";
      ok = ok && c.pass;
    }
    std::cout << "suite " << suite.suite << ": " << (suite.ok() ? "pass" : "FAIL") << "\n";
  }
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optdesign: optimal experimental design solvers"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "solve a design problem and emit result rows");
  std::string space_name, problem_file, criterion_name = "A", k_spec = "identity";
  std::string solver = "both", format_name = "csv", out_path, report_path;
  int n = 0, k = 3;
  double p = 0.0;
  std::vector<uint64_t> seeds;
  bool verbose = false;
  IPConfig ip;
  MultConfig mult;

  run_cmd->add_option("--space", space_name, "design space family (chi1..chi4)");
  run_cmd->add_option("--problem", problem_file, "problem file (JSON)");
  run_cmd->add_option("--n", n, "design size (chi3: grid parameter, n^2 points)");
  run_cmd->add_option("--criterion", criterion_name, "A | c | D | pmean");
  run_cmd->add_option("--p", p, "exponent for the pmean criterion (p < 0)");
  run_cmd->add_option("--K", k_spec, "identity | random | path to a K file");
  run_cmd->add_option("--k", k, "columns of a random K");
  run_cmd->add_option("--seed", seeds, "seed(s) for random K, one cell per seed");
  run_cmd->add_option("--solver", solver, "ip | mult | both");
  run_cmd->add_option("--format", format_name, "csv | json | md");
  run_cmd->add_option("--out", out_path, "output path (default: stdout)");
  run_cmd->add_option("--report", report_path, "write the solver report (JSON)");
  run_cmd->add_flag("--verbose", verbose, "stream per-iteration trace lines to stderr");
  run_cmd->add_option("--mu1", ip.mu1, "initial barrier parameter");
  run_cmd->add_option("--gamma", ip.gamma, "barrier shrink factor");
  run_cmd->add_option("--mu-stop", ip.mu_stop, "final barrier parameter");
  run_cmd->add_option("--lambda", mult.lambda, "multiplicative power parameter");
  run_cmd->add_option("--delta", mult.delta, "multiplicative stopping slack");
  run_cmd->add_option("--max-iters", mult.max_iters, "multiplicative iteration cap");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  std::string suite = "all";
  verify_cmd->add_option("--suite", suite,
                         "derivatives | smw | ranks | tiny-analytic | tables | all");

  // make-problem
  auto* make_cmd =
      app.add_subcommand("make-problem", "write a generated design problem to a file");
  std::string mk_space = "chi2", mk_criterion = "A", mk_out;
  int mk_n = 100;
  double mk_p = -0.5;
  make_cmd->add_option("--space", mk_space, "design space family");
  make_cmd->add_option("--n", mk_n, "design size");
  make_cmd->add_option("--criterion", mk_criterion, "A | D | pmean");
  make_cmd->add_option("--p", mk_p, "pmean exponent");
  make_cmd->add_option("--out", mk_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      RunConfig config;
      if (!space_name.empty()) config.space = parse_space(space_name);
      config.problem_file = problem_file;
      config.n = n;
      if (run_cmd->count("--criterion") || !space_name.empty())
        config.criterion = parse_criterion(criterion_name);
      config.p = p;
      if (k_spec == "identity") {
        config.k_mode = KMode::Identity;
      } else if (k_spec == "random") {
        config.k_mode = KMode::Random;
        config.k = k;
        config.seeds = seeds;
      } else {
        config.k_mode = KMode::File;
        config.k_file = k_spec;
      }
      if (solver == "ip") {
        config.run_mult = false;
      } else if (solver == "mult") {
        config.run_ip = false;
      } else if (solver != "both") {
        throw ConfigError("unknown solver '" + solver + "'");
      }
      config.format = parse_format(format_name);
      config.output_path = out_path;
      config.ip = ip;
      config.mult = mult;
      if (verbose) config.progress = print_trace;
      return run_command(config, report_path);
    }
    if (verify_cmd->parsed()) return verify_command(suite);
    if (make_cmd->parsed()) {
      const SpaceFamily family = parse_space(mk_space);
      const DesignSpace space = generate_space(family, mk_n);
      const CriterionKind kind = parse_criterion(mk_criterion);
      const CriterionSpec spec = kind == CriterionKind::A ? CriterionSpec::a(space.m())
                                 : kind == CriterionKind::D
                                     ? CriterionSpec::d(space.m())
                                     : CriterionSpec::pmean(space.m(), mk_p);
      save_problem(DesignProblem::assemble(space, spec), mk_out);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 2;
}
