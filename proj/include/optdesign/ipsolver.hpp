#pragma once

// Primal interior-point solver. Minimizes the log-barrier subproblem
//
//   f_mu(wt) = phi(M(P wt + q)) - mu sum_i log(wt_i) - mu log(1 - e^T wt)
//
// by Newton's method with Armijo backtracking under the fraction-to-boundary
// rule, shrinking mu geometrically between stages. The Newton system
//
//   [P^T M^T (V D V^T) M P + mu/(1-e^T wt)^2 ee^T + mu Diag(wt^-2)] d = -grad
//
// is solved through the Sherman-Morrison-Woodbury identity: the criterion
// Hessian factor V D V^T has rank r <= m(m+1)/2, so only an (r+1)-order
// capacitance matrix is ever factorized.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "optdesign/criteria.hpp"
#include "optdesign/errors.hpp"
#include "optdesign/problem.hpp"
#include "optdesign/report.hpp"

namespace optdesign {

struct IPConfig {
  double mu1 = 10.0;    // initial barrier parameter
  double beta = 0.5;    // backtracking factor
  double gamma = 0.5;   // barrier shrink factor
  double sigma = 0.1;   // Armijo slope fraction
  double eta = 0.95;    // fraction-to-boundary factor
  double eps_floor = 1e-10;
  double mu_stop = 1e-10;
  int max_inner = 200;
  int max_backtracks = 60;

  // Inner stopping tolerance; increasing in mu with limit eps_floor.
  double epsilon(double mu) const { return std::max(mu, eps_floor); }

  void validate() const {
    const bool unit = beta > 0 && beta < 1 && gamma > 0 && gamma < 1 && sigma > 0 &&
                      sigma < 1 && eta > 0 && eta < 1;
    if (!(mu1 > 0) || !unit || !(eps_floor > 0) || !(mu_stop > 0) || max_inner < 1 ||
        max_backtracks < 1)
      throw ConfigError("interior-point configuration out of range");
  }
};

namespace detail {

inline void check_interior(const ReducedWeights& wt) {
  const long n1 = wt.v.size();
  if (n1 == 0) return;  // single-point problem: w = (1) is the whole simplex
  if (wt.v.minCoeff() <= 0.0 || wt.v.sum() >= 1.0)
    throw NotInterior("reduced weights must satisfy wt > 0 and e^T wt < 1");
}

struct BarrierPoint {
  Vector w;          // lifted weights, all > 0
  double slack;      // 1 - e^T wt == w_n
  double phi;        // criterion value at the moment matrix
  double f;          // barrier value
  Vector grad;       // gradient of f_mu, length n-1
  Vector grad_svec;  // criterion gradient at the svec point
  SymMatrix moment;  // M(w)
};

inline Vector lift_interior(const ReducedWeights& wt) {
  check_interior(wt);
  const long n1 = wt.v.size();
  Vector w(n1 + 1);
  w.head(n1) = wt.v;
  w[n1] = 1.0 - wt.v.sum();
  return w;
}

inline BarrierPoint evaluate(const DesignProblem& problem, const ReducedWeights& wt,
                             double mu) {
  if (wt.v.size() != problem.n() - 1)
    throw DimensionMismatch("reduced weights must have length n-1");
  Vector w = lift_interior(wt);
  const double slack = w[w.size() - 1];

  const SymMatrix X = smat(problem.svec_design() * w);
  const CriterionEval ev = grad(problem.criterion(), X);

  const double barrier = mu == 0.0 ? 0.0 : -mu * w.array().log().sum();
  Vector y = problem.svec_design().transpose() * ev.grad_svec - mu * w.cwiseInverse();
  return {std::move(w), slack,          ev.value, ev.value + barrier,
          apply_p_transpose(y), ev.grad_svec,   X};
}

// Barrier value alone; line-search trials do not need gradients.
inline double evaluate_value(const DesignProblem& problem, const ReducedWeights& wt,
                             double mu) {
  if (wt.v.size() != problem.n() - 1)
    throw DimensionMismatch("reduced weights must have length n-1");
  const Vector w = lift_interior(wt);
  const double phi = value(problem.criterion(), smat(problem.svec_design() * w));
  return mu == 0.0 ? phi : phi - mu * w.array().log().sum();
}

struct NewtonResult {
  Vector d;
  double grad_dot_d = 0.0;
};

inline NewtonResult newton_direction(const DesignProblem& problem, const BarrierPoint& pt,
                                     const ReducedWeights& wt, double mu) {
  const long n1 = wt.v.size();
  if (n1 == 0) return {Vector(0), 0.0};

  const HessianFactor factor = hessian(problem.criterion(), pt.moment);
  const int r = factor.rank;

  // U = [P^T M^T V, e], C = diag(D, mu / slack^2); the Hessian is
  // U C U^T + mu Diag(wt^-2).
  const Matrix J = problem.svec_design().transpose() * factor.basis;  // n x r
  Matrix U(n1, r + 1);
  U.leftCols(r) = J.topRows(n1);
  U.leftCols(r).rowwise() -= J.row(n1);
  U.col(r).setOnes();

  const Vector q = wt.v.cwiseProduct(wt.v);  // wt^2
  Matrix Winv = (U.transpose() * (q.asDiagonal() * U)) / mu;
  Winv.diagonal().head(r) += factor.weights.cwiseInverse();
  Winv(r, r) += pt.slack * pt.slack / mu;

  Eigen::LLT<Matrix> llt(Winv);
  if (llt.info() != Eigen::Success) {
    const double ridge = 1e-12 * Winv.trace() / (r + 1);
    Winv.diagonal().array() += ridge;
    llt.compute(Winv);
    if (llt.info() != Eigen::Success)
      throw CapacitanceSingular("capacitance matrix factorization failed (order " +
                                std::to_string(r + 1) + ")");
  }

  const Vector s = q.cwiseProduct(pt.grad) / mu;
  const Vector z = llt.solve(U.transpose() * s);
  Vector d = -s + q.cwiseProduct(U * z) / mu;
  const double grad_dot_d = pt.grad.dot(d);
  return {std::move(d), grad_dot_d};
}

// Largest alpha keeping wt + alpha d inside the closed simplex.
inline double alpha_max(const ReducedWeights& wt, const Vector& d, double slack) {
  double amax = std::numeric_limits<double>::infinity();
  for (long i = 0; i < d.size(); ++i)
    if (d[i] < 0.0) amax = std::min(amax, wt.v[i] / -d[i]);
  const double ed = d.sum();
  if (ed > 0.0) amax = std::min(amax, slack / ed);
  return amax;
}

struct LineSearchResult {
  bool accepted = false;
  double alpha = 0.0;
  int backtracks = 0;
  ReducedWeights next;
  double f_next = 0.0;
};

inline LineSearchResult line_search(const DesignProblem& problem, const ReducedWeights& wt,
                                    const Vector& d, double mu, const IPConfig& config,
                                    double f0, double grad_dot_d, double slack) {
  const double abar = std::min(1.0, config.eta * alpha_max(wt, d, slack));
  double alpha = abar;
  for (int t = 0; t <= config.max_backtracks; ++t, alpha *= config.beta) {
    const ReducedWeights trial{wt.v + alpha * d};
    const double f_trial = evaluate_value(problem, trial, mu);
    if (f_trial <= f0 + config.sigma * alpha * grad_dot_d)
      return {true, alpha, t, trial, f_trial};
  }
  return {false, 0.0, config.max_backtracks, wt, f0};
}

}  // namespace detail

// ---- public operations -----------------------------------------------------

inline double barrier_value(const DesignProblem& problem, const ReducedWeights& wt,
                            double mu) {
  return detail::evaluate_value(problem, wt, mu);
}

inline Vector barrier_grad(const DesignProblem& problem, const ReducedWeights& wt,
                           double mu) {
  return detail::evaluate(problem, wt, mu).grad;
}

inline Vector newton_direction(const DesignProblem& problem, const ReducedWeights& wt,
                               double mu) {
  const detail::BarrierPoint pt = detail::evaluate(problem, wt, mu);
  return detail::newton_direction(problem, pt, wt, mu).d;
}

// Step acceptance along a descent direction. Throws LineSearchStalled when no
// backtracked step passes the Armijo test, which signals either a corrupted
// Newton direction or float-resolution exhaustion near a minimizer.
inline std::pair<double, ReducedWeights> line_search(const DesignProblem& problem,
                                                     const ReducedWeights& wt,
                                                     const Vector& d, double mu,
                                                     const IPConfig& config = {}) {
  const detail::BarrierPoint pt = detail::evaluate(problem, wt, mu);
  const detail::LineSearchResult res =
      detail::line_search(problem, wt, d, mu, config, pt.f, pt.grad.dot(d), pt.slack);
  if (!res.accepted)
    throw LineSearchStalled("no Armijo step after " +
                            std::to_string(config.max_backtracks) + " backtracks");
  return {res.alpha, res.next};
}

inline KKTDiagnostics kkt_diagnostics(const DesignProblem& problem, const ReducedWeights& wt,
                                      double mu) {
  const detail::BarrierPoint pt = detail::evaluate(problem, wt, mu);
  KKTDiagnostics diag;
  diag.u = mu * pt.w.cwiseInverse();
  diag.v = pt.grad;
  diag.complementarity_gap = mu;
  diag.primal_feasibility = std::abs(pt.w.sum() - 1.0);
  return diag;
}

inline SolveReport solve_ip(const DesignProblem& problem, const IPConfig& config = {},
                            const TraceSink& sink = {}) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.n();

  ReducedWeights wt{Vector::Constant(n - 1, 1.0 / n)};
  double mu = config.mu1;

  SolveReport report;
  report.solver = "ip";
  report.termination = TerminationReason::MuStop;

  const auto emit = [&](const TraceRecord& rec) {
    report.trace.push_back(rec);
    if (sink) sink(rec);
  };

  int outer = 1;
  double final_mu = mu;
  for (;; ++outer) {
    detail::BarrierPoint pt = detail::evaluate(problem, wt, mu);
    emit({outer, mu, 0, pt.f, pt.grad.norm(), 0.0, 0, pt.w.minCoeff()});

    int no_progress = 0;
    for (int inner = 1;; ++inner) {
      const double grad_norm = pt.grad.norm();
      if (grad_norm <= config.epsilon(mu)) break;
      if (inner > config.max_inner) {
        report.inner_cap_hit = true;
        break;
      }

      const detail::NewtonResult nd = detail::newton_direction(problem, pt, wt, mu);
      if (!(nd.grad_dot_d < 0.0)) {
        // Descent lost to rounding; the stage cannot improve further.
        report.line_search_stalled = true;
        break;
      }
      const detail::LineSearchResult ls = detail::line_search(
          problem, wt, nd.d, mu, config, pt.f, nd.grad_dot_d, pt.slack);
      if (!ls.accepted) {
        report.line_search_stalled = true;
        break;
      }

      const double f_prev = pt.f;
      wt = ls.next;
      pt = detail::evaluate(problem, wt, mu);
      ++report.iterations;
      emit({outer, mu, inner, pt.f, pt.grad.norm(), ls.alpha, ls.backtracks,
            pt.w.minCoeff()});

      // Steps whose Armijo decrease falls under the float resolution of f
      // mean the stage is polished out; three in a row end it.
      const double resolution =
          8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(pt.f));
      if (f_prev - pt.f <= resolution) {
        if (++no_progress >= 3) {
          report.line_search_stalled = true;
          break;
        }
      } else {
        no_progress = 0;
      }
    }

    report.mu_trace.push_back(mu);
    final_mu = mu;
    if (mu <= config.mu_stop) break;
    mu *= config.gamma;
  }

  report.outer_iterations = outer;
  const FullWeights w = lift(wt);
  report.w = w.v;
  report.objective = value(problem.criterion(), problem.moment_matrix(w));
  report.best_objective = report.objective;
  report.best_w = report.w;
  report.kkt = kkt_diagnostics(problem, wt, final_mu);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace optdesign
