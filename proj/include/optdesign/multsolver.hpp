#pragma once

// Multiplicative algorithm with power parameter lambda:
//
//   w_i <- w_i d_i(w)^lambda / sum_j w_j d_j(w)^lambda,
//   d_i(w) = -tr(gradPhi(M(w)) A_i),
//
// stopping when max_i d_i <= (1 + delta) sum_i w_i d_i or after max_iters
// updates. For p < -1 the objective sequence may oscillate, so the best
// iterate seen is tracked alongside the final one.

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "optdesign/criteria.hpp"
#include "optdesign/errors.hpp"
#include "optdesign/problem.hpp"
#include "optdesign/report.hpp"

namespace optdesign {

struct MultConfig {
  double lambda = 1.0;   // power parameter in (0, 1]
  double delta = 2e-4;   // stopping slack
  int max_iters = 10000;
  bool track_minimum = true;

  void validate() const {
    if (!(lambda > 0.0) || lambda > 1.0 || !(delta > 0.0) || max_iters < 1)
      throw ConfigError("multiplicative configuration out of range");
  }
};

namespace detail {

struct MultPoint {
  double objective;
  Vector scores;  // d_i(w), nonnegative for the supported criteria
};

inline MultPoint mult_point(const DesignProblem& problem, const FullWeights& w) {
  const CriterionEval ev = grad(problem.criterion(), problem.moment_matrix(w));
  // d = -M^T svec(gradPhi), one dense product instead of n traces.
  return {ev.value, -(problem.svec_design().transpose() * ev.grad_svec)};
}

inline bool converged(const Vector& scores, const Vector& w, double delta) {
  return scores.maxCoeff() <= (1.0 + delta) * scores.dot(w);
}

inline Vector update(const Vector& w, const Vector& scores, double lambda) {
  // Scores are clamped at zero (they are nonnegative up to rounding) and
  // weights floored at 1e-300 so a zero score cannot poison later logarithms
  // or divisions; the iteration then lives on the support.
  const Vector s = scores.cwiseMax(0.0);
  Vector next = w.cwiseProduct(lambda == 1.0 ? s : s.array().pow(lambda).matrix());
  const double total = next.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateScores("sum of w_i d_i^lambda is not positive");
  next /= total;
  return next.cwiseMax(1e-300);
}

}  // namespace detail

// ---- public operations -----------------------------------------------------

inline Vector directional_scores(const DesignProblem& problem, const FullWeights& w) {
  check_on_simplex(w);
  return detail::mult_point(problem, w).scores;
}

inline FullWeights mult_step(const DesignProblem& problem, const FullWeights& w,
                             const MultConfig& config = {}) {
  config.validate();
  check_on_simplex(w);
  const detail::MultPoint pt = detail::mult_point(problem, w);
  return {detail::update(w.v, pt.scores, config.lambda)};
}

inline bool mult_converged(const DesignProblem& problem, const FullWeights& w,
                           const MultConfig& config = {}) {
  config.validate();
  check_on_simplex(w);
  const detail::MultPoint pt = detail::mult_point(problem, w);
  return detail::converged(pt.scores, w.v, config.delta);
}

inline SolveReport solve_mult(const DesignProblem& problem, const MultConfig& config = {},
                              const TraceSink& sink = {}) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.n();

  Vector w = Vector::Constant(n, 1.0 / n);

  SolveReport report;
  report.solver = "mult";
  report.best_objective = std::numeric_limits<double>::infinity();
  report.objective_trace.reserve(config.max_iters + 1);

  int iter = 0;
  for (;; ++iter) {
    const detail::MultPoint pt = detail::mult_point(problem, {w});
    report.objective_trace.push_back(pt.objective);
    if (config.track_minimum && pt.objective < report.best_objective) {
      report.best_objective = pt.objective;
      report.best_w = w;
    }
    if (sink)
      sink({0, 0.0, iter, pt.objective, pt.scores.maxCoeff() / pt.scores.dot(w), 0.0, 0,
            w.minCoeff()});

    if (detail::converged(pt.scores, w, config.delta)) {
      report.termination = TerminationReason::Converged;
      break;
    }
    if (iter >= config.max_iters) {
      report.termination = TerminationReason::MaxIters;
      break;
    }
    w = detail::update(w, pt.scores, config.lambda);
  }

  report.iterations = iter;
  report.w = w;
  report.objective = report.objective_trace.back();
  if (!config.track_minimum) {
    report.best_objective = report.objective;
    report.best_w = w;
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace optdesign
