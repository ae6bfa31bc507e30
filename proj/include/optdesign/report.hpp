#pragma once

// Solver-facing result and trace types shared by the interior-point and
// multiplicative solvers.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/symlin.hpp"

namespace optdesign {

enum class TerminationReason { MuStop, Converged, MaxIters };

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::MuStop: return "MuStop";
    case TerminationReason::Converged: return "Converged";
    case TerminationReason::MaxIters: return "MaxIters";
  }
  return "?";
}

// One accepted interior-point step (or, with inner == 0, the entry point of a
// barrier stage). min_weight is the smallest entry of the lifted weights, so
// min_weight > 0 certifies strict interiority of the recorded iterate.
struct TraceRecord {
  int outer = 0;
  double mu = 0.0;
  int inner = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
  int backtracks = 0;
  double min_weight = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

// Perturbed KKT residuals at an interior point: u = mu w^-1 and
// v = P^T(grad Phi_M(w) - u), with u o w = mu e by construction.
struct KKTDiagnostics {
  Vector v;
  Vector u;
  double complementarity_gap = 0.0;
  double primal_feasibility = 0.0;
};

struct SolveReport {
  std::string solver;
  Vector w;
  double objective = 0.0;

  // Minimum-over-iterations tracking (multiplicative solver); for the IP
  // solver these mirror the final iterate.
  double best_objective = 0.0;
  Vector best_w;

  long iterations = 0;       // Newton steps (ip) or multiplicative updates
  int outer_iterations = 0;  // barrier stages (ip only)
  std::vector<double> mu_trace;
  std::vector<TraceRecord> trace;            // ip
  std::vector<double> objective_trace;       // mult
  TerminationReason termination = TerminationReason::MuStop;
  bool inner_cap_hit = false;
  bool line_search_stalled = false;
  std::optional<KKTDiagnostics> kkt;
  double wall_time_seconds = 0.0;

  int support_size(double threshold = 1e-6) const {
    int count = 0;
    for (long i = 0; i < w.size(); ++i)
      if (w[i] > threshold) ++count;
    return count;
  }
};

}  // namespace optdesign
