#pragma once

#include <optional>
#include <vector>

#include "fpm/field.hpp"
#include "fpm/objective.hpp"

namespace fpm {

enum class Algorithm { wf, awf };

struct SolverConfig {
  int max_iters = 500;
  std::optional<double> step_override;  // manual step size for comparison runs
  double grad_tol = 0.0;                // early stop on ||gradient||
  bool record_trace = true;
  Algorithm algorithm = Algorithm::wf;
};

/// Per-iteration history. costs and grad_norms carry one entry per visited
/// iterate, including the starting point, so both have iterations_run + 1
/// entries.
struct SolverTrace {
  std::vector<double> costs;
  std::vector<double> grad_norms;
  double step_size_used = 0.0;
  int iterations_run = 0;
};

/// Iterate state shared by both algorithms. For plain descent only s and
/// iter change; the accelerated variant also carries the auxiliary point v
/// and the momentum scalar q (q >= 1, strictly increasing).
struct SolverState {
  Field2D s;
  Field2D v;
  double q = 1.0;
  int iter = 0;
};

/// Fourier-domain variable of a spatially constant start image
/// amplitude * exp(j*phase): a single DC spike of magnitude
/// amplitude * sqrt(n1*n2).
Field2D init_constant(int n1, int n2, double amplitude, double phase);

/// One plain descent update s <- s - mu * gradient(s); v and q untouched.
SolverState wf_step(SolverState state, const MeasurementSet& meas, double mu);

/// One accelerated update:
///   v+ = s - mu * gradient(s)
///   q+ = 1/2 + sqrt(1 + 4 q^2) / 2
///   s+ = v+ + ((q - 1)/q+) (v+ - v)
SolverState awf_step(SolverState state, const MeasurementSet& meas, double mu);

struct SolveResult {
  Field2D s;
  SolverTrace trace;
};

/// Runs the configured algorithm from s0 until max_iters or until the
/// gradient norm drops to grad_tol. The step size is step_override when
/// given, otherwise the analytical 1/overlap-max value.
SolveResult solve(const MeasurementSet& meas, const SolverConfig& cfg, const Field2D& s0);

/// Empirical check of the stationarity guarantee for plain descent with the
/// analytical step: min over visited iterates of ||gradient||^2 against
/// costs[0] / (mu * T), using 0 as the (always valid) optimal-cost lower
/// bound.
struct GradientBoundReport {
  bool bound_holds = false;
  double min_grad_sq = 0.0;
  double bound_value = 0.0;
};

GradientBoundReport gradient_bound_check(const SolverTrace& trace, double mu);

}  // namespace fpm
