#include "fpm/solver.hpp"

#include <cmath>
#include <string>
#include <tuple>

namespace fpm {

Field2D init_constant(int n1, int n2, double amplitude, double phase) {
  if (amplitude < 0.0 || !std::isfinite(amplitude) || !std::isfinite(phase))
    fail_invalid("init_constant: amplitude must be finite and non-negative");
  Field2D s(n1, n2);
  if (amplitude > 0.0) {
    const double mag = amplitude * std::sqrt(static_cast<double>(n1) * n2);
    s.at(dc_index(n1), dc_index(n2)) = std::polar(mag, phase);
  }
  return s;
}

namespace {

void require_finite(const Field2D& f, const char* what, int iter) {
  if (!all_finite(f))
    fail_numeric(std::string(what) + " became non-finite at iteration " + std::to_string(iter));
}

void apply_wf(SolverState& state, const Field2D& grad, double mu) {
  for (std::size_t i = 0; i < state.s.size(); ++i) state.s[i] -= mu * grad[i];
  ++state.iter;
}

void apply_awf(SolverState& state, const Field2D& grad, double mu) {
  Field2D v_next = state.s;
  for (std::size_t i = 0; i < v_next.size(); ++i) v_next[i] -= mu * grad[i];

  const double q_next = 0.5 + 0.5 * std::sqrt(1.0 + 4.0 * state.q * state.q);
  const double coef = (state.q - 1.0) / q_next;

  if (coef != 0.0) {
    Field2D s_next = v_next;
    for (std::size_t i = 0; i < s_next.size(); ++i)
      s_next[i] += coef * (v_next[i] - state.v[i]);
    state.s = std::move(s_next);
  } else {
    state.s = v_next;
  }
  state.v = std::move(v_next);
  state.q = q_next;
  ++state.iter;
}

}  // namespace

SolverState wf_step(SolverState state, const MeasurementSet& meas, double mu) {
  if (mu <= 0.0) fail_invalid("wf_step: step size must be positive");
  const Field2D grad = gradient(state.s, meas);
  require_finite(grad, "gradient", state.iter);
  apply_wf(state, grad, mu);
  return state;
}

SolverState awf_step(SolverState state, const MeasurementSet& meas, double mu) {
  if (mu <= 0.0) fail_invalid("awf_step: step size must be positive");
  if (state.q < 1.0) fail_invalid("awf_step: momentum scalar must be >= 1");
  const Field2D grad = gradient(state.s, meas);
  require_finite(grad, "gradient", state.iter);
  apply_awf(state, grad, mu);
  require_finite(state.s, "iterate", state.iter);
  return state;
}

SolveResult solve(const MeasurementSet& meas, const SolverConfig& cfg, const Field2D& s0) {
  if (cfg.max_iters < 1) fail_invalid("solve: max_iters must be at least 1");
  if (cfg.grad_tol < 0.0) fail_invalid("solve: grad_tol must be non-negative");
  if (cfg.step_override && *cfg.step_override <= 0.0)
    fail_invalid("solve: step override must be positive");
  meas.validate();

  const double mu = cfg.step_override
                        ? *cfg.step_override
                        : step_size(meas.pupil, meas.plan, s0.rows(), s0.cols());

  SolverState state{s0, s0, 1.0, 0};
  SolverTrace trace;
  trace.step_size_used = mu;

  auto [J, grad] = cost_and_gradient(state.s, meas);
  double grad_norm = norm2(grad);
  if (cfg.record_trace) {
    trace.costs.push_back(J);
    trace.grad_norms.push_back(grad_norm);
  }

  while (state.iter < cfg.max_iters && grad_norm > cfg.grad_tol) {
    require_finite(grad, "gradient", state.iter);
    if (cfg.algorithm == Algorithm::wf)
      apply_wf(state, grad, mu);
    else
      apply_awf(state, grad, mu);
    require_finite(state.s, "iterate", state.iter);

    std::tie(J, grad) = cost_and_gradient(state.s, meas);
    grad_norm = norm2(grad);
    if (cfg.record_trace) {
      trace.costs.push_back(J);
      trace.grad_norms.push_back(grad_norm);
    }
  }

  trace.iterations_run = state.iter;
  return {std::move(state.s), std::move(trace)};
}

GradientBoundReport gradient_bound_check(const SolverTrace& trace, double mu) {
  if (trace.grad_norms.empty() || trace.costs.empty())
    fail_invalid("gradient_bound_check: trace is empty");
  if (mu <= 0.0) fail_invalid("gradient_bound_check: step size must be positive");

  // The guarantee covers the T iterates the steps were taken from; the
  // final point only enters when no step was taken at all.
  const int t_eff = std::max(trace.iterations_run, 1);
  const std::size_t limit =
      std::min(trace.grad_norms.size(), static_cast<std::size_t>(t_eff));

  GradientBoundReport report;
  report.min_grad_sq = trace.grad_norms[0] * trace.grad_norms[0];
  for (std::size_t t = 1; t < limit; ++t)
    report.min_grad_sq = std::min(report.min_grad_sq, trace.grad_norms[t] * trace.grad_norms[t]);
  report.bound_value = trace.costs[0] / (mu * t_eff);
  report.bound_holds = report.min_grad_sq <= report.bound_value;
  return report;
}

}  // namespace fpm
