// Acceptance suite: one line per criterion, nonzero exit when any fails.
// The CLI-driven criteria receive the binary path as --cli=PATH.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fpm/fft.hpp"
#include "fpm/io.hpp"
#include "fpm/objective.hpp"
#include "fpm/optics.hpp"
#include "fpm/phantom.hpp"
#include "fpm/rng.hpp"
#include "fpm/solver.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace fpm;
namespace fs = std::filesystem;

namespace {

std::string g_cli;

// Recovery threshold for the end-to-end criterion, frozen from the
// committed reference run of this exact configuration (observed error
// 6.9e-7; the bound leaves roughly a 7x cushion for FFT rounding drift
// across platforms).
constexpr double kEndToEndTau = 5e-6;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail.str(what);
    } else if (!cond) {
      detail << "; " << what;
    }
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- criterion 1: gradient vs central finite differences -------------------

void criterion_gradient_fd(Check& check) {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));
    const int n = 6 + static_cast<int>(rng.below(11));  // 6..16
    const int m = n / 2;
    const Pupil pupil = support::pixel_pupil(m, m, m / 3.0);
    const MultiplexPlan plan = support::random_plan(rng, n, n, m, m,
                                                    2 + static_cast<int>(rng.below(5)), 3);
    const Field2D s_true = support::random_field(rng, n, n);
    const MeasurementSet meas = support::make_measurements(s_true, pupil, plan);

    // Test point with every combined amplitude bounded away from zero.
    Field2D s = support::random_field(rng, n, n);
    for (int attempt = 0; attempt < 10; ++attempt) {
      double min_amp = 1e300;
      for (const auto& set : plan.sets) {
        const RealImage2D amp = forward_multiplexed(s, pupil, set);
        for (std::size_t i = 0; i < amp.size(); ++i) min_amp = std::min(min_amp, amp[i]);
      }
      if (min_amp > 1e-6) break;
      s = support::random_field(rng, n, n);
    }

    const auto [j0, grad] = cost_and_gradient(s, meas);
    (void)j0;
    const int total = 2 * n * n;
    const std::vector<int> coords = rng_subset(rng, total, std::min(64, total));

    const double h = 1e-6;
    double scale = 0.0;
    std::vector<double> fd(coords.size()), an(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const std::size_t pixel = static_cast<std::size_t>(coords[c] / 2);
      const bool imag_part = (coords[c] % 2) != 0;
      Field2D probe = s;
      const cdouble delta = imag_part ? cdouble(0.0, h) : cdouble(h, 0.0);
      probe[pixel] = s[pixel] + delta;
      const double j_plus = cost(probe, meas);
      probe[pixel] = s[pixel] - delta;
      const double j_minus = cost(probe, meas);
      fd[c] = (j_plus - j_minus) / (2.0 * h);
      an[c] = 2.0 * (imag_part ? grad[pixel].imag() : grad[pixel].real());
      scale = std::max({scale, std::abs(fd[c]), std::abs(an[c])});
    }
    for (std::size_t c = 0; c < coords.size(); ++c)
      worst = std::max(worst, std::abs(an[c] - fd[c]) / scale);
  }
  check.require(worst <= 1e-5, "max relative error " + std::to_string(worst));
  check.detail << "max rel err " << worst << " over 20 instances";
}

// --- criterion 2: FFT forward vs dense-matrix forward ----------------------

void criterion_forward_oracle(Check& check) {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(2000 + static_cast<std::uint64_t>(trial));
    const int n = 10 + static_cast<int>(rng.below(7));  // 10..16
    const int m = n / 2;
    const Pupil pupil = support::pixel_pupil(m, m, m / 2.5);
    const MultiplexPlan plan = support::random_plan(rng, n, n, m, m,
                                                    2 + static_cast<int>(rng.below(5)), 4);
    const Field2D s = support::random_field(rng, n, n);
    for (const auto& set : plan.sets) {
      const RealImage2D fast = forward_multiplexed(s, pupil, set);
      const RealImage2D dense = oracles::dense_forward_multiplexed(s, pupil, set);
      double peak = 0.0;
      for (std::size_t i = 0; i < dense.size(); ++i) peak = std::max(peak, dense[i]);
      for (std::size_t i = 0; i < fast.size(); ++i)
        worst = std::max(worst, std::abs(fast[i] - dense[i]) / std::max(1.0, peak));
    }
  }
  check.require(worst <= 1e-10, "max deviation " + std::to_string(worst));
  check.detail << "max relative deviation " << worst << " over 10 plans";
}

// --- criterion 3: step-size identity ----------------------------------------

void criterion_step_identity(Check& check) {
  double worst = 0.0;
  auto run_case = [&](const Pupil& pupil, const MultiplexPlan& plan, int n) {
    const double mu = step_size(pupil, plan, n, n);
    const OverlapMap map = overlap_map(pupil, plan, n, n);
    check.require(mu == 1.0 / map.max_value, "step size is not 1/overlap-peak");

    const oracles::CMat op = oracles::dense_band_operator(pupil, plan, n, n);
    const double lambda = oracles::diagonal_spectral_norm(op);
    check.require(lambda > 0.0, "dense band operator is not diagonal");
    worst = std::max(worst, std::abs(1.0 / mu - lambda) / lambda);
  };

  for (int trial = 0; trial < 4; ++trial) {
    Rng rng(3000 + static_cast<std::uint64_t>(trial));
    const int n = 12 + static_cast<int>(rng.below(5));
    const int m = n / 2;
    run_case(support::pixel_pupil(m, m, m / 2.5),
             support::random_plan(rng, n, n, m, m, 5, 3), n);
  }

  // An LED reused across two measurements: the union-based count differs
  // from the multiplicity count, and the operator norm follows multiplicity.
  const Pupil pupil = support::pixel_pupil(6, 6, 2.0);
  MultiplexPlan dup;
  dup.sets = {{LedOffset{3, {0, 0}, {1, 1}}}, {LedOffset{3, {0, 0}, {1, 1}}}};
  run_case(pupil, dup, 14);
  MultiplexPlan once;
  once.sets = {{LedOffset{3, {0, 0}, {1, 1}}}};
  const double union_peak = overlap_map(pupil, once, 14, 14).max_value;
  const double mult_peak = overlap_map(pupil, dup, 14, 14).max_value;
  check.require(mult_peak == 2.0 * union_peak,
                "duplicated LED does not double the redundancy peak");

  check.require(worst <= 1e-10, "eigenvalue deviation " + std::to_string(worst));
  check.detail << "max eigenvalue deviation " << worst;
}

// --- criteria 4/5 share the 32x32 instances ---------------------------------

struct RunPair {
  SolverTrace wf;
  SolverTrace awf;
};

MeasurementSet instance_32(std::uint64_t seed, Field2D* s_true_out) {
  Rng rng(seed);
  const Pupil pupil = support::pixel_pupil(16, 16, 4.0);
  std::vector<LedOffset> leds;
  int id = 0;
  for (int u = -1; u <= 1; ++u)
    for (int v = -1; v <= 1; ++v) leds.push_back({id++, {0.0, 0.0}, {3 * u, 3 * v}});
  const MultiplexPlan plan =
      (seed % 2 == 0) ? make_plan_sequential(leds) : make_plan_random(leds, 4, rng);

  const RealImage2D amp = support::smooth_image(rng, 32, 32, 2, 0.55, 0.95);
  const RealImage2D phs = support::smooth_image(rng, 32, 32, 2, -0.8, 0.8);
  const Phantom phantom = make_phantom(amp, phs, 32, 32, -0.8, 0.8);
  if (s_true_out) *s_true_out = phantom.s_true;
  return support::make_measurements(phantom.s_true, pupil, plan);
}

void criterion_gradient_bound(Check& check) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MeasurementSet meas = instance_32(4000 + seed, nullptr);
    SolverConfig cfg;
    cfg.max_iters = 300;
    cfg.algorithm = Algorithm::wf;
    const SolveResult result = solve(meas, cfg, init_constant(32, 32, 1.0, 0.0));

    for (std::size_t t = 0; t + 1 < result.trace.costs.size(); ++t)
      check.require(result.trace.costs[t + 1] <=
                        result.trace.costs[t] + 1e-10 * (1.0 + result.trace.costs[t]),
                    "cost increased at seed " + std::to_string(seed) + " step " +
                        std::to_string(t));

    const GradientBoundReport report =
        gradient_bound_check(result.trace, result.trace.step_size_used);
    check.require(report.bound_holds,
                  "min-gradient bound violated at seed " + std::to_string(seed));
  }
  check.detail << "10 seeds, T=300, monotone and bounded";
}

void criterion_acceleration(Check& check) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MeasurementSet meas = instance_32(5000 + seed, nullptr);
    const Field2D s0 = init_constant(32, 32, 1.0, 0.0);
    SolverConfig cfg;
    cfg.max_iters = 100;
    cfg.algorithm = Algorithm::wf;
    const SolveResult wf = solve(meas, cfg, s0);
    cfg.algorithm = Algorithm::awf;
    cfg.step_override = wf.trace.step_size_used;  // identical step for the pair
    const SolveResult awf = solve(meas, cfg, s0);
    if (awf.trace.costs.back() < wf.trace.costs.back()) ++wins;
  }
  check.require(wins >= 9, "acceleration won only " + std::to_string(wins) + "/10 seeds");
  check.detail << "acceleration reached a lower cost in " << wins << "/10 paired runs";
}

// --- criterion 6: end-to-end recovery ---------------------------------------

void criterion_end_to_end(Check& check) {
  DatasetManifest manifest;
  manifest.geometry = support::scaled_geometry(32, 9.0, 6.0, 2);
  manifest.n1 = manifest.n2 = 64;
  manifest.m1 = manifest.m2 = 32;
  manifest.seed = 20260809;
  manifest.plan_type = PlanType::random;
  manifest.plan_group = 4;
  resolve_plan(manifest);
  manifest.validate();

  // Band-limited scene: compose a smooth transmission and cut its spectrum
  // to a disk well inside the sampled region, so the measurements determine
  // the full reconstruction grid.
  Rng rng(manifest.seed);
  const RealImage2D amp_src = support::smooth_image(rng, 64, 64, 3, 0.55, 0.95);
  const RealImage2D phs_src = support::smooth_image(rng, 64, 64, 3, -0.7, 0.7);
  Field2D u(64, 64);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::polar(amp_src[i], phs_src[i]);
  Field2D spectrum = fft2(u);
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      const double d1 = r - 32, d2 = c - 32;
      if (std::sqrt(d1 * d1 + d2 * d2) > 15.0) spectrum.at(r, c) = cdouble(0.0, 0.0);
    }
  const Field2D u_lp = ifft2(spectrum);
  RealImage2D amp(64, 64), phs(64, 64);
  double amp_peak = 0.0;
  for (std::size_t i = 0; i < u_lp.size(); ++i) amp_peak = std::max(amp_peak, std::abs(u_lp[i]));
  double phs_lo = 1e300, phs_hi = -1e300;
  for (std::size_t i = 0; i < u_lp.size(); ++i) {
    amp[i] = 0.95 * std::abs(u_lp[i]) / amp_peak;
    phs[i] = std::arg(u_lp[i]);
    phs_lo = std::min(phs_lo, phs[i]);
    phs_hi = std::max(phs_hi, phs[i]);
  }
  const Phantom phantom = make_phantom(amp, phs, 64, 64, phs_lo, phs_hi);
  const MeasurementSet meas = simulate(phantom, manifest);

  SolverConfig cfg;
  cfg.max_iters = 2000;
  cfg.algorithm = Algorithm::awf;
  cfg.record_trace = false;
  const SolveResult result = solve(meas, cfg, init_constant(64, 64, 1.0, 0.0));
  const double err = relative_error_mod_phase(result.s, phantom.s_true);
  check.require(err <= kEndToEndTau,
                "recovery error " + std::to_string(err) + " above the committed threshold");
  check.detail << "relative error mod phase " << err << " (threshold " << kEndToEndTau << ")";
}

// --- criterion 7: scaled acquisition protocol through the CLI ---------------

void criterion_cli_protocol(Check& check) {
  support::TempDir dir("acc-protocol");

  DatasetManifest manifest;  // stock values: 4 mm, 77 mm, 514 nm, NA 0.1, 8x, 6.5 um
  manifest.geometry.grid_half_extent = 2;
  manifest.n1 = manifest.n2 = 48;
  manifest.m1 = manifest.m2 = 24;
  manifest.seed = 7;
  write_manifest(dir.path() / "manifest.txt", manifest);

  Rng rng(7);
  write_image(dir.path() / "amplitude.fpmr", support::smooth_image(rng, 48, 48, 2, 0.5, 1.0));
  write_image(dir.path() / "phase.fpmr", support::smooth_image(rng, 48, 48, 2, 0.0, 1.0));

  const fs::path data = dir.path() / "data";
  const auto sim = support::run_cli(
      g_cli,
      {"simulate", "--manifest", (dir.path() / "manifest.txt").string(), "--amplitude",
       (dir.path() / "amplitude.fpmr").string(), "--phase",
       (dir.path() / "phase.fpmr").string(), "--out", data.string()},
      dir.path());
  check.require(sim.exit_code == 0, "simulate failed: " + sim.output);
  if (!check.ok) return;

  auto reconstruct = [&](const std::string& algo, const fs::path& out) {
    return support::run_cli(g_cli,
                            {"reconstruct", "--dataset", data.string(), "--algorithm", algo,
                             "--iters", "300", "--out", out.string()},
                            dir.path());
  };
  const auto wf = reconstruct("wf", dir.path() / "wf");
  const auto awf = reconstruct("awf", dir.path() / "awf");
  check.require(wf.exit_code == 0, "wf reconstruct failed: " + wf.output);
  check.require(awf.exit_code == 0, "awf reconstruct failed: " + awf.output);
  if (!check.ok) return;

  const auto wf_rows = support::read_trace_csv(dir.path() / "wf" / "trace.csv");
  const auto awf_rows = support::read_trace_csv(dir.path() / "awf" / "trace.csv");
  check.require(wf_rows.size() == 301 && awf_rows.size() == 301, "unexpected trace length");

  for (std::size_t t = 0; t + 1 < wf_rows.size(); ++t)
    check.require(wf_rows[t + 1].cost <= wf_rows[t].cost + 1e-10 * (1.0 + wf_rows[t].cost),
                  "descent trace is not monotone at step " + std::to_string(t));

  // "Crossing below": the accelerated trace drops under the plain one and
  // reaches a 1e-6 relative cost level in strictly fewer iterations. (At
  // this reduced scale both runs eventually bottom out near machine
  // precision, so final-cost comparisons would only measure floor jitter.)
  bool crossed = false;
  for (std::size_t t = 0; t < wf_rows.size(); ++t)
    if (awf_rows[t].cost < wf_rows[t].cost) crossed = true;
  check.require(crossed, "accelerated trace never crosses below the plain trace");

  const double level = 1e-6 * wf_rows[0].cost;
  auto first_below = [level](const std::vector<support::TraceRow>& rows) {
    for (std::size_t t = 0; t < rows.size(); ++t)
      if (rows[t].cost <= level) return static_cast<long>(t);
    return static_cast<long>(rows.size());
  };
  const long t_wf = first_below(wf_rows);
  const long t_awf = first_below(awf_rows);
  check.require(t_awf < t_wf, "accelerated run was not faster to the 1e-6 level (" +
                                  std::to_string(t_awf) + " vs " + std::to_string(t_wf) +
                                  " iterations)");
  check.detail << "monotone descent; 1e-6 relative cost after " << t_awf
               << " accelerated vs " << t_wf << " plain iterations";
}

// --- criterion 8: bit-exact formats and deterministic runs ------------------

void criterion_determinism(Check& check) {
  support::TempDir dir("acc-determinism");

  // Binary and manifest round-trips are bitwise lossless.
  Rng rng(17);
  const Field2D f = support::random_field(rng, 9, 5);
  write_field(dir.path() / "f.fpmc", f);
  const Field2D f_back = read_field(dir.path() / "f.fpmc");
  for (std::size_t i = 0; i < f.size(); ++i)
    check.require(std::memcmp(&f_back[i], &f[i], sizeof(cdouble)) == 0,
                  "field round-trip changed a payload bit");

  const RealImage2D img = support::random_image(rng, 6, 8, 0.0, 2.0);
  write_image(dir.path() / "i.fpmr", img);
  const RealImage2D img_back = read_image(dir.path() / "i.fpmr");
  for (std::size_t i = 0; i < img.size(); ++i)
    check.require(std::memcmp(&img_back[i], &img[i], sizeof(double)) == 0,
                  "image round-trip changed a payload bit");

  DatasetManifest manifest = desk_scale_manifest();
  manifest.plan_type = PlanType::random;
  manifest.plan_group = 4;
  manifest.noise = {NoiseModel::Kind::gaussian, 0.001};
  resolve_plan(manifest);
  write_manifest(dir.path() / "m.txt", manifest);
  write_manifest(dir.path() / "m2.txt", read_manifest(dir.path() / "m.txt"));
  check.require(support::files_equal(dir.path() / "m.txt", dir.path() / "m2.txt"),
                "manifest round-trip is not byte-stable");

  // Two identical seeded CLI pipelines produce identical bytes throughout.
  DatasetManifest tpl = desk_scale_manifest();
  tpl.noise = {NoiseModel::Kind::gaussian, 0.002};
  write_manifest(dir.path() / "manifest.txt", tpl);
  Rng scene(23);
  write_image(dir.path() / "amplitude.fpmr", support::smooth_image(scene, 64, 64, 3, 0.4, 1.0));
  write_image(dir.path() / "phase.fpmr", support::smooth_image(scene, 64, 64, 3, 0.0, 1.0));

  for (const char* run : {"one", "two"}) {
    const fs::path data = dir.path() / run;
    const auto sim = support::run_cli(
        g_cli,
        {"simulate", "--manifest", (dir.path() / "manifest.txt").string(), "--amplitude",
         (dir.path() / "amplitude.fpmr").string(), "--phase",
         (dir.path() / "phase.fpmr").string(), "--out", data.string(), "--seed", "99"},
        dir.path());
    check.require(sim.exit_code == 0, "simulate failed");
    const auto rec = support::run_cli(
        g_cli,
        {"reconstruct", "--dataset", data.string(), "--algorithm", "awf", "--iters", "25",
         "--out", (data / "rec").string()},
        dir.path());
    check.require(rec.exit_code == 0, "reconstruct failed");
  }
  if (!check.ok) return;

  for (const auto& entry : fs::recursive_directory_iterator(dir.path() / "one")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir.path() / "one");
    check.require(support::files_equal(entry.path(), dir.path() / "two" / rel),
                  "files differ between identical runs: " + rel.string());
  }
  check.detail << "round-trips bitwise; two seeded pipelines byte-identical";
}

struct Criterion {
  std::string name;
  double time_limit_s;
  std::function<void(Check&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--cli=", 0) == 0) g_cli = arg.substr(6);
  }
  if (g_cli.empty()) {
    std::cerr << "missing --cli=PATH argument\n";
    return 1;
  }

  const std::vector<Criterion> criteria = {
      {"gradient matches central finite differences", 10.0, criterion_gradient_fd},
      {"forward model equals the dense-matrix oracle", 5.0, criterion_forward_oracle},
      {"step size equals the overlap peak and the operator norm", 60.0,
       criterion_step_identity},
      {"descent is monotone and satisfies the min-gradient bound", 60.0,
       criterion_gradient_bound},
      {"acceleration reaches lower costs on paired runs", 120.0, criterion_acceleration},
      {"end-to-end recovery from multiplexed data", 300.0, criterion_end_to_end},
      {"scaled acquisition protocol through the CLI", 300.0, criterion_cli_protocol},
      {"bit-exact formats and deterministic runs", 120.0, criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].fn(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(start);
    if (elapsed > criteria[i].time_limit_s)
      check.require(false, "exceeded the " + std::to_string(criteria[i].time_limit_s) +
                               " s budget");
    const bool pass = check.ok;
    failures += pass ? 0 : 1;
    std::printf("[%s] %zu. %s — %s (%.2f s)\n", pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), check.detail.str().c_str(), elapsed);
  }
  return failures;
}
