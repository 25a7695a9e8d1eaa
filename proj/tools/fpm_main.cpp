#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpm/fft.hpp"
#include "fpm/io.hpp"
#include "fpm/objective.hpp"
#include "fpm/phantom.hpp"
#include "fpm/rng.hpp"
#include "fpm/solver.hpp"
#include "fpm/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string measurement_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "y_%03zu.fpmr", k);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Dataset {
  fpm::DatasetManifest manifest;
  fpm::MeasurementSet meas;
};

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.manifest = fpm::read_manifest(dir / "manifest.txt");
  if (!ds.manifest.has_plan())
    fpm::fail_config("dataset manifest has no resolved plan: " + (dir / "manifest.txt").string());
  ds.meas.plan = ds.manifest.plan;
  ds.meas.pupil = fpm::make_ideal_pupil(ds.manifest.m1, ds.manifest.m2, ds.manifest.geometry);
  const std::size_t K = ds.manifest.plan.sets.size();
  ds.meas.images.reserve(K);
  for (std::size_t k = 0; k < K; ++k)
    ds.meas.images.push_back(
        fpm::read_image(dir / measurement_name(k), fpm::ImageKind::measurement));
  ds.meas.validate();
  return ds;
}

struct SimulateArgs {
  std::string manifest_path;
  std::string amplitude_path;
  std::string phase_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_sigma;
};

int cmd_simulate(const SimulateArgs& args) {
  fpm::DatasetManifest manifest = fpm::read_manifest(args.manifest_path);
  if (args.seed) manifest.seed = *args.seed;
  if (args.noise_sigma) {
    if (*args.noise_sigma < 0.0) fpm::fail_invalid("--noise-sigma must be non-negative");
    if (*args.noise_sigma > 0.0)
      manifest.noise = {fpm::NoiseModel::Kind::gaussian, *args.noise_sigma};
    else
      manifest.noise = {};
  }
  fpm::resolve_plan(manifest);
  manifest.validate();

  const fpm::RealImage2D amplitude = fpm::read_image(args.amplitude_path);
  const fpm::RealImage2D phase = fpm::read_image(args.phase_path);
  const fpm::Phantom phantom = fpm::make_phantom(amplitude, phase, manifest.n1, manifest.n2);
  const fpm::MeasurementSet meas = fpm::simulate(phantom, manifest);

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) fpm::fail_io("cannot create output directory '" + args.out_dir + "'");

  const fs::path out(args.out_dir);
  fpm::write_manifest(out / "manifest.txt", manifest);
  fpm::write_field(out / "ground_truth.fpmc", phantom.s_true);
  for (std::size_t k = 0; k < meas.images.size(); ++k)
    fpm::write_image(out / measurement_name(k), meas.images[k], fpm::ImageKind::measurement);

  std::cout << "simulated " << meas.images.size() << " measurements (" << manifest.m1 << "x"
            << manifest.m2 << ") from a " << manifest.n1 << "x" << manifest.n2
            << " ground truth, seed " << manifest.seed << ", noise ";
  if (manifest.noise.kind == fpm::NoiseModel::Kind::none)
    std::cout << "none\n";
  else
    std::cout << "gaussian " << fmt17(manifest.noise.sigma) << "\n";
  return kExitOk;
}

struct ReconstructArgs {
  std::string dataset_dir;
  std::string out_dir;
  std::string algorithm = "awf";
  int iters = 500;
  std::optional<double> step;
  double grad_tol = 0.0;
  double init_amplitude = 1.0;
  double init_phase = 0.0;
};

int cmd_reconstruct(const ReconstructArgs& args) {
  Dataset ds = load_dataset(args.dataset_dir);

  fpm::SolverConfig cfg;
  cfg.max_iters = args.iters;
  cfg.grad_tol = args.grad_tol;
  cfg.record_trace = true;
  if (args.algorithm == "wf")
    cfg.algorithm = fpm::Algorithm::wf;
  else if (args.algorithm == "awf")
    cfg.algorithm = fpm::Algorithm::awf;
  else
    fpm::fail_invalid("--algorithm must be wf or awf");
  if (args.step) {
    if (*args.step <= 0.0) fpm::fail_invalid("--step must be positive");
    cfg.step_override = *args.step;
  }

  const fpm::Field2D s0 = fpm::init_constant(ds.manifest.n1, ds.manifest.n2,
                                             args.init_amplitude, args.init_phase);
  const fpm::SolveResult result = fpm::solve(ds.meas, cfg, s0);

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) fpm::fail_io("cannot create output directory '" + args.out_dir + "'");
  const fs::path out(args.out_dir);

  fpm::write_field(out / "s_hat.fpmc", result.s);
  const fpm::Field2D spatial = fpm::ifft2(result.s);
  fpm::RealImage2D amp(spatial.rows(), spatial.cols());
  fpm::RealImage2D phs(spatial.rows(), spatial.cols());
  for (std::size_t i = 0; i < spatial.size(); ++i) {
    amp[i] = std::abs(spatial[i]);
    phs[i] = std::arg(spatial[i]);
  }
  fpm::write_image(out / "amplitude.fpmr", amp);
  fpm::write_image(out / "phase.fpmr", phs);
  fpm::write_trace_csv(out / "trace.csv", result.trace);

  std::cout << "algorithm=" << args.algorithm << " iterations=" << result.trace.iterations_run
            << " mu=" << fmt17(result.trace.step_size_used)
            << (args.step ? " (manual)" : " (analytical)")
            << " grad_tol=" << fmt17(args.grad_tol)
            << " init_amplitude=" << fmt17(args.init_amplitude)
            << " init_phase=" << fmt17(args.init_phase)
            << " final_cost=" << fmt17(result.trace.costs.back())
            << " final_grad_norm=" << fmt17(result.trace.grad_norms.back()) << "\n";
  return kExitOk;
}

struct CheckGradArgs {
  std::string dataset_dir;
  std::uint64_t seed = 1;
  double h = 1e-6;
  int coords = 64;
  std::string point_path;
  bool corrupt = false;  // test hook: perturb the analytic gradient
};

int cmd_check_grad(const CheckGradArgs& args) {
  Dataset ds = load_dataset(args.dataset_dir);
  const int n1 = ds.manifest.n1, n2 = ds.manifest.n2;

  fpm::Rng rng(args.seed);
  fpm::Field2D s(n1, n2);
  if (!args.point_path.empty()) {
    s = fpm::read_field(args.point_path);
    if (s.rows() != n1 || s.cols() != n2)
      fpm::fail_invalid("--point field does not match the dataset grid");
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = fpm::cdouble(rng.normal(), rng.normal());
  }

  const auto [cost0, grad0] = fpm::cost_and_gradient(s, ds.meas);
  fpm::Field2D grad = grad0;
  if (args.corrupt)
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += 0.1 * (1.0 + std::abs(grad[i]));

  const int total_coords = 2 * n1 * n2;
  const int count = std::min(args.coords, total_coords);
  const std::vector<int> picks = fpm::rng_subset(rng, total_coords, count);

  double scale = 0.0;
  std::vector<double> fd(picks.size()), analytic(picks.size());
  for (std::size_t c = 0; c < picks.size(); ++c) {
    const int coord = picks[c];
    const std::size_t pixel = static_cast<std::size_t>(coord / 2);
    const bool imag_part = (coord % 2) != 0;

    fpm::Field2D probe = s;
    const fpm::cdouble delta = imag_part ? fpm::cdouble(0.0, args.h) : fpm::cdouble(args.h, 0.0);
    probe[pixel] = s[pixel] + delta;
    const double j_plus = fpm::cost(probe, ds.meas);
    probe[pixel] = s[pixel] - delta;
    const double j_minus = fpm::cost(probe, ds.meas);

    fd[c] = (j_plus - j_minus) / (2.0 * args.h);
    analytic[c] = 2.0 * (imag_part ? grad[pixel].imag() : grad[pixel].real());
    scale = std::max({scale, std::abs(fd[c]), std::abs(analytic[c])});
  }

  const double zero_threshold = 1e-7 * (1.0 + std::sqrt(cost0));
  if (scale <= zero_threshold) {
    std::cout << "gradient norm " << fmt17(fpm::norm2(grad)) << " and finite differences below "
              << fmt17(zero_threshold) << "; max relative error = 0\nPASS\n";
    return kExitOk;
  }

  double max_rel = 0.0;
  std::size_t worst = 0;
  for (std::size_t c = 0; c < picks.size(); ++c) {
    const double rel = std::abs(analytic[c] - fd[c]) / scale;
    if (rel > max_rel) {
      max_rel = rel;
      worst = c;
    }
  }

  const int coord = picks[worst];
  std::cout << "max relative error = " << fmt17(max_rel) << " over " << picks.size()
            << " coordinates (h=" << fmt17(args.h) << ")\n";
  if (max_rel <= 1e-5) {
    std::cout << "PASS\n";
    return kExitOk;
  }
  const std::size_t pixel = static_cast<std::size_t>(coord / 2);
  std::cout << "FAIL at pixel (" << pixel / static_cast<std::size_t>(n2) << ", "
            << pixel % static_cast<std::size_t>(n2) << ") "
            << ((coord % 2) ? "imaginary" : "real") << " part: analytic "
            << fmt17(analytic[worst]) << " vs finite difference " << fmt17(fd[worst]) << "\n";
  return kExitCheckFailed;
}

struct OverlapArgs {
  std::string dataset_dir;
  std::string out_path;
};

int cmd_overlap(const OverlapArgs& args) {
  const fpm::DatasetManifest manifest =
      fpm::read_manifest(fs::path(args.dataset_dir) / "manifest.txt");
  if (!manifest.has_plan())
    fpm::fail_config("dataset manifest has no resolved plan");
  const fpm::Pupil pupil = fpm::make_ideal_pupil(manifest.m1, manifest.m2, manifest.geometry);
  const fpm::OverlapMap map =
      fpm::overlap_map(pupil, manifest.plan, manifest.n1, manifest.n2);
  fpm::write_image(args.out_path, map.values);
  std::cout << "max_value=" << fmt17(map.max_value) << " mu=" << fmt17(1.0 / map.max_value)
            << "\n";
  return kExitOk;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Multiplexed Fourier-ptychography simulator and Wirtinger-flow solvers"};
  app.require_subcommand(1);
  // check-grad exposes --h (the finite-difference step), so help stays on
  // --help only.
  app.set_help_flag("--help", "Print help and exit");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic dataset from a manifest and source images");
  simulate->add_option("--manifest", sim.manifest_path, "Manifest file")->required();
  simulate->add_option("--amplitude", sim.amplitude_path, "Amplitude source image (FPMR)")
      ->required();
  simulate->add_option("--phase", sim.phase_path, "Phase source image (FPMR)")->required();
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Override the manifest seed");
  simulate->add_option("--noise-sigma", sim.noise_sigma,
                       "Gaussian intensity noise level (0 disables noise)");

  ReconstructArgs rec;
  CLI::App* reconstruct =
      app.add_subcommand("reconstruct", "Recover the sample field from a dataset");
  reconstruct->add_option("--dataset", rec.dataset_dir, "Dataset directory")->required();
  reconstruct->add_option("--out", rec.out_dir, "Output directory")->required();
  reconstruct->add_option("--algorithm", rec.algorithm, "wf or awf (default awf)");
  reconstruct->add_option("--iters", rec.iters, "Iteration count (default 500)");
  reconstruct->add_option("--step", rec.step, "Manual step size (default: analytical)");
  reconstruct->add_option("--grad-tol", rec.grad_tol, "Early stop on gradient norm");
  reconstruct->add_option("--init-amplitude", rec.init_amplitude,
                          "Constant start amplitude (default 1)");
  reconstruct->add_option("--init-phase", rec.init_phase, "Constant start phase (default 0)");

  CheckGradArgs chk;
  CLI::App* check =
      app.add_subcommand("check-grad", "Compare the gradient against finite differences");
  check->set_help_flag("--help", "Print help and exit");
  check->add_option("--dataset", chk.dataset_dir, "Dataset directory")->required();
  check->add_option("--seed", chk.seed, "Seed for the test point and coordinates");
  check->add_option("--h", chk.h, "Finite-difference step (default 1e-6)");
  check->add_option("--coords", chk.coords, "Number of coordinates to test (default 64)");
  check->add_option("--point", chk.point_path, "Evaluate at this field instead of a random one");
  check->add_flag("--corrupt-gradient", chk.corrupt, "")->group("");  // negative-control hook

  OverlapArgs ovl;
  CLI::App* overlap =
      app.add_subcommand("overlap", "Write the Fourier redundancy map and report the step size");
  overlap->add_option("--dataset", ovl.dataset_dir, "Dataset directory")->required();
  overlap->add_option("--out", ovl.out_path, "Output FPMR path")->required();

  CLI::App* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (simulate->parsed()) return cmd_simulate(sim);
  if (reconstruct->parsed()) return cmd_reconstruct(rec);
  if (check->parsed()) return cmd_check_grad(chk);
  if (overlap->parsed()) return cmd_overlap(ovl);
  if (version->parsed()) {
    std::cout << "fpm " << fpm::kVersion << "\n";
    return kExitOk;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const fpm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case fpm::ErrorKind::io:
        return kExitIo;
      case fpm::ErrorKind::invalid_argument:
      case fpm::ErrorKind::config:
      case fpm::ErrorKind::numeric:
        return kExitConfig;
    }
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
