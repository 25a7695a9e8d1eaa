#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "fpm/field.hpp"
#include "fpm/objective.hpp"
#include "fpm/optics.hpp"
#include "fpm/rng.hpp"

namespace fpm {

/// Synthetic ground truth: amplitude in [0,1], phase in [-pi, pi], and the
/// Fourier-domain variable s_true = fft2(amplitude * exp(j*phase)).
struct Phantom {
  RealImage2D amplitude;
  RealImage2D phase;
  Field2D s_true;
};

/// Builds a phantom from arbitrary source images: sources are resampled to
/// n1 x n2 (bilinear), amplitude clipped to [0,1], phase affinely mapped so
/// the source extremes land exactly on [phase_lo, phase_hi] (a constant
/// source maps to the midpoint).
Phantom make_phantom(const RealImage2D& amplitude_source, const RealImage2D& phase_source,
                     int n1, int n2, double phase_lo = -std::numbers::pi / 2,
                     double phase_hi = std::numbers::pi / 2);

/// Enumerates the LED grid (whitelist if present, else (u,v) in [-h,h]^2 in
/// row-major order), computes each LED's Fourier offset on the measurement
/// band, and keeps the LEDs whose crop window fits the reconstruction grid.
std::vector<LedOffset> build_led_grid(const IlluminationGeometry& geom, int n1, int n2,
                                      int m1, int m2);

/// One singleton measurement per LED, order preserved.
MultiplexPlan make_plan_sequential(const std::vector<LedOffset>& leds);

/// Shuffles the LEDs and partitions them into ceil(#LEDs/group) sets; every
/// LED is used exactly once and the last set may be smaller.
MultiplexPlan make_plan_random(const std::vector<LedOffset>& leds, int group, Rng& rng);

enum class PlanType { sequential, random };

struct NoiseModel {
  enum class Kind { none, gaussian };
  Kind kind = Kind::none;
  double sigma = 0.0;
};

/// Everything needed to reproduce a dataset: geometry, grid sizes, the plan
/// request, the resolved plan (possibly empty for a template), the seed and
/// the noise model.
struct DatasetManifest {
  IlluminationGeometry geometry;
  int n1 = 0, n2 = 0;
  int m1 = 0, m2 = 0;
  std::uint64_t seed = 0;
  NoiseModel noise;
  PlanType plan_type = PlanType::sequential;
  int plan_group = 1;
  MultiplexPlan plan;

  bool has_plan() const { return !plan.sets.empty(); }
  /// Geometry, grid sizes and (when resolved) the plan; throws config.
  void validate() const;
};

/// Fills in manifest.plan from geometry + plan_type when it is empty.
void resolve_plan(DatasetManifest& manifest);

/// Forms the K amplitude measurements of the phantom under the manifest's
/// plan. Gaussian noise, when configured, is added to the intensity before
/// the square root and clamped at zero; the noise stream is seeded from the
/// manifest.
MeasurementSet simulate(const Phantom& phantom, const DatasetManifest& manifest);

/// Small deterministic configuration used by tests and examples: 64x64
/// reconstruction from 32x32 measurements on a 3x3 LED grid, sequential
/// plan, no noise.
DatasetManifest desk_scale_manifest();

}  // namespace fpm
