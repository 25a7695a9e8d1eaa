#include "fpm/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "fpm/fft.hpp"
#include "fpm/parallel.hpp"

namespace fpm {

namespace {

RealImage2D resample_bilinear(const RealImage2D& src, int n1, int n2) {
  if (src.rows() == n1 && src.cols() == n2) return src;
  RealImage2D out(n1, n2);
  const double sr = static_cast<double>(src.rows()) / n1;
  const double sc = static_cast<double>(src.cols()) / n2;
  for (int r = 0; r < n1; ++r) {
    for (int c = 0; c < n2; ++c) {
      const double x = (r + 0.5) * sr - 0.5;
      const double y = (c + 0.5) * sc - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, src.rows() - 1);
      const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, src.cols() - 1);
      const int x1 = std::min(x0 + 1, src.rows() - 1);
      const int y1 = std::min(y0 + 1, src.cols() - 1);
      const double fx = std::clamp(x - x0, 0.0, 1.0);
      const double fy = std::clamp(y - y0, 0.0, 1.0);
      out.at(r, c) = (1 - fx) * ((1 - fy) * src.at(x0, y0) + fy * src.at(x0, y1)) +
                     fx * ((1 - fy) * src.at(x1, y0) + fy * src.at(x1, y1));
    }
  }
  return out;
}

}  // namespace

Phantom make_phantom(const RealImage2D& amplitude_source, const RealImage2D& phase_source,
                     int n1, int n2, double phase_lo, double phase_hi) {
  if (amplitude_source.empty() || phase_source.empty())
    fail_invalid("make_phantom: empty source image");
  if (!all_finite(amplitude_source) || !all_finite(phase_source))
    fail_invalid("make_phantom: source images must be finite");
  if (!(phase_lo <= phase_hi) || phase_lo < -std::numbers::pi || phase_hi > std::numbers::pi)
    fail_invalid("make_phantom: phase range must be ordered and within [-pi, pi]");

  Phantom ph;
  ph.amplitude = resample_bilinear(amplitude_source, n1, n2);
  for (std::size_t i = 0; i < ph.amplitude.size(); ++i)
    ph.amplitude[i] = std::clamp(ph.amplitude[i], 0.0, 1.0);

  RealImage2D phase_raw = resample_bilinear(phase_source, n1, n2);
  double lo = phase_raw[0], hi = phase_raw[0];
  for (std::size_t i = 0; i < phase_raw.size(); ++i) {
    lo = std::min(lo, phase_raw[i]);
    hi = std::max(hi, phase_raw[i]);
  }
  ph.phase = RealImage2D(n1, n2);
  if (hi > lo) {
    for (std::size_t i = 0; i < phase_raw.size(); ++i) {
      const double u = (phase_raw[i] - lo) / (hi - lo);
      // Convex form so u = 0 and u = 1 land exactly on the bounds.
      ph.phase[i] = phase_lo * (1.0 - u) + phase_hi * u;
    }
  } else {
    const double mid = 0.5 * (phase_lo + phase_hi);
    for (std::size_t i = 0; i < ph.phase.size(); ++i) ph.phase[i] = mid;
  }

  Field2D spatial(n1, n2);
  for (std::size_t i = 0; i < spatial.size(); ++i)
    spatial[i] = std::polar(ph.amplitude[i], ph.phase[i]);
  ph.s_true = fft2(spatial);
  return ph;
}

std::vector<LedOffset> build_led_grid(const IlluminationGeometry& geom, int n1, int n2,
                                      int m1, int m2) {
  geom.validate();
  if (m1 <= 0 || m2 <= 0 || n1 <= 0 || n2 <= 0)
    fail_invalid("build_led_grid: grid sizes must be positive");

  std::vector<std::array<int, 2>> candidates;
  if (geom.led_whitelist) {
    candidates = *geom.led_whitelist;
  } else {
    const int h = geom.grid_half_extent;
    candidates.reserve(static_cast<std::size_t>(2 * h + 1) * (2 * h + 1));
    for (int u = -h; u <= h; ++u)
      for (int v = -h; v <= h; ++v) candidates.push_back({u, v});
  }

  const double dx = geom.object_pixel_um();
  std::vector<LedOffset> retained;
  for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
    const auto [u, v] = candidates[idx];
    LedOffset led;
    led.led_index = static_cast<int>(idx);
    led.freq_cycles_per_um = led_to_freq(u, v, geom);
    led.pixel_offset = freq_to_offset(led.freq_cycles_per_um, m1, m2, dx);
    const int r0 = dc_index(n1) + led.pixel_offset[0] - dc_index(m1);
    const int c0 = dc_index(n2) + led.pixel_offset[1] - dc_index(m2);
    const bool fits = m1 < n1 && m2 < n2 && r0 >= 0 && c0 >= 0 && r0 + m1 <= n1 && c0 + m2 <= n2;
    if (fits) retained.push_back(led);
  }
  if (retained.empty())
    fail_config("build_led_grid: no LED produces a crop window inside the grid");
  return retained;
}

MultiplexPlan make_plan_sequential(const std::vector<LedOffset>& leds) {
  if (leds.empty()) fail_invalid("make_plan_sequential: LED list is empty");
  MultiplexPlan plan;
  plan.sets.reserve(leds.size());
  for (const LedOffset& led : leds) plan.sets.push_back({led});
  return plan;
}

MultiplexPlan make_plan_random(const std::vector<LedOffset>& leds, int group, Rng& rng) {
  if (group <= 0) fail_invalid("make_plan_random: group size must be positive");
  if (leds.empty()) fail_invalid("make_plan_random: LED list is empty");
  if (static_cast<std::size_t>(group) > leds.size())
    fail_invalid("make_plan_random: group size exceeds the number of LEDs");

  std::vector<LedOffset> pool = leds;
  rng.shuffle(pool);
  MultiplexPlan plan;
  for (std::size_t start = 0; start < pool.size(); start += static_cast<std::size_t>(group)) {
    const std::size_t end = std::min(pool.size(), start + static_cast<std::size_t>(group));
    plan.sets.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(start),
                           pool.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return plan;
}

void DatasetManifest::validate() const {
  geometry.validate();
  if (n1 <= 0 || n2 <= 0 || m1 <= 0 || m2 <= 0)
    fail_config("manifest: grid sizes must be positive");
  if (noise.kind == NoiseModel::Kind::gaussian && noise.sigma < 0.0)
    fail_config("manifest: noise sigma must be non-negative");
  if (plan_group < 1) fail_config("manifest: plan group must be at least 1");
  if (has_plan()) {
    const auto violations = validate_plan(plan, n1, n2, m1, m2);
    if (!violations.empty()) fail_config("manifest: invalid plan: " + violations.front());
  }
}

void resolve_plan(DatasetManifest& manifest) {
  if (manifest.has_plan()) return;
  const auto leds =
      build_led_grid(manifest.geometry, manifest.n1, manifest.n2, manifest.m1, manifest.m2);
  if (manifest.plan_type == PlanType::sequential) {
    manifest.plan = make_plan_sequential(leds);
  } else {
    Rng rng(manifest.seed);
    manifest.plan = make_plan_random(leds, manifest.plan_group, rng);
  }
}

MeasurementSet simulate(const Phantom& phantom, const DatasetManifest& manifest) {
  manifest.validate();
  if (!manifest.has_plan()) fail_config("simulate: manifest has no resolved plan");
  if (phantom.s_true.rows() != manifest.n1 || phantom.s_true.cols() != manifest.n2)
    fail_invalid("simulate: phantom does not match the manifest grid");

  MeasurementSet meas;
  meas.plan = manifest.plan;
  meas.pupil = make_ideal_pupil(manifest.m1, manifest.m2, manifest.geometry);

  const std::size_t K = manifest.plan.sets.size();
  std::vector<RealImage2D> intensities(K);
  for_each_index(K, [&](std::size_t k) {
    intensities[k] =
        forward_multiplexed_intensity(phantom.s_true, meas.pupil, manifest.plan.sets[k]);
  });

  // Noise is drawn sequentially in measurement order so the stream is
  // independent of the thread count.
  Rng noise_rng(manifest.seed);
  meas.images.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    RealImage2D& intensity = intensities[k];
    if (manifest.noise.kind == NoiseModel::Kind::gaussian) {
      for (std::size_t i = 0; i < intensity.size(); ++i)
        intensity[i] = std::max(0.0, intensity[i] + manifest.noise.sigma * noise_rng.normal());
    }
    RealImage2D amp(intensity.rows(), intensity.cols());
    for (std::size_t i = 0; i < intensity.size(); ++i) amp[i] = std::sqrt(intensity[i]);
    meas.images.push_back(std::move(amp));
  }
  return meas;
}

DatasetManifest desk_scale_manifest() {
  DatasetManifest m;
  m.geometry = IlluminationGeometry{};  // 4 mm pitch, 77 mm, 514 nm, NA 0.1, 8x, 6.5 um
  m.geometry.grid_half_extent = 1;
  m.n1 = m.n2 = 64;
  m.m1 = m.m2 = 32;
  m.seed = 42;
  m.plan_type = PlanType::sequential;
  return m;
}

}  // namespace fpm
