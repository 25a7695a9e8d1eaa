#include "fpm/optics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fpm/fft.hpp"

namespace fpm {

void IlluminationGeometry::validate() const {
  if (led_pitch_mm <= 0 || led_distance_mm <= 0 || wavelength_um <= 0 ||
      magnification <= 0 || camera_pixel_um <= 0)
    fail_config("geometry: physical quantities must be strictly positive");
  if (numerical_aperture <= 0 || numerical_aperture >= 1)
    fail_config("geometry: numerical aperture must lie in (0, 1)");
  if (grid_half_extent < 0) fail_config("geometry: grid_half_extent must be non-negative");
  if (led_whitelist && led_whitelist->empty())
    fail_config("geometry: led_whitelist, when present, must be non-empty");
}

std::vector<int> MultiplexPlan::used_led_indices() const {
  std::set<int> ids;
  for (const auto& set : sets)
    for (const auto& led : set) ids.insert(led.led_index);
  return {ids.begin(), ids.end()};
}

std::array<double, 2> led_to_freq(int u, int v, const IlluminationGeometry& geom) {
  geom.validate();
  const double x = u * geom.led_pitch_mm;
  const double y = v * geom.led_pitch_mm;
  const double z = geom.led_distance_mm;
  const double hyp = std::sqrt(x * x + y * y + z * z);
  return {x / hyp / geom.wavelength_um, y / hyp / geom.wavelength_um};
}

std::array<int, 2> freq_to_offset(const std::array<double, 2>& xi, int n1, int n2,
                                  double object_pixel_um) {
  // std::round rounds halves away from zero, the documented tie-break.
  return {static_cast<int>(std::round(xi[0] * n1 * object_pixel_um)),
          static_cast<int>(std::round(xi[1] * n2 * object_pixel_um))};
}

Pupil make_ideal_pupil(int m1, int m2, const IlluminationGeometry& geom) {
  geom.validate();
  if (m1 <= 0 || m2 <= 0) fail_invalid("make_ideal_pupil: grid must be positive");
  const double dx = geom.object_pixel_um();
  const double cutoff = geom.cutoff_cycles_per_um();
  // Radius in pixels is cutoff/(Fourier pitch); it must fit inside half the
  // measurement band on both axes.
  if (cutoff * m1 * dx >= m1 / 2.0 || cutoff * m2 * dx >= m2 / 2.0)
    fail_config("pupil exceeds measurement band");

  const int c1 = dc_index(m1), c2 = dc_index(m2);
  const double df1 = 1.0 / (m1 * dx), df2 = 1.0 / (m2 * dx);
  Pupil p;
  p.values = Field2D(m1, m2);
  p.support.assign(static_cast<std::size_t>(m1) * m2, 0);
  for (int a = 0; a < m1; ++a) {
    for (int b = 0; b < m2; ++b) {
      const double f1 = (a - c1) * df1;
      const double f2 = (b - c2) * df2;
      if (std::sqrt(f1 * f1 + f2 * f2) <= cutoff) {
        p.values.at(a, b) = cdouble(1.0, 0.0);
        p.support[static_cast<std::size_t>(a) * m2 + b] = 1;
      }
    }
  }
  return p;
}

namespace {

struct Window {
  int r0, c0;  // top-left corner in the n-grid
};

Window window_or_fail(const std::array<int, 2>& off, int n1, int n2, int m1, int m2) {
  const int r0 = dc_index(n1) + off[0] - dc_index(m1);
  const int c0 = dc_index(n2) + off[1] - dc_index(m2);
  if (r0 < 0 || c0 < 0 || r0 + m1 > n1 || c0 + m2 > n2) {
    std::ostringstream msg;
    msg << "crop window for offset (" << off[0] << ", " << off[1] << ") of size " << m1
        << "x" << m2 << " leaves the " << n1 << "x" << n2 << " grid";
    fail_invalid(msg.str());
  }
  return {r0, c0};
}

}  // namespace

Field2D crop(const Field2D& s, const std::array<int, 2>& off, int m1, int m2) {
  if (m1 <= 0 || m2 <= 0) fail_invalid("crop: window must be positive");
  const Window w = window_or_fail(off, s.rows(), s.cols(), m1, m2);
  Field2D out(m1, m2);
  for (int r = 0; r < m1; ++r)
    for (int c = 0; c < m2; ++c) out.at(r, c) = s.at(w.r0 + r, w.c0 + c);
  return out;
}

Field2D embed(const Field2D& t, const std::array<int, 2>& off, int n1, int n2) {
  if (n1 <= 0 || n2 <= 0) fail_invalid("embed: grid must be positive");
  Field2D out(n1, n2);
  embed_add(out, t, off);
  return out;
}

void embed_add(Field2D& acc, const Field2D& t, const std::array<int, 2>& off) {
  const Window w = window_or_fail(off, acc.rows(), acc.cols(), t.rows(), t.cols());
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c) acc.at(w.r0 + r, w.c0 + c) += t.at(r, c);
}

RealImage2D forward_single(const Field2D& s, const Pupil& pupil,
                           const std::array<int, 2>& off) {
  Field2D band = crop(s, off, pupil.rows(), pupil.cols());
  for (std::size_t i = 0; i < band.size(); ++i) band[i] *= pupil.values[i];
  const Field2D lowres = ifft2(band);
  RealImage2D intensity(pupil.rows(), pupil.cols());
  for (std::size_t i = 0; i < intensity.size(); ++i) intensity[i] = std::norm(lowres[i]);
  return intensity;
}

RealImage2D forward_multiplexed_intensity(const Field2D& s, const Pupil& pupil,
                                          const std::vector<LedOffset>& set) {
  if (set.empty()) fail_invalid("forward_multiplexed: LED set must be non-empty");
  RealImage2D total(pupil.rows(), pupil.cols());
  for (const LedOffset& led : set) {
    const RealImage2D one = forward_single(s, pupil, led.pixel_offset);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += one[i];
  }
  return total;
}

RealImage2D forward_multiplexed(const Field2D& s, const Pupil& pupil,
                                const std::vector<LedOffset>& set) {
  RealImage2D amp = forward_multiplexed_intensity(s, pupil, set);
  for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = std::sqrt(amp[i]);
  return amp;
}

std::vector<std::string> validate_plan(const MultiplexPlan& plan, int n1, int n2,
                                       int m1, int m2) {
  std::vector<std::string> violations;
  auto add = [&violations](const std::string& v) { violations.push_back(v); };

  if (plan.sets.empty()) add("plan has no measurement sets");
  if (m1 >= n1 || m2 >= n2)
    add("measurement band not smaller than reconstruction band (" + std::to_string(m1) +
        "x" + std::to_string(m2) + " vs " + std::to_string(n1) + "x" + std::to_string(n2) +
        ")");

  for (std::size_t k = 0; k < plan.sets.size(); ++k) {
    const auto& set = plan.sets[k];
    if (set.empty()) {
      add("measurement set " + std::to_string(k) + " is empty");
      continue;
    }
    std::set<int> seen;
    for (const LedOffset& led : set) {
      if (!seen.insert(led.led_index).second)
        add("led " + std::to_string(led.led_index) + " appears twice in set " +
            std::to_string(k));
      const int r0 = dc_index(n1) + led.pixel_offset[0] - dc_index(m1);
      const int c0 = dc_index(n2) + led.pixel_offset[1] - dc_index(m2);
      if (r0 < 0 || c0 < 0 || r0 + m1 > n1 || c0 + m2 > n2)
        add("led " + std::to_string(led.led_index) + " in set " + std::to_string(k) +
            ": crop window at offset (" + std::to_string(led.pixel_offset[0]) + ", " +
            std::to_string(led.pixel_offset[1]) + ") leaves the grid");
    }
  }
  return violations;
}

}  // namespace fpm
