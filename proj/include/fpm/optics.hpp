#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpm/field.hpp"

namespace fpm {

/// LED-array microscope geometry. Lengths carry their unit in the field
/// name; LEDs sit on a square grid indexed (u, v) in [-h, h]^2 unless a
/// whitelist restricts the board layout.
struct IlluminationGeometry {
  double led_pitch_mm = 4.0;
  double led_distance_mm = 77.0;
  double wavelength_um = 0.514;
  double numerical_aperture = 0.1;
  double magnification = 8.0;
  double camera_pixel_um = 6.5;
  int grid_half_extent = 1;
  std::optional<std::vector<std::array<int, 2>>> led_whitelist;

  /// Camera pixel referred to the object plane.
  double object_pixel_um() const { return camera_pixel_um / magnification; }

  /// Coherent cutoff NA/lambda in cycles/um.
  double cutoff_cycles_per_um() const { return numerical_aperture / wavelength_um; }

  /// Positivity and NA < 1; throws a config error on violation.
  void validate() const;
};

/// One LED's illumination expressed in the Fourier plane: the continuous
/// spatial-frequency shift it induces and that shift snapped to integer
/// pixels of the measurement-band Fourier grid.
struct LedOffset {
  int led_index = 0;
  std::array<double, 2> freq_cycles_per_um{0.0, 0.0};
  std::array<int, 2> pixel_offset{0, 0};
};

/// Complex transfer function of the objective over the measurement band
/// (centered frequency convention), with its binary NA support.
struct Pupil {
  Field2D values;
  std::vector<std::uint8_t> support;  // row-major, 1 inside the NA disk

  int rows() const { return values.rows(); }
  int cols() const { return values.cols(); }
};

/// The K LED index sets lit together, one set per captured image.
struct MultiplexPlan {
  std::vector<std::vector<LedOffset>> sets;

  std::size_t num_measurements() const { return sets.size(); }
  /// Distinct led_index values used anywhere in the plan, ascending.
  std::vector<int> used_led_indices() const;
};

/// Transverse spatial-frequency shift (cycles/um) induced by LED (u, v):
/// (1/lambda) times the transverse direction cosines of the illumination
/// axis through the LED at (u*pitch, v*pitch, distance).
std::array<double, 2> led_to_freq(int u, int v, const IlluminationGeometry& geom);

/// Snaps a continuous frequency to integer pixels of a grid whose Fourier
/// pitch is 1/(n*object_pixel_um) per axis: round(xi * n * object_pixel_um)
/// componentwise, halves rounding away from zero.
std::array<int, 2> freq_to_offset(const std::array<double, 2>& xi, int n1, int n2,
                                  double object_pixel_um);

/// Binary circular pupil: 1 where the pixel frequency magnitude is within
/// NA/lambda (closed disk), 0 outside.
Pupil make_ideal_pupil(int m1, int m2, const IlluminationGeometry& geom);

/// Contiguous m1 x m2 submatrix of the centered spectrum s, window centered
/// at DC + off. The window must lie fully inside s.
Field2D crop(const Field2D& s, const std::array<int, 2>& off, int m1, int m2);

/// Adjoint of crop: places t in the window centered at DC + off of an
/// otherwise zero n1 x n2 field.
Field2D embed(const Field2D& t, const std::array<int, 2>& off, int n1, int n2);

/// Adds t into the window of acc centered at DC + off (acc shaped n1 x n2).
void embed_add(Field2D& acc, const Field2D& t, const std::array<int, 2>& off);

/// Low-resolution intensity recorded when a single LED with Fourier offset
/// off is lit: |ifft2(pupil .* crop(s, off))|^2.
RealImage2D forward_single(const Field2D& s, const Pupil& pupil,
                           const std::array<int, 2>& off);

/// Total intensity of a multiplexed acquisition: the incoherent sum of the
/// per-LED intensities.
RealImage2D forward_multiplexed_intensity(const Field2D& s, const Pupil& pupil,
                                          const std::vector<LedOffset>& set);

/// Amplitude measurement sqrt(sum of per-LED intensities), entrywise.
RealImage2D forward_multiplexed(const Field2D& s, const Pupil& pupil,
                                const std::vector<LedOffset>& set);

/// Checks every crop window in every set against the reconstruction grid
/// and the m < n band relationship. Returns human-readable violations
/// (empty means the plan is usable).
std::vector<std::string> validate_plan(const MultiplexPlan& plan, int n1, int n2,
                                       int m1, int m2);

}  // namespace fpm
