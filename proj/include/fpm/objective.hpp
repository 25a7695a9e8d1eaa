#pragma once

#include <utility>
#include <vector>

#include "fpm/field.hpp"
#include "fpm/optics.hpp"

namespace fpm {

/// The K amplitude images y_k together with the plan and pupil that
/// produced them.
struct MeasurementSet {
  std::vector<RealImage2D> images;
  MultiplexPlan plan;
  Pupil pupil;

  std::size_t num_measurements() const { return images.size(); }
  /// Shape and non-negativity checks; throws invalid_argument.
  void validate() const;
};

/// Pixel-wise redundancy of the Fourier sampling: sum over every (set, LED)
/// pair of the embedded |pupil|^2. With an ideal pupil the entries count how
/// many crop windows cover each pixel.
struct OverlapMap {
  RealImage2D values;
  double max_value = 0.0;
};

/// Amplitude-based data misfit: sum_k || y_k - sqrt(sum_i |ifft2(pupil .*
/// crop(s, off_i))|^2) ||_2^2.
double cost(const Field2D& s, const MeasurementSet& meas);

/// Generalized Wirtinger gradient of cost (the d/d-conjugate derivative, no
/// factor 2), so that s - mu * gradient(s) is the plain descent update.
/// Where a set's combined amplitude is exactly zero the phase quotient is
/// taken as 0, a valid selection at the non-differentiable point.
Field2D gradient(const Field2D& s, const MeasurementSet& meas);

/// Both values from one pass; the cost comes free while forming the
/// gradient's residuals.
std::pair<double, Field2D> cost_and_gradient(const Field2D& s, const MeasurementSet& meas);

/// Redundancy map over the n1 x n2 reconstruction grid. Each (set, LED)
/// pair contributes once; an LED shared by several sets counts every time.
OverlapMap overlap_map(const Pupil& pupil, const MultiplexPlan& plan, int n1, int n2);

/// Tuning-free step size: 1 over the spectral norm of the summed band
/// operator, which equals 1 over the peak of the overlap map.
double step_size(const Pupil& pupil, const MultiplexPlan& plan, int n1, int n2);

}  // namespace fpm
