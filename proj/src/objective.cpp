#include "fpm/objective.hpp"

#include <cmath>

#include "fpm/fft.hpp"
#include "fpm/parallel.hpp"

namespace fpm {

void MeasurementSet::validate() const {
  if (images.empty()) fail_invalid("measurement set: no images");
  if (images.size() != plan.sets.size())
    fail_invalid("measurement set: " + std::to_string(images.size()) + " images for " +
                 std::to_string(plan.sets.size()) + " plan sets");
  for (std::size_t k = 0; k < images.size(); ++k) {
    const RealImage2D& y = images[k];
    if (y.rows() != pupil.rows() || y.cols() != pupil.cols())
      fail_invalid("measurement " + std::to_string(k) + ": image shape does not match pupil");
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!std::isfinite(y[i]) || y[i] < 0.0)
        fail_invalid("measurement " + std::to_string(k) +
                     ": entries must be finite and non-negative");
  }
}

namespace {

// Shared per-set pipeline. Computes the per-LED low-resolution fields
// a_i = ifft2(pupil .* crop(s, off_i)), the combined amplitude
// g = sqrt(sum_i |a_i|^2) and the squared residual ||y - g||^2. When
// want_backprops is set it also forms the per-LED band-space terms
// conj(pupil) .* fft2(e_i) with e_i = (g - y) .* a_i / g (0 where g is 0),
// ready to be embedded back into the reconstruction grid.
struct SetWork {
  double cost_term = 0.0;
  std::vector<Field2D> backprops;  // one per LED in the set, pupil-shaped
};

SetWork process_set(const Field2D& s, const Pupil& pupil, const RealImage2D& y,
                    const std::vector<LedOffset>& set, bool want_backprops) {
  const int m1 = pupil.rows(), m2 = pupil.cols();
  const std::size_t npix = static_cast<std::size_t>(m1) * m2;

  std::vector<Field2D> lowres;
  lowres.reserve(set.size());
  for (const LedOffset& led : set) {
    Field2D band = crop(s, led.pixel_offset, m1, m2);
    for (std::size_t i = 0; i < npix; ++i) band[i] *= pupil.values[i];
    lowres.push_back(ifft2(band));
  }

  std::vector<double> amp(npix);
  for (std::size_t i = 0; i < npix; ++i) {
    double acc = 0.0;
    for (const Field2D& a : lowres) acc += std::norm(a[i]);
    amp[i] = std::sqrt(acc);
  }

  SetWork work;
  for (std::size_t i = 0; i < npix; ++i) {
    const double r = y[i] - amp[i];
    work.cost_term += r * r;
  }

  if (want_backprops) {
    work.backprops.reserve(set.size());
    for (const Field2D& a : lowres) {
      Field2D e(m1, m2);
      for (std::size_t i = 0; i < npix; ++i) {
        const double g = amp[i];
        e[i] = (g == 0.0) ? cdouble(0.0, 0.0) : (g - y[i]) * (a[i] / g);
      }
      Field2D band = fft2(e);
      for (std::size_t i = 0; i < npix; ++i) band[i] *= std::conj(pupil.values[i]);
      work.backprops.push_back(std::move(band));
    }
  }
  return work;
}

std::pair<double, Field2D> evaluate(const Field2D& s, const MeasurementSet& meas,
                                    bool want_gradient) {
  meas.validate();
  const std::size_t K = meas.plan.sets.size();
  std::vector<SetWork> work(K);
  for_each_index(K, [&](std::size_t k) {
    work[k] = process_set(s, meas.pupil, meas.images[k], meas.plan.sets[k], want_gradient);
  });

  // Fixed accumulation order (k ascending, then LED order within the set)
  // keeps results bitwise identical run to run regardless of thread count.
  double total = 0.0;
  Field2D grad;
  if (want_gradient) grad = Field2D(s.rows(), s.cols());
  for (std::size_t k = 0; k < K; ++k) {
    total += work[k].cost_term;
    if (want_gradient)
      for (std::size_t i = 0; i < work[k].backprops.size(); ++i)
        embed_add(grad, work[k].backprops[i], meas.plan.sets[k][i].pixel_offset);
  }
  return {total, std::move(grad)};
}

}  // namespace

double cost(const Field2D& s, const MeasurementSet& meas) {
  return evaluate(s, meas, false).first;
}

Field2D gradient(const Field2D& s, const MeasurementSet& meas) {
  return evaluate(s, meas, true).second;
}

std::pair<double, Field2D> cost_and_gradient(const Field2D& s, const MeasurementSet& meas) {
  return evaluate(s, meas, true);
}

OverlapMap overlap_map(const Pupil& pupil, const MultiplexPlan& plan, int n1, int n2) {
  const int m1 = pupil.rows(), m2 = pupil.cols();
  OverlapMap map;
  map.values = RealImage2D(n1, n2);
  for (const auto& set : plan.sets) {
    for (const LedOffset& led : set) {
      const int r0 = dc_index(n1) + led.pixel_offset[0] - dc_index(m1);
      const int c0 = dc_index(n2) + led.pixel_offset[1] - dc_index(m2);
      if (r0 < 0 || c0 < 0 || r0 + m1 > n1 || c0 + m2 > n2)
        fail_invalid("overlap_map: plan not validated, led " + std::to_string(led.led_index) +
                     " window leaves the grid");
      for (int r = 0; r < m1; ++r)
        for (int c = 0; c < m2; ++c)
          map.values.at(r0 + r, c0 + c) += std::norm(pupil.values.at(r, c));
    }
  }
  map.max_value = 0.0;
  for (std::size_t i = 0; i < map.values.size(); ++i)
    map.max_value = std::max(map.max_value, map.values[i]);
  return map;
}

double step_size(const Pupil& pupil, const MultiplexPlan& plan, int n1, int n2) {
  const OverlapMap map = overlap_map(pupil, plan, n1, n2);
  if (map.max_value <= 0.0)
    fail_config("step_size: degenerate configuration, pupil has no energy in any band");
  return 1.0 / map.max_value;
}

}  // namespace fpm
