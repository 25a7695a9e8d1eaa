#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "fpm/error.hpp"

namespace fpm {

using cdouble = std::complex<double>;

/// Index of the DC (zero-frequency) pixel on an axis of length n.
/// All frequency-domain arrays in this library are centered: the DC
/// sample of an n-point axis sits at floor(n/2).
constexpr int dc_index(int n) { return n / 2; }

/// Dense complex 2-D array, double precision, row-major.
class Field2D {
public:
  Field2D() = default;

  Field2D(int rows, int cols, cdouble fill = cdouble(0.0, 0.0))
      : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) fail_invalid("Field2D: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  static Field2D from_data(int rows, int cols, std::vector<cdouble> data) {
    if (rows <= 0 || cols <= 0) fail_invalid("Field2D: dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(rows) * cols)
      fail_invalid("Field2D: data length does not match rows*cols");
    Field2D f;
    f.rows_ = rows;
    f.cols_ = cols;
    f.data_ = std::move(data);
    return f;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cdouble& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const cdouble& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  cdouble& operator[](std::size_t i) { return data_[i]; }
  const cdouble& operator[](std::size_t i) const { return data_[i]; }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }

  bool same_shape(const Field2D& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<cdouble> data_;
};

/// Dense real 2-D array, double precision, row-major.
class RealImage2D {
public:
  RealImage2D() = default;

  RealImage2D(int rows, int cols, double fill = 0.0) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) fail_invalid("RealImage2D: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  static RealImage2D from_data(int rows, int cols, std::vector<double> data) {
    if (rows <= 0 || cols <= 0) fail_invalid("RealImage2D: dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(rows) * cols)
      fail_invalid("RealImage2D: data length does not match rows*cols");
    RealImage2D f;
    f.rows_ = rows;
    f.cols_ = cols;
    f.data_ = std::move(data);
    return f;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const double& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const RealImage2D& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline double norm2(const Field2D& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::norm(f[i]);
  return std::sqrt(acc);
}

inline double norm2(const RealImage2D& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * f[i];
  return std::sqrt(acc);
}

/// Inner product sum_i a_i * conj(b_i).
inline cdouble dot(const Field2D& a, const Field2D& b) {
  if (!a.same_shape(b)) fail_invalid("dot: shape mismatch");
  cdouble acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc;
}

inline bool all_finite(const Field2D& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) return false;
  return true;
}

inline bool all_finite(const RealImage2D& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) return false;
  return true;
}

}  // namespace fpm
