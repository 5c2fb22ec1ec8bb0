#pragma once

// Basic value types shared by every clipstab module: dense vectors, a row-major
// matrix and the library's exception hierarchy.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <string>
#include <vector>

namespace clipstab {

using Vector = std::vector<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, dimension or parameter. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative numeric routine failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Pair strategy incompatible with the signal set.
class StrategyError : public Error {
 public:
  using Error::Error;
};

/// Degenerate input (zero pair distance, zero aggregate, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Dense row-major matrix. Rows are measurement vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  /// Row-major values.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) throw ConfigError("Matrix: value count does not match shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline double norm1(std::span<const double> a) noexcept {
  double acc = 0.0;
  for (double x : a) acc += std::abs(x);
  return acc;
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scaled(std::span<const double> a, double factor) {
  Vector out(a.begin(), a.end());
  for (double& x : out) x *= factor;
  return out;
}

/// Normalizes in place; returns the original norm (0 leaves the vector untouched).
inline double normalize(std::span<double> a) noexcept {
  const double r = norm2(a);
  if (r > 0.0)
    for (double& x : a) x /= r;
  return r;
}

/// y = X x, evaluated row by row in fixed order.
inline Vector multiply(const Matrix& x, std::span<const double> v) {
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = dot(x.row(i), v);
  return out;
}

inline void require_dimension(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ConfigError(std::string(what) + ": dimension mismatch (got " + std::to_string(got) + ", expected " +
                      std::to_string(want) + ")");
}

}  // namespace clipstab
