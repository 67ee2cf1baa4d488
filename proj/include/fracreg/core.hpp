#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace fracreg {

/// Point / displacement in R^N.
template <int N>
using Vec = std::array<double, N>;

// Arithmetic is declared on std::array<double, M> so that deduction works through the alias.
template <std::size_t M>
constexpr std::array<double, M> operator+(const std::array<double, M>& a, const std::array<double, M>& b) {
  std::array<double, M> r{};
  for (std::size_t i = 0; i < M; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t M>
constexpr std::array<double, M> operator-(const std::array<double, M>& a, const std::array<double, M>& b) {
  std::array<double, M> r{};
  for (std::size_t i = 0; i < M; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t M>
constexpr std::array<double, M> operator*(double t, const std::array<double, M>& a) {
  std::array<double, M> r{};
  for (std::size_t i = 0; i < M; ++i) r[i] = t * a[i];
  return r;
}

template <int N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double r = 0.0;
  for (int i = 0; i < N; ++i) r += a[i] * b[i];
  return r;
}

template <int N>
inline double norm(const Vec<N>& a) {
  if constexpr (N == 1) return std::abs(a[0]);
  else return std::hypot(a[0], a[1]);
}

template <int N>
inline double dist(const Vec<N>& a, const Vec<N>& b) {
  return norm<N>(a - b);
}

/// Surface measure |S^{N-1}| of the unit sphere.
template <int N>
constexpr double sphere_measure() {
  if constexpr (N == 1) return 2.0;
  else return 2.0 * std::numbers::pi;
}

/// Lebesgue measure of the unit ball.
template <int N>
constexpr double ball_volume() {
  if constexpr (N == 1) return 2.0;
  else return std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called outside its admissible inputs.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Point outside the region where a geometric map is well defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A geometric construction failed its own post-check.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Arguments are individually fine but mutually inconsistent.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Too few grid nodes to resolve the requested quantity.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap.
class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, double last_residual, long iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  long iterations_;
};

// ---------------------------------------------------------------------------
// Numerics

/// Signed power a^{q} := |a|^{q-1} a, so that signed_pow(a, p-1) = |a|^{p-2} a.
inline double signed_pow(double a, double q) {
  if (a == 0.0) return 0.0;
  const double m = std::pow(std::abs(a), q);
  return a > 0.0 ? m : -m;
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// One named pass/fail verification.
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Version string embedded in every output file.
inline constexpr const char* kVersion = "fracreg 0.3.1";

}  // namespace fracreg
