// Shared error types, numeric helpers, and a small worker pool used across
// the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace conefield {

// ---------------------------------------------------------------------------
// Error hierarchy.  Every failure the library can diagnose is reported as a
// subclass of Error so callers can distinguish "the request was malformed"
// from "the computation could not reach the requested accuracy".
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input violates a documented precondition (bad dimension, empty range, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A requested evaluation point lies outside the region an object covers.
class RangeError : public Error {
 public:
  using Error::Error;
};

// An object could not be built at all (e.g. a quadrature of the data blew up).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// The computation finished but could not certify the requested tolerance.
// `achieved` carries the bound that was actually reached.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// An iteration failed to converge within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The data does not belong to the regime an algorithm is valid for
// (wrong growth class, evaluation too close to a kernel diagonal, ...).
class RegimeError : public Error {
 public:
  using Error::Error;
};

// A perturbation-series smallness condition failed, so the expansion is
// not trustworthy.
class SmallnessError : public Error {
 public:
  using Error::Error;
};

// A finite-difference step degenerated (underflow against the geometry).
class StepSizeError : public Error {
 public:
  using Error::Error;
};

// The combination of options is recognised but deliberately not handled.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Constants and small helpers.
// ---------------------------------------------------------------------------

inline constexpr double kPi = 3.1415926535897932384626433832795028841971693993751;

// Surface area of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(int n);

// Normalising constant that converts the operator density of a potential's
// mass into the unit point mass: 2*pi in the plane, (n-2)*|S^{n-1}| for n>=3.
double fundamental_constant(int n);

// max - min of a sample set; used for "flatness over a window" diagnostics.
double oscillation(const std::vector<double>& values);

// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

// Relative difference |a-b| / max(|a|, |b|, floor).
double rel_diff(double a, double b, double floor = 1e-300);

inline double sqr(double x) { return x * x; }

// Uniform grid of `count` points covering [lo, hi] inclusive (count >= 2).
std::vector<double> linspace(double lo, double hi, std::size_t count);

// Log-uniform grid of `count` points covering [lo, hi] inclusive (lo > 0).
std::vector<double> logspace(double lo, double hi, std::size_t count);

// ---------------------------------------------------------------------------
// Worker pool.  The thread count is capped by the CONEFIELD_THREADS
// environment variable; results must be written to per-index slots so the
// outcome is independent of the schedule.
// ---------------------------------------------------------------------------

unsigned worker_count();

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace conefield
