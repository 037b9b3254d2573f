// Fundamental pair of solutions for the radial equation
//
//     y'' + (n-1)/r y' - (lambda/r^2 + q(r)) y = 0,   0 < r < infinity,
//
// with lambda >= 0 and q >= 0.  The equation has a distinguished increasing
// solution V and a distinguished decreasing solution W; both are normalised
// to V(1) = W(1) = 1.  Near the origin V behaves like r^{mu_plus}, where
// mu_plus is the nonnegative root of mu(mu + n - 2) = lambda, and W is
// recovered from V through the reduction-of-order integral
//
//     W(r) = V(r) * Integral_r^inf t^{1-n} V(t)^{-2} dt   (up to scale).
//
// Everything is computed on the logarithmic axis t = ln r.  Writing
// z = ln y and u = dz/dt turns the linear equation into the Riccati form
//
//     u' = lambda + s(t) - u^2 - (n-2) u,        s(t) = r^2 q(r),
//
// whose increasing branch is forward-attracting: integrating from a small
// radius with the frozen-coefficient value u = mu_plus locks onto V without
// any shooting.  The reduction integral is accumulated in log scale, which
// keeps the pair usable far beyond the range where y itself overflows.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "conefield/common.hpp"
#include "conefield/potential.hpp"

namespace conefield {

// Dimension and angular separation constant of the radial equation.
struct RadialIndex {
  int n = 3;           // ambient dimension (>= 1; cones use n >= 2)
  double lambda = 0.0; // separation constant (>= 0)

  void validate() const;

  // Indicial exponents: roots of mu(mu + n - 2) = lambda.
  double gap() const;       // chi  = mu_plus - mu_minus = sqrt((n-2)^2 + 4 lambda)
  double mu_plus() const;   // ((2-n) + chi)/2
  double mu_minus() const;  // ((2-n) - chi)/2
};

struct SolveOptions {
  double r_min = 1e-3;   // must satisfy r_min < 1
  double r_max = 1e3;    // must satisfy r_max > 1
  double eps = 1e-10;    // accuracy request for the pair
  // Starting slope for d(ln y)/d(ln r) at r_min.  Defaults to mu_plus; the
  // tube geometry overrides it with 0 to select the even solution of a
  // one-dimensional base.
  std::optional<double> start_exponent;
};

// One solution stored as nodes of (t, z, u, u') with t = ln r, z = ln y,
// u = dz/dt.  Since u' = z'' is part of the stored data (it is the Riccati
// right-hand side at the node), z is interpolated by a quintic Hermite
// polynomial per interval and the slope accessor is its exact derivative, so
// evaluation never re-touches the differential equation and value/slope stay
// mutually consistent.
class LogCurve {
 public:
  LogCurve() = default;
  LogCurve(std::vector<double> t, std::vector<double> z, std::vector<double> u,
           std::vector<double> du);

  double t_front() const { return t_.front(); }
  double t_back() const { return t_.back(); }
  std::size_t size() const { return t_.size(); }
  const std::vector<double>& nodes() const { return t_; }

  double log_value(double t) const;  // z(t)
  double log_slope(double t) const;  // u(t) = d ln y / d ln r

  // Convenience accessors in the original variable r.
  double value(double r) const { return std::exp(log_value(std::log(r))); }
  double derivative(double r) const {
    double t = std::log(r);
    return std::exp(log_value(t)) * log_slope(t) / r;
  }

 private:
  std::size_t locate(double t) const;
  std::vector<double> t_, z_, u_, du_;
};

// The normalised increasing/decreasing pair for one radial index.
class RadialPair {
 public:
  RadialPair(RadialIndex index, RadialPotential q, LogCurve v, LogCurve w,
             double log_wronskian, double r_min, double r_max,
             bool start_uncertified);

  const RadialIndex& index() const { return index_; }
  const RadialPotential& potential() const { return q_; }
  const LogCurve& increasing() const { return v_; }
  const LogCurve& decreasing() const { return w_; }

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }

  // Wronskian r^{n-1} (V' W - W' V) evaluated at r = 1; by construction it
  // is constant in r.  Always >= gap(), with equality exactly for q = 0.
  double wronskian() const { return std::exp(log_wronskian_); }
  double log_wronskian() const { return log_wronskian_; }

  // True when the starting-radius smallness test could not be certified and
  // the pair was built from the user-supplied r_min anyway.
  bool start_uncertified() const { return start_uncertified_; }

  // Evaluation helpers with range checking against [r_min, r_max].
  double v(double r) const { return std::exp(log_v(r)); }
  double w(double r) const { return std::exp(log_w(r)); }
  double log_v(double r) const;
  double log_w(double r) const;
  double dlog_v(double r) const;  // d ln V / d ln r
  double dlog_w(double r) const;

 private:
  void check_range(double r) const;

  RadialIndex index_;
  RadialPotential q_;
  LogCurve v_, w_;
  double log_wronskian_;
  double r_min_, r_max_;
  bool start_uncertified_;
};

// Build the normalised pair.  Throws
//   PreconditionError  for invalid index/range/eps,
//   ConstructionError  when the potential cannot be integrated on the range,
//   AccuracyError      when the reduction-integral tail cannot be certified
//                      below eps even after extending the range internally.
RadialPair solve_pair(const RadialIndex& index, const RadialPotential& q,
                      const SolveOptions& options = {});

// Two-point kernel of the reduced one-dimensional problem,
//
//   Q(r, rho) = rho^{n-1} * V(min(r,rho)) * W(max(r,rho)) / wronskian.
//
// Note the rho^{n-1} prefactor always uses the second argument, so Q is not
// symmetric; it is the kernel against the measure d(rho) of the reduced
// problem.
double ordered_kernel(const RadialPair& pair, double r, double rho);

// Independent construction of the increasing solution by Picard iteration of
// the integral equation
//
//   y(r) = r^{mu_plus} + Integral_0^r C(r,s) q(s) y(s) ds,
//   C(r,s) = (s/chi) [ (r/s)^{mu_plus} - (r/s)^{mu_minus} ],
//
// (with the confluent kernel s (r/s)^{(2-n)/2} ln(r/s) when chi = 0).  This
// deliberately shares no code with solve_pair; the two constructions act as
// cross-checks on one another.  The returned curve is NOT normalised: it has
// the exact r^{mu_plus} behaviour at the origin.
struct IntegralCurve {
  std::vector<double> r;
  std::vector<double> y;
  std::vector<double> dy;     // dy/dr at the nodes
  int iterations = 0;

  double value(double r_query) const;      // cubic Hermite in log-log form
  double value_at_one() const { return value(1.0); }
};

IntegralCurve integral_equation_solution(const RadialIndex& index,
                                         const RadialPotential& q,
                                         double r_max,
                                         std::size_t nodes = 4097,
                                         double tol = 1e-12,
                                         int max_iterations = 64);

}  // namespace conefield
