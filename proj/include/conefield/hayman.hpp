// Sparsity diagnostics for Riesz masses of cone potentials.
//
// The classical way to decide whether a family of balls B(x_j, r_j) is
// negligible from the origin is the view sum  sum (r_j/|x_j|)^{n-1}: the
// total solid angle the balls subtend.  Under the operator -Laplace + q the
// natural replacement weighs each ball by the radial solution pair instead,
//
//     sum_j (r_j/|x_j|) V(|x_j|/r_j) W(|x_j|/r_j),
//
// which coincides with the classical sum when q = 0 (there V(rho) = 1 and
// W(rho) = rho^{2-n} for the bottom angular index) and is smaller otherwise:
// a positive potential dampens W faster than V grows, so families that look
// fat classically can be thin for the perturbed operator.
//
// Around that sum this header provides:
//   * q_view_partial_sums / classical_view_partial_sums - partial sums of
//     the two view series with a convergence verdict fitted from the tail;
//   * normal_point_test - a pointwise smallness test for a measure: x is
//     (epsilon, q)-normal when mu(B(x, lambda)) stays below
//     epsilon (lambda/|x|) V(|x|/lambda) W(|x|/lambda) for every ball that
//     does not reach halfway to the origin;
//   * decay_bound_check - at normal points the Green potential
//     U(x) = -green_potential(x) obeys U <= b epsilon r^{2-n}/W(delta r);
//     the check fits the smallest such constant over a set of test points;
//   * log_length_refinement - for rapidly growing potentials the stronger
//     comparison r^{2-n}/(W(delta r) V(k delta r)) -> 0 holds outside a set
//     of finite logarithmic length; the op measures the ratio on a grid and
//     reports where it failed to decrease, with the log length of that set.
#pragma once

#include <cstddef>
#include <vector>

#include "conefield/carleman.hpp"
#include "conefield/cone_green.hpp"
#include "conefield/radial_ode.hpp"

namespace conefield {

// One ball of a family: a center strictly away from the origin and a radius
// small enough that the ball does not swallow the origin.
struct FamilyBall {
  ConePoint center;
  double radius = 0.0;
};

// Ordered list of balls B(x_j, r_j) with |x_j| > 0 and 0 < r_j < |x_j|.
// View sums depend on the centers only through their distances |x_j|; the
// full cone coordinates are kept so covering arguments can use the family
// geometrically.
class BallFamily {
 public:
  void add_ball(const ConePoint& center, double radius);
  const std::vector<FamilyBall>& balls() const { return balls_; }
  std::size_t size() const { return balls_.size(); }

 private:
  std::vector<FamilyBall> balls_;
};

// Centers at distance j (j = 1..count) along the ray at polar angle theta,
// radii j^{radius_exponent} with radius_exponent < 1 so radii stay below
// distances from j = 2 on (j = 1 is skipped when the radius would not).
BallFamily lattice_ball_family(std::size_t count, double radius_exponent,
                               double theta = 0.0, double azimuth = 0.0);

// Partial sums of a view series together with a tail-fitted verdict.
struct ViewSumReport {
  std::vector<double> terms;         // term_1 .. term_J, all positive
  std::vector<double> partial_sums;  // S_1 .. S_J
  // Least-squares slope of log(term) against log(j) over the trailing half
  // of the terms; a p-series comparison turns it into the verdict below.
  double decay_exponent = 0.0;
  bool finite = false;
  // Integral-comparison estimate of the remainder past J when finite,
  // +infinity otherwise.
  double tail_estimate = 0.0;
};

// Weighted view sum  sum_{j<=J} (r_j/|x_j|) V(rho_j) W(rho_j) with
// rho_j = |x_j|/r_j.  Every rho_j must lie inside the pair's solved range
// (RangeError otherwise).  The verdict compares the fitted decay exponent
// against the p-series threshold -1.
ViewSumReport q_view_partial_sums(const BallFamily& family,
                                  const RadialPair& pair, std::size_t count);

// Classical solid-angle view sum  sum_{j<=J} (r_j/|x_j|)^{n-1}, same
// reporting and verdict mechanics.
ViewSumReport classical_view_partial_sums(const BallFamily& family, int n,
                                          std::size_t count);

// Outcome of the pointwise smallness test at x: the ratio
//   mu(B(x, lambda)) / [ (lambda/|x|) V(|x|/lambda) W(|x|/lambda) ]
// evaluated on a grid of ball radii lambda in (0, |x|/2).  The point is
// normal at level epsilon when every ratio stays strictly below epsilon.
struct NormalityReport {
  ConePoint point;
  double epsilon = 0.0;
  std::vector<double> lambdas;
  std::vector<double> ratios;  // nonnegative, one per lambda
  double worst_lambda = 0.0;   // lambda attaining the largest ratio
  double worst_ratio = 0.0;
  bool normal = false;
};

// Evaluates the smallness ratio at every grid radius.  The grid must be a
// nonempty subset of (0, |x|/2); the measure's dimension must match the
// pair's.  Radii with |x|/lambda outside the pair's solved range raise
// RangeError; density components overlapping a tested ball are not
// supported (the underlying ball mass is atom-only).
NormalityReport normal_point_test(const ConePoint& x, const ConeMeasure& mu,
                                  double epsilon, const RadialPair& pair,
                                  const std::vector<double>& lambda_grid);

// Fitted decay bound at a set of test points.
struct DecayBoundReport {
  double delta = 0.0;
  double epsilon = 0.0;
  double constant = 0.0;  // smallest b with U <= b epsilon r^{2-n}/W(delta r)
  std::vector<ConePoint> points;
  std::vector<double> values;   // U at each point
  std::vector<double> bounds;   // constant * epsilon * r^{2-n}/W(delta r)
  std::vector<double> margins;  // bound - value, >= 0, zero at the argmax
};

// Fits the smallest constant b = b(delta) such that the potential magnitude
// U(x) = -green_potential(mu, evaluator, x) satisfies
//   U(x) <= b * epsilon * r^{2-n} / W(delta r)       (r = |x|)
// at every test point.  Preconditions enforced here:
//   * delta > 1, epsilon > 0, at least one test point;
//   * mu has finite near and far weighted masses (the two-sided condition
//     checked by blaschke_integrals at split radius 1);
//   * every test point passes normal_point_test at level epsilon, screened
//     on a fixed 25-node logarithmic grid of ball radii spanning 2%..49%
//     of the point's distance; a failing point is named in the
//     PreconditionError.
// delta * r must stay inside the pair's solved range (RangeError).
DecayBoundReport decay_bound_check(const GreenEvaluator& evaluator,
                                   const ConeMeasure& mu,
                                   const RadialPair& pair, double delta,
                                   double epsilon,
                                   const std::vector<ConePoint>& test_points);

// Comparison curve for the sharpened decay ratio.
struct LogLengthReport {
  std::vector<double> radii;
  std::vector<double> ratios;      // r^{2-n} / (W(delta r) V(k delta r))
  std::vector<double> log_ratios;  // natural logs (stable when ratio
                                   // underflows to zero)
  // Grid steps where the ratio failed to decrease: index i is flagged when
  // log_ratio[i] >= log_ratio[i-1].
  std::vector<std::size_t> exceptional;
  double log_length = 0.0;  // sum of log(r_i / r_{i-1}) over flagged steps
  // True when the final ratio sits at the running minimum and at least two
  // decades below the curve's peak.
  bool vanishing = false;
};

// Measures the ratio r^{2-n}/(W(delta r) V(k delta r)) along an increasing
// radius grid.  Requires k > delta > 1 and a potential with s(r) = r^2 q(r)
// increasing without bound (hinted, or verified numerically when the hint
// is unspecified); potentials with a finite scaled-profile limit raise
// RegimeError since the ratio need not vanish for them.  The largest grid
// radius times k * delta must stay inside the pair's range (RangeError).
LogLengthReport log_length_refinement(const RadialPair& pair, double delta,
                                      double k,
                                      const std::vector<double>& r_grid);

}  // namespace conefield
