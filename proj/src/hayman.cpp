#include "conefield/hayman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "conefield/common.hpp"

namespace conefield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Least-squares slope of log(term) against log(1-based index) over the
// trailing half of the terms, then the p-series comparison: the series is
// read as convergent when the fitted exponent sits clearly below -1.  The
// 1e-6 guard keeps interpolation-level noise from flipping families whose
// terms are exactly harmonic.
void fit_tail_verdict(ViewSumReport& report) {
  const std::size_t count = report.terms.size();
  if (count < 2) {
    report.decay_exponent = 0.0;
    report.finite = false;
    report.tail_estimate = kInf;
    return;
  }
  const std::size_t begin = std::min(count / 2, count - 2);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, m = 0.0;
  for (std::size_t i = begin; i < count; ++i) {
    const double t = std::log(static_cast<double>(i + 1));
    const double y = std::log(report.terms[i]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    m += 1.0;
  }
  const double slope = (m * sty - st * sy) / (m * stt - st * st);
  report.decay_exponent = slope;
  report.finite = slope < -1.0 - 1e-6;
  if (report.finite) {
    report.tail_estimate =
        report.terms.back() * static_cast<double>(count) / (-slope - 1.0);
  } else {
    report.tail_estimate = kInf;
  }
}

ViewSumReport sum_terms(const BallFamily& family, std::size_t count,
                        const std::function<double(const FamilyBall&)>& term) {
  if (count == 0) {
    throw PreconditionError("view sums need at least one term");
  }
  if (count > family.size()) {
    throw PreconditionError("view sum over " + std::to_string(count) +
                            " terms, but the family holds only " +
                            std::to_string(family.size()) + " balls");
  }
  ViewSumReport report;
  report.terms.reserve(count);
  report.partial_sums.reserve(count);
  double running = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double value = term(family.balls()[j]);
    if (!std::isfinite(value) || value <= 0.0) {
      throw ConstructionError("view term " + std::to_string(j + 1) +
                              " is not a positive finite number");
    }
    running += value;
    report.terms.push_back(value);
    report.partial_sums.push_back(running);
  }
  fit_tail_verdict(report);
  return report;
}

std::string describe_point(const ConePoint& x) {
  std::ostringstream out;
  out << "(r=" << x.r << ", theta=" << x.theta << ", azimuth=" << x.azimuth
      << ")";
  return out.str();
}

}  // namespace

void BallFamily::add_ball(const ConePoint& center, double radius) {
  if (!(center.r > 0.0) || !std::isfinite(center.r)) {
    throw PreconditionError("ball centers must sit away from the origin");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw PreconditionError("ball radii must be positive and finite");
  }
  if (!(radius < center.r)) {
    throw PreconditionError(
        "ball radius must stay strictly below the center distance");
  }
  balls_.push_back(FamilyBall{center, radius});
}

BallFamily lattice_ball_family(std::size_t count, double radius_exponent,
                               double theta, double azimuth) {
  if (count == 0) {
    throw PreconditionError("ball family needs at least one ball");
  }
  if (!(radius_exponent < 1.0)) {
    throw PreconditionError(
        "radius exponent must stay below 1 so radii lag the distances");
  }
  BallFamily family;
  for (std::size_t j = 1; j <= count; ++j) {
    const double distance = static_cast<double>(j);
    const double radius = std::pow(distance, radius_exponent);
    if (radius < distance) {
      family.add_ball(ConePoint{distance, theta, azimuth}, radius);
    }
  }
  return family;
}

ViewSumReport q_view_partial_sums(const BallFamily& family,
                                  const RadialPair& pair, std::size_t count) {
  return sum_terms(family, count, [&pair](const FamilyBall& ball) {
    const double rho = ball.center.r / ball.radius;
    return (ball.radius / ball.center.r) *
           std::exp(pair.log_v(rho) + pair.log_w(rho));
  });
}

ViewSumReport classical_view_partial_sums(const BallFamily& family, int n,
                                          std::size_t count) {
  if (n < 2) {
    throw PreconditionError("solid-angle view sums need dimension n >= 2");
  }
  return sum_terms(family, count, [n](const FamilyBall& ball) {
    return std::pow(ball.radius / ball.center.r, n - 1);
  });
}

NormalityReport normal_point_test(const ConePoint& x, const ConeMeasure& mu,
                                  double epsilon, const RadialPair& pair,
                                  const std::vector<double>& lambda_grid) {
  if (!(x.r > 0.0) || !std::isfinite(x.r)) {
    throw PreconditionError("the tested point must sit away from the origin");
  }
  if (mu.domain().n() != pair.index().n) {
    throw PreconditionError(
        "measure dimension does not match the radial pair's");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw PreconditionError("the smallness level must be positive and finite");
  }
  if (lambda_grid.empty()) {
    throw PreconditionError("the ball-radius grid must not be empty");
  }
  NormalityReport report;
  report.point = x;
  report.epsilon = epsilon;
  report.lambdas = lambda_grid;
  report.ratios.reserve(lambda_grid.size());
  for (const double lambda : lambda_grid) {
    if (!(lambda > 0.0) || !(lambda < 0.5 * x.r)) {
      throw PreconditionError(
          "ball radii must lie strictly between 0 and half the point's "
          "distance from the origin");
    }
    const double rho = x.r / lambda;
    const double weight =
        (lambda / x.r) * std::exp(pair.log_v(rho) + pair.log_w(rho));
    report.ratios.push_back(mu.ball_mass(x, lambda) / weight);
  }
  report.worst_lambda = report.lambdas.front();
  report.worst_ratio = report.ratios.front();
  for (std::size_t i = 1; i < report.ratios.size(); ++i) {
    if (report.ratios[i] > report.worst_ratio) {
      report.worst_ratio = report.ratios[i];
      report.worst_lambda = report.lambdas[i];
    }
  }
  report.normal = report.worst_ratio < epsilon;
  return report;
}

DecayBoundReport decay_bound_check(const GreenEvaluator& evaluator,
                                   const ConeMeasure& mu,
                                   const RadialPair& pair, double delta,
                                   double epsilon,
                                   const std::vector<ConePoint>& test_points) {
  if (!(delta > 1.0) || !std::isfinite(delta)) {
    throw PreconditionError("the dilation factor must exceed 1");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw PreconditionError("the smallness level must be positive and finite");
  }
  if (test_points.empty()) {
    throw PreconditionError("at least one test point is required");
  }
  if (evaluator.modes().empty()) {
    throw PreconditionError("the evaluator carries no angular modes");
  }
  const EigenPair& ground = evaluator.modes().front().eigen;
  if (pair.index().n != evaluator.domain().n() ||
      std::abs(pair.index().lambda - ground.lambda) >
          1e-8 * (1.0 + std::abs(ground.lambda))) {
    throw PreconditionError(
        "the radial pair must carry the domain's ground angular index");
  }
  const BlaschkeReport mass_split = blaschke_integrals(mu, pair, ground, 1.0);
  if (!mass_split.near_finite || !mass_split.far_finite) {
    throw PreconditionError(
        "the measure fails the two-sided finite weighted-mass condition");
  }

  const int n = pair.index().n;
  DecayBoundReport report;
  report.delta = delta;
  report.epsilon = epsilon;
  report.points = test_points;
  report.values.resize(test_points.size());
  report.bounds.resize(test_points.size());
  report.margins.resize(test_points.size());

  double constant = 0.0;
  for (std::size_t i = 0; i < test_points.size(); ++i) {
    const ConePoint& x = test_points[i];
    const std::vector<double> lambdas =
        logspace(0.02 * x.r, 0.49 * x.r, 25);
    const NormalityReport normality =
        normal_point_test(x, mu, epsilon, pair, lambdas);
    if (!normality.normal) {
      std::ostringstream msg;
      msg << "test point " << i << " at " << describe_point(x)
          << " fails the normality precondition: ratio "
          << normality.worst_ratio << " >= " << epsilon << " at ball radius "
          << normality.worst_lambda;
      throw PreconditionError(msg.str());
    }
    const double value = -green_potential(mu, evaluator, x);
    const double shape =
        std::exp((2.0 - n) * std::log(x.r) - pair.log_w(delta * x.r));
    report.values[i] = value;
    report.bounds[i] = shape;  // rescaled below once the constant is known
    constant = std::max(constant, value / (epsilon * shape));
  }
  report.constant = constant;
  for (std::size_t i = 0; i < test_points.size(); ++i) {
    report.bounds[i] *= constant * epsilon;
    report.margins[i] = report.bounds[i] - report.values[i];
  }
  return report;
}

LogLengthReport log_length_refinement(const RadialPair& pair, double delta,
                                      double k,
                                      const std::vector<double>& r_grid) {
  if (!(delta > 1.0) || !(k > delta) || !std::isfinite(k)) {
    throw PreconditionError(
        "the dilation factors must satisfy k > delta > 1");
  }
  if (r_grid.size() < 2) {
    throw PreconditionError("the radius grid needs at least two nodes");
  }
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0) || (i > 0 && !(r_grid[i] > r_grid[i - 1]))) {
      throw PreconditionError(
          "the radius grid must be positive and strictly increasing");
    }
  }

  GrowthClass growth = pair.potential().hints().growth;
  if (growth == GrowthClass::kUnspecified) {
    // Resolve the hint numerically: sample the scaled profile at three
    // geometrically spaced radii and demand sustained growth.
    const double lo = std::max(pair.r_min(), 1e-2);
    const double hi = 0.98 * pair.r_max();
    const double mid = std::sqrt(lo * hi);
    const double s_lo = lo * lo * pair.potential()(lo);
    const double s_mid = mid * mid * pair.potential()(mid);
    const double s_hi = hi * hi * pair.potential()(hi);
    growth = (s_hi > 4.0 * s_mid && s_mid > 4.0 * s_lo && s_hi > 10.0)
                 ? GrowthClass::kRapid
                 : GrowthClass::kPowerLike;
  }
  if (growth != GrowthClass::kRapid) {
    throw RegimeError(
        "the scaled profile r^2 q(r) approaches a finite limit; the "
        "comparison ratio is only guaranteed to vanish when it grows "
        "without bound");
  }

  const int n = pair.index().n;
  LogLengthReport report;
  report.radii = r_grid;
  report.ratios.reserve(r_grid.size());
  report.log_ratios.reserve(r_grid.size());
  for (const double r : r_grid) {
    const double log_ratio = (2.0 - n) * std::log(r) -
                             pair.log_w(delta * r) - pair.log_v(k * delta * r);
    report.log_ratios.push_back(log_ratio);
    report.ratios.push_back(std::exp(log_ratio));
  }
  double log_length = 0.0;
  for (std::size_t i = 1; i < report.log_ratios.size(); ++i) {
    if (report.log_ratios[i] >= report.log_ratios[i - 1]) {
      report.exceptional.push_back(i);
      log_length += std::log(r_grid[i] / r_grid[i - 1]);
    }
  }
  report.log_length = log_length;
  const double peak =
      *std::max_element(report.log_ratios.begin(), report.log_ratios.end());
  const double last = report.log_ratios.back();
  const double floor =
      *std::min_element(report.log_ratios.begin(), report.log_ratios.end());
  report.vanishing = (last <= floor) && (peak - last >= 2.0 * std::log(10.0));
  return report;
}

}  // namespace conefield
