#include "conefield/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conefield/common.hpp"

namespace conefield {
namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double euclidean_distance(int n, const ConePoint& x, const ConePoint& y) {
  double c = 0.0;
  if (n == 2) {
    c = std::cos(x.theta - y.theta);
  } else {
    c = std::cos(x.theta) * std::cos(y.theta) +
        std::sin(x.theta) * std::sin(y.theta) *
            std::cos(x.azimuth - y.azimuth);
  }
  const double d2 = x.r * x.r + y.r * y.r - 2.0 * x.r * y.r * c;
  return std::sqrt(std::max(d2, 0.0));
}

void check_angle_inside(const SphericalDomain& domain, const ConePoint& p) {
  if (!std::isfinite(p.theta) || !std::isfinite(p.azimuth)) {
    throw PreconditionError("atom angles must be finite");
  }
  if (domain.is_sector()) {
    const Sector2D& s = domain.sector();
    if (!(p.theta > s.alpha && p.theta < s.beta)) {
      throw PreconditionError("atom angle outside the open sector");
    }
  } else {
    const Cap3D& c = domain.cap();
    if (!(p.theta >= 0.0 && p.theta < c.theta0)) {
      throw PreconditionError("atom colatitude outside the open cap");
    }
  }
}

bool same_domain(const SphericalDomain& a, const SphericalDomain& b) {
  if (a.is_sector() != b.is_sector()) return false;
  if (a.is_sector()) {
    return a.sector().alpha == b.sector().alpha &&
           a.sector().beta == b.sector().beta;
  }
  return a.cap().theta0 == b.cap().theta0;
}

// V phi (increasing) or W phi weight at radius r, continued outside the
// solved range by the indicial power law.  For q >= 0 the continuation
// bounds the true weight from above on the side where it matters (W beyond
// r_max, V below r_min), so finiteness verdicts built on it stay honest.
double radial_weight(const RadialPair& pair, bool increasing, double r) {
  const double lo = pair.r_min();
  const double hi = pair.r_max();
  const double clamped = std::clamp(r, lo, hi);
  double log_val =
      increasing ? pair.log_v(clamped) : pair.log_w(clamped);
  if (r != clamped) {
    const double exponent =
        increasing ? pair.index().mu_plus() : pair.index().mu_minus();
    log_val += exponent * std::log(r / clamped);
  }
  return std::exp(log_val);
}

}  // namespace

// Trailing-quarter mass test on per-octave contributions: a convergent
// tail leaves the last quarter of the occupied octave range with a small
// share of the total, a divergent one keeps feeding it.
bool octave_tail_decays(const std::vector<double>& sums) {
  std::size_t first = 0;
  std::size_t last = sums.size();
  while (last > first && sums[last - 1] <= 0.0) --last;
  while (first < last && sums[first] <= 0.0) ++first;
  const std::size_t span = last - first;
  if (span < 4) return true;
  const std::size_t tail = std::max<std::size_t>(1, span / 4);
  double total = 0.0;
  double tail_sum = 0.0;
  for (std::size_t k = first; k < last; ++k) total += sums[k];
  for (std::size_t k = last - tail; k < last; ++k) tail_sum += sums[k];
  return tail_sum < 0.2 * total;
}

// ---------------------------------------------------------------------------
// ConeMeasure
// ---------------------------------------------------------------------------

void ConeMeasure::add_atom(const ConePoint& point, double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw PreconditionError("atom mass must be positive and finite");
  }
  if (!(point.r > 0.0) || !std::isfinite(point.r)) {
    throw PreconditionError("atom radius must be positive and finite");
  }
  check_angle_inside(domain_, point);
  atoms_.push_back(MeasureAtom{point, mass});
}

void ConeMeasure::set_density(MeasureDensity density) {
  if (!density.radial || !density.angular) {
    throw PreconditionError("density needs both radial and angular profiles");
  }
  if (!(density.r_lo >= 0.0) || !(density.r_hi > density.r_lo)) {
    throw PreconditionError("density extent must satisfy 0 <= r_lo < r_hi");
  }
  density_ = std::move(density);
}

double ConeMeasure::ball_mass(const ConePoint& center, double radius) const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw PreconditionError("ball radius must be positive and finite");
  }
  if (density_) {
    const double shell_lo = std::max(center.r - radius, 0.0);
    const double shell_hi = center.r + radius;
    if (shell_hi > density_->r_lo && shell_lo < density_->r_hi) {
      throw UnsupportedError(
          "ball_mass counts atoms only, but the density component overlaps "
          "the ball's radial shell");
    }
  }
  const int n = domain_.n();
  double total = 0.0;
  for (const MeasureAtom& atom : atoms_) {
    if (euclidean_distance(n, atom.point, center) <= radius) {
      total += atom.mass;
    }
  }
  return total;
}

double ConeMeasure::weighted_integral(
    const std::function<double(const ConePoint&)>& weight) const {
  double total = 0.0;
  for (const MeasureAtom& atom : atoms_) {
    total += atom.mass * weight(atom.point);
  }
  if (density_) {
    if (!std::isfinite(density_->r_hi)) {
      throw UnsupportedError(
          "weighted_integral needs a finite radial extent; use the "
          "summability integrals for infinite tails");
    }
    const MeasureDensity& dens = *density_;
    const int n = domain_.n();
    auto shell = [&](double r) {
      const double angular = angular_integral(
          domain_, [&](double theta, double azimuth) {
            return dens.angular(theta, azimuth) *
                   weight(ConePoint{r, theta, azimuth});
          });
      return dens.radial(r) * std::pow(r, n - 1) * angular;
    };
    total += Quad::integrate(shell, dens.r_lo, dens.r_hi, 10, 1e-10);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Comparison profiles
// ---------------------------------------------------------------------------

std::function<double(const ConePoint&)> c_upper(const RadialPair& pair,
                                                const EigenPair& phi0,
                                                double R) {
  if (!(R > pair.r_min() && R <= pair.r_max())) {
    throw PreconditionError("truncation radius outside the solved range");
  }
  RadialPair local = pair;
  std::function<double(double, double)> phi = phi0.value;
  return [local = std::move(local), phi = std::move(phi),
          R](const ConePoint& p) {
    // W(r) - (W(R)/V(R)) V(r), written so the bracket cancels exactly at
    // r = R and keeps full precision nearby.
    const double g = (local.log_v(p.r) - local.log_v(R)) -
                     (local.log_w(p.r) - local.log_w(R));
    return -std::exp(local.log_w(p.r)) * std::expm1(g) *
           phi(p.theta, p.azimuth);
  };
}

std::function<double(const ConePoint&)> c_lower(const RadialPair& pair,
                                                const EigenPair& phi0,
                                                double a) {
  if (!(a >= pair.r_min() && a < pair.r_max())) {
    throw PreconditionError("anchor radius outside the solved range");
  }
  RadialPair local = pair;
  std::function<double(double, double)> phi = phi0.value;
  return [local = std::move(local), phi = std::move(phi),
          a](const ConePoint& p) {
    const double g = (local.log_w(p.r) - local.log_w(a)) -
                     (local.log_v(p.r) - local.log_v(a));
    return -std::exp(local.log_v(p.r)) * std::expm1(g) *
           phi(p.theta, p.azimuth);
  };
}

double CarlemanTerms::scale() const {
  return std::max({1.0, std::abs(measure_term), std::abs(cap_term),
                   std::abs(lateral_term), std::abs(boundary_term)});
}

// ---------------------------------------------------------------------------
// Identity verification
// ---------------------------------------------------------------------------

namespace {

CarlemanTerms assemble_terms(const ConeFunctionSampler& u,
                             const ConeMeasure& measure,
                             const RadialPair& pair, const EigenPair& phi0,
                             double a, double R, std::size_t lateral_nodes,
                             bool dual) {
  if (!(a > 0.0) || !(R > a) || !std::isfinite(R)) {
    throw PreconditionError("truncation radii must satisfy 0 < a < R");
  }
  if (a < pair.r_min() || R > pair.r_max()) {
    throw RangeError("truncation radii outside the pair's solved range");
  }
  if (lateral_nodes < 8) {
    throw PreconditionError("lateral quadrature needs at least 8 nodes");
  }
  if (measure.density()) {
    throw PreconditionError(
        "identity verification needs an exactly known atomic measure");
  }
  const SphericalDomain& domain = measure.domain();
  const int n = domain.n();
  const double theta_n = fundamental_constant(n);
  const double chi_prime = pair.wronskian();

  // Radial profile of the comparison function and its derivative; the
  // bracket form cancels exactly at the anchoring radius.
  auto profile = [&](double r) -> double {
    if (dual) {
      const double g = (pair.log_w(r) - pair.log_w(a)) -
                       (pair.log_v(r) - pair.log_v(a));
      return -std::exp(pair.log_v(r)) * std::expm1(g);
    }
    const double g = (pair.log_v(r) - pair.log_v(R)) -
                     (pair.log_w(r) - pair.log_w(R));
    return -std::exp(pair.log_w(r)) * std::expm1(g);
  };
  auto profile_slope = [&](double r) -> double {
    const double vp = std::exp(pair.log_v(r)) * pair.dlog_v(r) / r;
    const double wp = std::exp(pair.log_w(r)) * pair.dlog_w(r) / r;
    if (dual) {
      return vp - std::exp(pair.log_v(a) - pair.log_w(a)) * wp;
    }
    return wp - std::exp(pair.log_w(R) - pair.log_v(R)) * vp;
  };

  CarlemanTerms terms;
  terms.a = a;
  terms.R = R;

  // Measure side: atoms inside the open truncated cone, each weighted by
  // the comparison function.
  for (const MeasureAtom& atom : measure.atoms()) {
    const double r = atom.point.r;
    if (std::abs(r - a) <= 1e-12 * a || std::abs(r - R) <= 1e-12 * R) {
      throw PreconditionError("atom sits on a truncation sphere");
    }
    if (r < a || r > R) continue;
    terms.measure_term += theta_n * atom.mass * profile(r) *
                          phi0.value(atom.point.theta, atom.point.azimuth);
  }

  // Spherical cross-section term at the profile's free end.
  const double cap_r = dual ? a : R;
  const double cap_factor =
      chi_prime * std::exp(dual ? -pair.log_w(a) : -pair.log_v(R));
  terms.cap_term =
      cap_factor * angular_integral(domain, [&](double theta, double az) {
        return u(ConePoint{cap_r, theta, az}) * phi0.value(theta, az);
      });

  // Lateral-boundary term: composite trapezoid in r of the inward angular
  // flux of phi0 against u.  Angles are sampled an epsilon inside the edge
  // (samplers built on series evaluators reject exact boundary points).
  std::vector<double> node_values(lateral_nodes, 0.0);
  const double step = (R - a) / static_cast<double>(lateral_nodes - 1);
  parallel_for(lateral_nodes, [&](std::size_t i) {
    const double r = a + step * static_cast<double>(i);
    double ring = 0.0;
    if (domain.is_sector()) {
      const Sector2D& s = domain.sector();
      const double eps = 1e-9 * (s.beta - s.alpha);
      ring = u(ConePoint{r, s.alpha + eps, 0.0}) *
                 phi0.derivative(s.alpha, 0.0) -
             u(ConePoint{r, s.beta - eps, 0.0}) *
                 phi0.derivative(s.beta, 0.0);
    } else {
      const Cap3D& c = domain.cap();
      const double eps = 1e-9 * c.theta0;
      constexpr std::size_t kAz = 128;
      double around = 0.0;
      for (std::size_t k = 0; k < kAz; ++k) {
        const double az =
            2.0 * kPi * (static_cast<double>(k) + 0.5) / kAz;
        around -= u(ConePoint{r, c.theta0 - eps, az}) *
                  phi0.derivative(c.theta0, az);
      }
      ring = around * (2.0 * kPi / kAz) * std::sin(c.theta0) * r;
    }
    node_values[i] = profile(r) / r * ring;
  });
  for (std::size_t i = 0; i < lateral_nodes; ++i) {
    const double weight =
        (i == 0 || i + 1 == lateral_nodes) ? 0.5 * step : step;
    terms.lateral_term += weight * node_values[i];
  }

  // Sphere term at the profile's anchored end, with the radial derivative
  // of u taken by step-halved central differences.
  const double bnd_r = dual ? R : a;
  const double orientation = dual ? -1.0 : 1.0;
  const double prefactor = std::pow(bnd_r, n - 1);
  const double p_at = profile(bnd_r);
  const double dp_at = profile_slope(bnd_r);
  const double fd = 1e-4 * bnd_r;
  double worst_disagree = 0.0;
  double derivative_scale = 0.0;
  const double sphere_integral =
      angular_integral(domain, [&](double theta, double az) {
        auto sample = [&](double rr) {
          return u(ConePoint{rr, theta, az});
        };
        const double d1 =
            (sample(bnd_r + fd) - sample(bnd_r - fd)) / (2.0 * fd);
        const double d2 =
            (sample(bnd_r + 0.5 * fd) - sample(bnd_r - 0.5 * fd)) / fd;
        const double du = (4.0 * d2 - d1) / 3.0;
        const double mid = sample(bnd_r);
        worst_disagree = std::max(worst_disagree, std::abs(d2 - d1) / 3.0);
        derivative_scale = std::max(
            {derivative_scale, std::abs(du), std::abs(mid) / bnd_r});
        return (mid * dp_at - du * p_at) * phi0.value(theta, az);
      });
  if (worst_disagree > 1e-4 * std::max(derivative_scale, 1e-12)) {
    throw AccuracyError(
        "radial derivative failed its step-halving check on the sphere "
        "r = " +
            std::to_string(bnd_r),
        worst_disagree);
  }
  terms.boundary_term = orientation * prefactor * sphere_integral;
  return terms;
}

}  // namespace

CarlemanTerms carleman_verify(const ConeFunctionSampler& u,
                              const ConeMeasure& measure,
                              const RadialPair& pair, const EigenPair& phi0,
                              double a, double R,
                              std::size_t lateral_nodes) {
  return assemble_terms(u, measure, pair, phi0, a, R, lateral_nodes, false);
}

CarlemanTerms carleman_dual_verify(const ConeFunctionSampler& u,
                                   const ConeMeasure& measure,
                                   const RadialPair& pair,
                                   const EigenPair& phi0, double a, double R,
                                   std::size_t lateral_nodes) {
  return assemble_terms(u, measure, pair, phi0, a, R, lateral_nodes, true);
}

// ---------------------------------------------------------------------------
// Summability integrals
// ---------------------------------------------------------------------------

BlaschkeReport blaschke_integrals(const ConeMeasure& measure,
                                  const RadialPair& pair,
                                  const EigenPair& phi0, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw PreconditionError("split radius b must be positive and finite");
  }
  const SphericalDomain& domain = measure.domain();
  const int n = domain.n();

  double density_angular = 0.0;
  if (measure.density()) {
    const MeasureDensity& dens = *measure.density();
    density_angular =
        angular_integral(domain, [&](double theta, double az) {
          return dens.angular(theta, az) * phi0.value(theta, az);
        });
  }

  // Contribution of one radial band [lo, hi) to the chosen integral.
  auto band = [&](bool increasing, double lo, double hi) -> double {
    double s = 0.0;
    for (const MeasureAtom& atom : measure.atoms()) {
      const double r = atom.point.r;
      if (r >= lo && r < hi) {
        s += atom.mass * radial_weight(pair, increasing, r) *
             phi0.value(atom.point.theta, atom.point.azimuth);
      }
    }
    if (measure.density()) {
      const MeasureDensity& dens = *measure.density();
      const double qlo = std::max(lo, dens.r_lo);
      const double qhi = std::min(hi, dens.r_hi);
      if (qhi > qlo) {
        auto f = [&](double r) {
          return dens.radial(r) * std::pow(r, n - 1) *
                 radial_weight(pair, increasing, r);
        };
        s += density_angular * Quad::integrate(f, qlo, qhi, 10, 1e-12);
      }
    }
    return s;
  };

  double min_support = kInf;
  double max_support = 0.0;
  for (const MeasureAtom& atom : measure.atoms()) {
    min_support = std::min(min_support, atom.point.r);
    max_support = std::max(max_support, atom.point.r);
  }
  bool unbounded_above = false;
  bool reaches_origin = false;
  if (measure.density()) {
    min_support = std::min(min_support, measure.density()->r_lo);
    unbounded_above = !std::isfinite(measure.density()->r_hi);
    if (!unbounded_above) {
      max_support = std::max(max_support, measure.density()->r_hi);
    }
    reaches_origin = measure.density()->r_lo == 0.0;
  }

  constexpr std::size_t kMaxOctaves = 256;
  BlaschkeReport report;

  // Far integral: octaves [b 2^k, b 2^{k+1}) going outward.
  double far_total = 0.0;
  bool far_converged = !unbounded_above;
  {
    int calm = 0;
    for (std::size_t k = 0; k < kMaxOctaves; ++k) {
      const double lo = b * std::ldexp(1.0, static_cast<int>(k));
      const double hi = 2.0 * lo;
      if (!unbounded_above && lo > max_support) break;
      const double s = band(false, lo, hi);
      report.far_octaves.push_back(s);
      far_total += s;
      if (unbounded_above && lo > max_support) {
        if (s <= 1e-16 * std::max(far_total, 1e-300)) {
          if (++calm >= 2) {
            far_converged = true;
            break;
          }
        } else {
          calm = 0;
        }
      }
    }
  }
  report.far_finite = octave_tail_decays(report.far_octaves);
  if (report.far_finite && unbounded_above && !far_converged) {
    // Close the remaining tail geometrically from the last octave ratio.
    const std::size_t m = report.far_octaves.size();
    if (m >= 3 && report.far_octaves[m - 3] > 0.0) {
      const double rho = std::sqrt(report.far_octaves[m - 1] /
                                   report.far_octaves[m - 3]);
      if (rho < 0.95) {
        far_total += report.far_octaves[m - 1] * rho / (1.0 - rho);
      } else {
        report.far_finite = false;
      }
    }
  }
  report.far = report.far_finite ? far_total : kInf;

  // Near integral: octaves [b 2^{-k-1}, b 2^{-k}) going inward.
  std::vector<double> near_octaves;
  double near_total = 0.0;
  bool near_converged = !reaches_origin;
  {
    int calm = 0;
    for (std::size_t k = 0; k < kMaxOctaves; ++k) {
      const double hi = b * std::ldexp(1.0, -static_cast<int>(k));
      const double lo = 0.5 * hi;
      if (!reaches_origin && hi <= min_support) break;
      const double s = band(true, lo, hi);
      near_octaves.push_back(s);
      near_total += s;
      if (reaches_origin && hi <= min_support) {
        if (s <= 1e-16 * std::max(near_total, 1e-300)) {
          if (++calm >= 2) {
            near_converged = true;
            break;
          }
        } else {
          calm = 0;
        }
      }
    }
  }
  report.near_finite = octave_tail_decays(near_octaves);
  if (report.near_finite && reaches_origin && !near_converged) {
    const std::size_t m = near_octaves.size();
    if (m >= 3 && near_octaves[m - 3] > 0.0) {
      const double rho =
          std::sqrt(near_octaves[m - 1] / near_octaves[m - 3]);
      if (rho < 0.95) {
        near_total += near_octaves[m - 1] * rho / (1.0 - rho);
      } else {
        report.near_finite = false;
      }
    }
  }
  report.near = report.near_finite ? near_total : kInf;
  return report;
}

// ---------------------------------------------------------------------------
// Green potentials of atomic measures
// ---------------------------------------------------------------------------

double sector_harmonic_green(const Sector2D& sector, const ConePoint& x,
                             const ConePoint& y) {
  validate_domain(sector);
  auto inside = [&](const ConePoint& p) {
    return p.r > 0.0 && std::isfinite(p.r) && p.theta > sector.alpha &&
           p.theta < sector.beta;
  };
  if (!inside(x) || !inside(y)) {
    throw RangeError("sector Green's function needs interior points");
  }
  // Fold the wedge onto the upper half plane with z -> z^{pi/opening};
  // the half-plane kernel is conformally invariant.
  const double power = kPi / (sector.beta - sector.alpha);
  const std::complex<double> zeta =
      std::polar(std::pow(x.r, power), power * (x.theta - sector.alpha));
  const std::complex<double> omega =
      std::polar(std::pow(y.r, power), power * (y.theta - sector.alpha));
  const double den = std::abs(zeta - omega);
  if (den == 0.0) {
    throw PreconditionError("coincident points have no finite kernel value");
  }
  return std::log(std::abs(zeta - std::conj(omega)) / den) / (2.0 * kPi);
}

double green_potential(const ConeMeasure& measure,
                       const GreenEvaluator& evaluator, const ConePoint& x) {
  if (evaluator.normalization != 1.0) {
    throw PreconditionError(
        "green_potential expects an evaluator with unit normalization");
  }
  if (measure.density()) {
    throw UnsupportedError("green_potential handles atomic measures only");
  }
  if (!same_domain(measure.domain(), evaluator.domain())) {
    throw PreconditionError("measure and evaluator live on different cones");
  }
  const int n = evaluator.domain().n();
  const double theta_n = fundamental_constant(n);
  const bool closed_form = evaluator.domain().is_sector() &&
                           evaluator.potential().is_zero();
  double sum = 0.0;
  std::vector<std::size_t> offenders;
  for (std::size_t i = 0; i < measure.atoms().size(); ++i) {
    const MeasureAtom& atom = measure.atoms()[i];
    if (euclidean_distance(n, x, atom.point) == 0.0) {
      throw PreconditionError("evaluation point coincides with atom " +
                              std::to_string(i));
    }
    const double near_r = std::min(x.r, atom.point.r);
    const double far_r = std::max(x.r, atom.point.r);
    if (near_r > evaluator.gamma_min() * far_r) {
      if (closed_form) {
        sum -= theta_n * atom.mass *
               sector_harmonic_green(evaluator.domain().sector(), x,
                                     atom.point);
      } else {
        offenders.push_back(i);
      }
    } else {
      sum -= theta_n * atom.mass * evaluator.evaluate(x, atom.point).value;
    }
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "atoms inside the diagonal guard at this evaluation point:";
    for (std::size_t i : offenders) msg << ' ' << i;
    throw RegimeError(msg.str());
  }
  return sum;
}

double riesz_flux_mass(const ConeMeasure& measure,
                       const GreenEvaluator& evaluator,
                       std::size_t atom_index, double ball_radius) {
  if (!evaluator.domain().is_sector() ||
      !evaluator.potential().is_zero()) {
    throw UnsupportedError(
        "flux recovery needs the closed near-field form, available for "
        "sectors without potential only");
  }
  if (atom_index >= measure.atoms().size()) {
    throw PreconditionError("atom index out of range");
  }
  if (!(ball_radius > 0.0) || !std::isfinite(ball_radius)) {
    throw PreconditionError("ball radius must be positive and finite");
  }
  const MeasureAtom& target = measure.atoms()[atom_index];
  const Sector2D& s = evaluator.domain().sector();
  auto ray_distance = [&](double delta) {
    return delta >= 0.5 * kPi ? target.point.r
                              : target.point.r * std::sin(delta);
  };
  const double edge = std::min(ray_distance(target.point.theta - s.alpha),
                               ray_distance(s.beta - target.point.theta));
  if (!(ball_radius < 0.9 * edge && ball_radius < 0.5 * target.point.r)) {
    throw PreconditionError("flux circle must stay well inside the cone");
  }
  for (std::size_t i = 0; i < measure.atoms().size(); ++i) {
    if (i == atom_index) continue;
    if (euclidean_distance(2, measure.atoms()[i].point, target.point) <
        2.0 * ball_radius) {
      throw PreconditionError(
          "another atom sits too close to the flux circle");
    }
  }

  // Work in a frame rotated to the sector's bisector so atan2 never wraps.
  const double mid = 0.5 * (s.alpha + s.beta);
  const double cx = target.point.r * std::cos(target.point.theta - mid);
  const double cy = target.point.r * std::sin(target.point.theta - mid);
  constexpr std::size_t kCount = 256;
  const double fd = 1e-3 * ball_radius;
  std::vector<double> slot(kCount, 0.0);
  parallel_for(kCount, [&](std::size_t k) {
    const double ang = 2.0 * kPi * (static_cast<double>(k) + 0.5) / kCount;
    auto at = [&](double rr) {
      const double px = cx + rr * std::cos(ang);
      const double py = cy + rr * std::sin(ang);
      const ConePoint p{std::hypot(px, py), mid + std::atan2(py, px), 0.0};
      return green_potential(measure, evaluator, p);
    };
    slot[k] = (at(ball_radius + fd) - at(ball_radius - fd)) / (2.0 * fd);
  });
  double flux = 0.0;
  for (double v : slot) flux += v;
  flux *= 2.0 * kPi * ball_radius / static_cast<double>(kCount);
  return flux / fundamental_constant(2);
}

}  // namespace conefield
