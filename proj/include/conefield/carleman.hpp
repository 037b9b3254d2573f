// Carleman-type boundary identities on truncated cones, mass-distribution
// (Blaschke-type) summability integrals, and Green potentials of atomic
// measures.
//
// The comparison function
//   C_R(r, theta) = (W(r) - W(R)/V(R) V(r)) phi0(theta)
// vanishes at r = R and on the lateral boundary, and is positive between.
// Integrating the operator's Green identity over the truncated cone
// a < r < R yields
//
//   theta_n Int C_R dmu = chi'/V(R) Int_D u(R,.) phi0 dsigma
//                         + Int_lateral u (W - W(R)/V(R) V) (1/r)
//                               dphi0/dn dsigma
//                         + A_u(a, R),
//
//   A_u = a^{n-1} Int_D (u dC_R/dr - du/dr C_R)|_{r=a} dsigma,
//
// with dphi0/dn the inward angular derivative.  The dual identity swaps the
// roles of the two radii through C_a = (V - V(a)/W(a) W) phi0; its boundary
// term B_u carries the opposite orientation (outward sphere), i.e.
// B_u = R^{n-1} Int_D (du/dr C_a - u dC_a/dr)|_{r=R} dsigma, so that the
// same three-term layout holds.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "conefield/cone_green.hpp"
#include "conefield/growth.hpp"
#include "conefield/potential.hpp"
#include "conefield/radial_ode.hpp"
#include "conefield/spherical.hpp"

namespace conefield {

struct MeasureAtom {
  ConePoint point;
  double mass = 0.0;  // > 0
};

// dmu = radial(r) * angular(theta, azimuth) * dx on r_lo < r < r_hi.
struct MeasureDensity {
  std::function<double(double)> radial;
  std::function<double(double, double)> angular;
  double r_lo = 0.0;
  double r_hi = std::numeric_limits<double>::infinity();
};

// Nonnegative measure on a cone: finitely many atoms plus an optional
// separated density.
class ConeMeasure {
 public:
  explicit ConeMeasure(SphericalDomain domain) : domain_(std::move(domain)) {}

  void add_atom(const ConePoint& point, double mass);
  void set_density(MeasureDensity density);

  const SphericalDomain& domain() const { return domain_; }
  const std::vector<MeasureAtom>& atoms() const { return atoms_; }
  const std::optional<MeasureDensity>& density() const { return density_; }

  // Mass of the closed Euclidean ball; atoms only (UnsupportedError when a
  // density overlaps the ball's radial shell).
  double ball_mass(const ConePoint& center, double radius) const;

  // Integral of the weight against the measure.  A density must have a
  // finite radial extent here; the summability integrals below handle the
  // infinite-extent case with their own tail analysis.
  double weighted_integral(
      const std::function<double(const ConePoint&)>& weight) const;

 private:
  SphericalDomain domain_;
  std::vector<MeasureAtom> atoms_;
  std::optional<MeasureDensity> density_;
};

// (W(r) - W(R)/V(R) V(r)) phi0(theta): positive on 1 < r < R, zero at r = R
// and on the lateral boundary.
std::function<double(const ConePoint&)> c_upper(const RadialPair& pair,
                                                const EigenPair& phi0,
                                                double R);

// (V(r) - V(a)/W(a) W(r)) phi0(theta): the dual profile, zero at r = a.
std::function<double(const ConePoint&)> c_lower(const RadialPair& pair,
                                                const EigenPair& phi0,
                                                double a);

struct CarlemanTerms {
  double measure_term = 0.0;   // theta_n Int C dmu over a < r < R
  double cap_term = 0.0;       // spherical-cross-section term
  double lateral_term = 0.0;   // lateral-boundary term
  double boundary_term = 0.0;  // A_u(a, R), resp. B_u(a, R)
  double a = 0.0;
  double R = 0.0;

  double rhs() const { return cap_term + lateral_term + boundary_term; }
  double residual() const { return std::abs(measure_term - rhs()); }
  double scale() const;  // largest term magnitude (floor 1)
};

// Evaluates every term of the identity for a test function whose measure is
// known exactly (atoms; an empty measure for solutions of the equation).
// The lateral integral uses a composite trapezoid with `lateral_nodes`
// points; radial derivatives use Richardson-checked central differences
// (AccuracyError when the two estimates disagree).  Boundary angular values
// are taken as inward limits.
CarlemanTerms carleman_verify(const ConeFunctionSampler& u,
                              const ConeMeasure& measure,
                              const RadialPair& pair, const EigenPair& phi0,
                              double a, double R,
                              std::size_t lateral_nodes = 2048);

// Dual identity anchored at the inner radius.
CarlemanTerms carleman_dual_verify(const ConeFunctionSampler& u,
                                   const ConeMeasure& measure,
                                   const RadialPair& pair,
                                   const EigenPair& phi0, double a, double R,
                                   std::size_t lateral_nodes = 2048);

struct BlaschkeReport {
  double near = 0.0;  // integral of V phi0 over r < b (+inf when flagged)
  double far = 0.0;   // integral of W phi0 over r >= b (+inf when flagged)
  bool near_finite = true;
  bool far_finite = true;
  // Contribution of each radial octave [b 2^k, b 2^{k+1}) to the far
  // integral; trailing octaves that refuse to decay are what trip the
  // divergence flag, so truncating never fakes convergence.
  std::vector<double> far_octaves;
};

// Summability integrals deciding whether the measure is the Riesz measure
// of some upper-bounded subsolution.  Atoms contribute exactly; densities
// by quadrature octave by octave.  Outside the pair's solved range the
// weights are continued with their indicial power envelopes (upper bounds
// for q >= 0, exact for q = 0), so a "finite" verdict stays honest.
// Divergence is reported by zeroing the flag and setting the value to
// +infinity, never as an exception.
BlaschkeReport blaschke_integrals(const ConeMeasure& measure,
                                  const RadialPair& pair,
                                  const EigenPair& phi0, double b);

// Trailing-quarter divergence heuristic shared by the octave ledgers: true
// when the last quarter of the occupied octave range carries under 20% of
// the total mass (short spans count as decaying).
bool octave_tail_decays(const std::vector<double>& octave_sums);

// Harmonic Green's function of a plane sector with unit point mass, by
// conformal transplantation of the half-plane formula.  Exact arbitrarily
// close to the diagonal.
double sector_harmonic_green(const Sector2D& sector, const ConePoint& x,
                             const ConePoint& y);

// u(x) = - theta_n * sum_i m_i G(x; y_i), the canonical nonpositive
// subsolution with Riesz measure exactly the atom list.  The evaluator must
// carry normalization 1 (the mass calibration is applied here, so that each
// atom really deposits its stated mass).  Atom measures only
// (UnsupportedError on densities).  Atoms inside the evaluator's diagonal
// guard relative to x fall back to the conformal closed form when the cone
// is a sector with q = 0 and raise RegimeError (listing the offenders)
// otherwise.
double green_potential(const ConeMeasure& measure,
                       const GreenEvaluator& evaluator, const ConePoint& x);

// Recovers one atom's mass from the potential alone: flux of the gradient
// of green_potential through a small circle around the atom.  Sectors with
// q = 0 only (the near-field needs the closed form).
double riesz_flux_mass(const ConeMeasure& measure,
                       const GreenEvaluator& evaluator,
                       std::size_t atom_index, double ball_radius);

}  // namespace conefield
