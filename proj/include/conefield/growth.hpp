// Growth functionals over cones: the ground-mode mass ratio used in the
// minimal-growth criterion, radial eigen-projections and their defect under
// the one-dimensional operator, full-space harmonic-expansion coefficients
// (Liouville-type rigidity), two-parameter radial fits of positive
// solutions, and pointwise majorant checks.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "conefield/cone_green.hpp"
#include "conefield/potential.hpp"
#include "conefield/radial_ode.hpp"
#include "conefield/spherical.hpp"

namespace conefield {

enum class FunctionClass { kHarmonic, kSubfunction, kGeneric };

// Point function on a cone, tagged with the class the caller claims for it.
// Operations that require a class (for instance the radial projection
// defect) check the tag, not the analytic property itself.
class ConeFunctionSampler {
 public:
  ConeFunctionSampler(std::string label, FunctionClass declared,
                      std::function<double(const ConePoint&)> fn)
      : label_(std::move(label)), declared_(declared), fn_(std::move(fn)) {}

  double operator()(const ConePoint& p) const { return fn_(p); }
  FunctionClass declared_class() const { return declared_; }
  const std::string& label() const { return label_; }

  // u(r, theta) = V(r) phi(theta): a separated solution of the operator the
  // pair was built for.
  static ConeFunctionSampler from_mode(const RadialPair& pair,
                                       const EigenPair& eigen);

  // Superposition of Green's-function columns with nonnegative weights.
  static ConeFunctionSampler from_green_potential(
      GreenEvaluator evaluator,
      std::vector<std::pair<ConePoint, double>> charges);

 private:
  std::string label_;
  FunctionClass declared_;
  std::function<double(const ConePoint&)> fn_;
};

// Quadrature of f against the surface measure of the cross-section (arc
// length for sectors, spherical area for caps).
double angular_integral(
    const SphericalDomain& domain,
    const std::function<double(double theta, double azimuth)>& f);

struct GrowthReport {
  std::vector<double> radii;
  std::vector<double> ratios;  // nonnegative when the positive part is used
  double min_ratio = 0.0;      // evidence for the lower limit
  double trend_slope = 0.0;    // least-squares slope of ratio versus ln r
};

// ratio(r) = integral of u^+(r, .) phi0 dsigma, divided by V(r).  With
// clip_positive = false the signed integrand is used instead (then mode
// orthogonality makes the ratio a pure ground-component readout).
GrowthReport nevanlinna_ratio(const ConeFunctionSampler& u,
                              const SphericalDomain& domain,
                              const EigenPair& phi0, const RadialPair& ground,
                              const std::vector<double>& radii,
                              bool clip_positive = true);

struct ProjectionResidual {
  std::vector<double> radii;
  std::vector<double> y0;     // ground-mode projection at each radius
  double max_residual = 0.0;  // worst relative defect at interior radii
};

// Projects u on phi0 radius by radius and measures how well y0 satisfies
// the radial equation y'' + (n-1)/r y' - (lambda0/r^2 + q) y = 0 by centered
// differences on the (uniform) radius grid.  A half-step refinement guards
// against discretization-dominated defects (StepSizeError).
ProjectionResidual radial_projection_residual(const ConeFunctionSampler& u,
                                              const SphericalDomain& domain,
                                              const EigenPair& phi0,
                                              const RadialPotential& q,
                                              double lambda0,
                                              const std::vector<double>& radii);

// Real orthonormal spherical harmonic on the unit two-sphere; for degree k
// the index runs over 0..2k (order 0, then cosine/sine pairs per order).
double real_harmonic(int degree, int index, double theta, double azimuth);

struct HarmonicCoefficientRow {
  int degree = 0;
  int index = 0;
  std::vector<double> values;  // one per radius
};

struct LiouvilleTable {
  std::vector<double> radii;
  std::vector<HarmonicCoefficientRow> rows;

  // Largest |coefficient| at one radius over degrees <= max_degree.
  double max_abs(std::size_t radius_index, int max_degree) const;
  const HarmonicCoefficientRow& row(int degree, int index) const;
};

// Expansion coefficients of u over spheres |x| = r in R^3 against real
// spherical harmonics, each divided by the entire-space radial solution of
// its degree for the potential c0 (computed in log scale, so small radii do
// not underflow).  Coefficients constant in r certify that u solves
// (-Laplace + c0) u = 0 globally; for bounded u and c0 > 0 they decay.
LiouvilleTable liouville_coefficients(
    const std::function<double(const ConePoint&)>& u, double c0,
    int max_degree, const std::vector<double>& radii);

struct ModeFit {
  double a = 0.0;        // coefficient of the growing solution V
  double b = 0.0;        // coefficient of the decaying solution W
  double residual = 0.0; // relative fit defect over the radii
};

struct PositiveProjection {
  bool positive = true;      // u > 0 held at every probed point
  ConePoint violation;       // witness when it did not
  double min_value = 0.0;    // smallest probed value
  std::vector<ModeFit> modes;
};

// Projects u on each eigenfunction and fits Y_nu(r) = a V_nu(r) + b W_nu(r)
// by least squares over the radii.  If u fails the positivity probe the fit
// is skipped and the violation is reported instead.  Nearly collinear
// two-point information raises ConstructionError suggesting wider radii.
PositiveProjection positive_solution_projection(
    const ConeFunctionSampler& u, const SphericalDomain& domain,
    const std::vector<GreenMode>& modes, const std::vector<double>& radii);

struct BoundCheck {
  double worst_margin = 0.0;  // max of u - majorant over the grid
  ConePoint worst_point;
  bool ok = false;  // worst margin <= 0 up to rounding
};

// Checks u(r, theta) <= offset + sigma * radial_majorant(r) * phi_hat(theta)
// pointwise on the grid.  phi_hat must be sup-normalized to 1 (verified on
// the sampled angles).
BoundCheck pl_bound_check(
    const ConeFunctionSampler& u, double offset, double sigma,
    const std::function<double(double)>& radial_majorant,
    const std::function<double(const ConePoint&)>& phi_hat,
    const std::vector<ConePoint>& grid);

}  // namespace conefield
