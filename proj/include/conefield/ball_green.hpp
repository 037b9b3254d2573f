#pragma once

// Dirichlet Green's functions of -laplacian + c on round disks (n = 2) and
// balls (n = 3), for bounded nonnegative zeroth-order coefficients c that are
// evaluated pointwise and need not be radial.
//
// The harmonic kernel (c = 0) is closed-form.  For c != 0 the kernel is the
// alternating series G = sum_k (-1)^(k-1) g[k] of iterated kernels
//
//   g[1] = g,   g[k+1](x, y) = integral_B g[k](x, t) c(t) g(t, y) dt,
//
// summed while a fitted contraction factor (the sampled supremum of g[2]/g)
// certifies geometric decay.  Integrals whose integrand contains weakly
// singular kernel factors run in polar coordinates around each singular
// point: the ball is split along the bisector between the two points, every
// ray is capped at min(boundary, bisector), and the radial substitution
// rho = rho_max * u^2 absorbs the |t - x|^(2-n) weight, so plain Gauss rules
// apply.
//
// Normalizations.  Internally everything is kept in the unit-source scale:
// -laplacian G + c G carries a unit point mass, and the heat-balance identity
// (outgoing boundary flux) + (volume absorption) = 1 holds exactly.  Reported
// values are scaled by fundamental_constant(n)^2 so the harmonic kernel
// behaves like theta_n |x-y|^(2-n) (n = 3) resp. theta_2 ln(1/|x-y|) (n = 2)
// near the diagonal.  The *_unit_source entry points expose the raw scale,
// and flux_identity_check certifies the conversion numerically.

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "conefield/common.hpp"

namespace conefield {

// Cartesian point; the third component is ignored when the domain has n = 2.
using BallPoint = std::array<double, 3>;

// Pointwise zeroth-order coefficient, evaluated at interior points only.
using BallPotential = std::function<double(const BallPoint&)>;

// Round disk (n = 2) or ball (n = 3), open.
class BallDomain {
 public:
  BallDomain(int n, const BallPoint& center, double radius);

  int n() const { return n_; }
  const BallPoint& center() const { return center_; }
  double radius() const { return radius_; }

  // Strict interior membership (first n coordinates).
  bool contains(const BallPoint& x) const;
  double volume() const;
  double boundary_measure() const;

 private:
  int n_;
  BallPoint center_;
  double radius_;
};

// Resolution of the singular-patch quadrature.  angle_nodes counts the
// directions per patch on the circle (n = 2); for n = 3 the sphere of
// directions uses a Gauss rule with angle_nodes/2 polar nodes times
// angle_nodes azimuth midpoints.  radial_nodes Gauss points sit on each ray
// (rounded up to a supported rule size).  A positive refine_tol requests a
// doubled-resolution recompute: if the value moves by at least refine_tol/4
// relative to the kernel scale, the evaluation throws AccuracyError.
struct KernelQuadrature {
  int angle_nodes = 48;
  int radial_nodes = 16;
  double refine_tol = 0.0;
};

// Closed-form Dirichlet kernel of the Laplacian, reported scale
// (theta_n-leading near the diagonal, zero on the boundary, symmetric).
// Coincident arguments throw RegimeError; exterior arguments throw
// PreconditionError.
double harmonic_green(const BallDomain& domain, const BallPoint& x,
                      const BallPoint& y);

// Same kernel in the unit-source scale (reported value divided by
// fundamental_constant(n)^2).
double harmonic_green_unit_source(const BallDomain& domain, const BallPoint& x,
                                  const BallPoint& y);

// k-th iterated kernel at (x, y), reported scale: k = 1 returns the harmonic
// kernel; k >= 2 integrates recursively with the singular-patch rule (inner
// recursion levels run at half resolution).  k is capped at 6 because cost
// grows geometrically with depth.
double iterated_kernel(const BallDomain& domain, const BallPotential& c, int k,
                       const BallPoint& x, const BallPoint& y,
                       const KernelQuadrature& quad = {});

// Immutable evaluator for the alternating kernel series; safe to copy and to
// share across threads.  Obtain instances through neumann_green().
class NeumannGreen {
 public:
  const BallDomain& domain() const { return domain_; }

  // Number of series terms an evaluation computes.
  int terms_used() const { return terms_; }

  // Fitted contraction factor: sampled supremum of g[2]/g.
  double contraction() const { return contraction_; }

  // Relative geometric bound on the discarded tail,
  // contraction^terms_used / (1 - contraction).
  double remainder_bound() const { return remainder_; }

  double tolerance() const { return tol_; }

  // Kernel value in the reported scale (theta_n-leading), resp. in the
  // unit-source scale.  Preconditions as for harmonic_green.
  double evaluate(const BallPoint& x, const BallPoint& y) const;
  double evaluate_unit_source(const BallPoint& x, const BallPoint& y) const;

  // First `count` iterated-kernel values t_k = g[k](x, y) (reported scale,
  // all nonnegative); count = 0 means terms_used().  Partial sums
  // S_m = sum (-1)^(k-1) t_k bracket the converged value from both sides.
  std::vector<double> series_terms(const BallPoint& x, const BallPoint& y,
                                   int count = 0) const;

 private:
  friend NeumannGreen neumann_green(const BallDomain&, const BallPotential&,
                                    int, double, const KernelQuadrature&);

  NeumannGreen(BallDomain domain, BallPotential c, KernelQuadrature quad,
               int terms, double contraction, double remainder, double tol)
      : domain_(std::move(domain)),
        c_(std::move(c)),
        quad_(quad),
        terms_(terms),
        contraction_(contraction),
        remainder_(remainder),
        tol_(tol) {}

  BallDomain domain_;
  BallPotential c_;
  KernelQuadrature quad_;
  int terms_;
  double contraction_;
  double remainder_;
  double tol_;
};

// Builds the series evaluator.  Fits the contraction factor on a
// deterministic interior sample grid (SmallnessError when it reaches 1),
// picks the smallest term count whose geometric remainder is below tol
// (ConvergenceError when max_terms does not suffice), spot-checks the
// quadrature under refinement (AccuracyError on drift >= tol/4), and
// validates positivity and symmetry on the sample grid.  A potential that is
// zero on the grid yields the harmonic kernel exactly.
NeumannGreen neumann_green(const BallDomain& domain, const BallPotential& c,
                           int max_terms = 4, double tol = 1e-3,
                           const KernelQuadrature& quad = {});

// Pointwise comparison of the kernels of two ordered potentials.
struct ComparisonReport {
  std::vector<double> lower;    // kernel of the smaller potential, reported
  std::vector<double> upper;    // kernel of the larger potential, reported
  std::vector<double> margins;  // lower - upper, entrywise
  double min_margin = 0.0;
  // Relative residual of the resolvent reconstruction
  // G_hi(x,y) = G_lo(x,y) + integral G_lo(x,t) (c_lo - c_hi)(t) G_hi(t,y) dt,
  // maximized over the sample pairs.
  double reconstruction_residual = 0.0;
};

// Requires c_lo <= c_hi pointwise on the check grid (PreconditionError
// otherwise) and verifies that enlarging the coefficient shrinks the kernel
// at every requested pair, together with the resolvent reconstruction.
ComparisonReport comparison_check(
    const BallDomain& domain, const BallPotential& c_lo,
    const BallPotential& c_hi,
    const std::vector<std::pair<BallPoint, BallPoint>>& samples);

// Heat balance of the unit-source kernel with source at x: `boundary` is the
// outgoing flux through the sphere (inward finite differences at boundary
// quadrature nodes, Richardson-extrapolated), `volume` the absorption
// integral of c * G, and residual = |boundary + volume - 1|.
struct FluxReport {
  double boundary = 0.0;
  double volume = 0.0;
  double residual = 0.0;
};

// tol steers the finite-difference step (h = radius * min(1e-3, tol)) and the
// series tolerance; a step below the double-precision floor throws
// StepSizeError.
FluxReport flux_identity_check(const BallDomain& domain, const BallPotential& c,
                               const BallPoint& x, double tol = 1e-3);

}  // namespace conefield
