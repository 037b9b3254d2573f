// Green's function of -Laplace + q(|x|) on the cone over a spherical domain,
// through the bilinear eigenfunction series
//
//   G(x; y) = sum_nu (1 / chi'_nu) V_nu(min(r, rho)) W_nu(max(r, rho))
//                    phi_nu(theta) phi_nu(psi),
//
// where (lambda_nu, phi_nu) is the Dirichlet spectrum of the cross-section
// and (V_nu, W_nu) the fundamental radial pair at index lambda_nu.  The
// series converges absolutely and uniformly only away from the diagonal
// ratio min/max = 1; evaluation therefore enforces a ratio guard.
//
// Normalization: the raw series above satisfies (-Laplace + q) G = delta_y
// in the distributional sense (unit point mass, no surface-area factor).
// Other conventions differ from it by a global constant; `normalization`
// multiplies the returned values and defaults to 1.
#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "conefield/potential.hpp"
#include "conefield/radial_ode.hpp"
#include "conefield/spherical.hpp"

namespace conefield {

struct ConePoint {
  double r = 1.0;        // radius, > 0
  double theta = 0.0;    // polar angle (sector angle, resp. cap colatitude)
  double azimuth = 0.0;  // ignored for sectors
};

// Point on the lateral boundary of the cone.
struct ConeBoundaryPoint {
  double rho = 1.0;       // radius, > 0
  int sector_side = 0;    // 0: theta = alpha edge, 1: theta = beta edge
  double azimuth = 0.0;   // caps only
};

struct GreenValue {
  double value = 0.0;       // partial sum to the stored mode count
  double log_value = 0.0;   // log of |value| (valid when value > 0)
  double tail_bound = 0.0;  // estimate for the dropped modes
};

struct GreenMode {
  EigenPair eigen;
  std::shared_ptr<const RadialPair> radial;
  double chi_prime = 0.0;  // generalized Wronskian of the mode's pair
  double sup_phi = 0.0;    // sampled sup of |phi_nu| over the domain
};

class GreenEvaluator {
 public:
  const SphericalDomain& domain() const { return domain_; }
  const RadialPotential& potential() const { return potential_; }
  const std::vector<GreenMode>& modes() const { return modes_; }
  double gamma_min() const { return gamma_min_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }

  // Global multiplicative constant applied to every returned value.
  double normalization = 1.0;

  // Bilinear series at interior points x, y.  Throws RegimeError when
  // min(r, rho)/max(r, rho) exceeds the ratio guard, RangeError when a
  // radius leaves the solved radial range, and AccuracyError (carrying the
  // achieved bound) when the tail estimate exceeds `accuracy`.
  GreenValue evaluate(const ConePoint& x, const ConePoint& y,
                      double accuracy =
                          std::numeric_limits<double>::infinity()) const;

  // log G for well-separated points; throws ConstructionError if the
  // truncated sum is not positive.
  double log_evaluate(const ConePoint& x, const ConePoint& y) const;

  // Termwise-differentiated series: inward normal derivative of G in the
  // angular direction at a lateral boundary point, times the stored
  // normalization.  Same guards as evaluate.
  GreenValue normal_derivative(const ConePoint& x,
                               const ConeBoundaryPoint& y) const;

 private:
  friend GreenEvaluator build_evaluator(const SphericalDomain&,
                                        const RadialPotential&, std::size_t,
                                        double, double, double, double);
  GreenEvaluator(SphericalDomain domain, RadialPotential q)
      : domain_(std::move(domain)), potential_(std::move(q)) {}

  double mode_sum(const ConePoint& x, const ConePoint& y, bool derivative,
                  const ConeBoundaryPoint* boundary, double* tail) const;

  SphericalDomain domain_;
  RadialPotential potential_;
  std::vector<GreenMode> modes_;
  double gamma_min_ = 0.5;
  double r_min_ = 1e-3;
  double r_max_ = 1e3;
  double weyl_lower_ = 0.0;  // lambda_nu >= weyl_lower * (nu+1)^{2/(n-1)}
  double weyl_upper_ = 0.0;
  double sup_constant_ = 0.0;  // sup|phi_nu| <= sup_constant * lambda^{n/4}
};

// Solves one radial pair per distinct eigenvalue among the first
// n_max + 1 modes (n_max = 0 picks the default: 64 for sectors, 32 for
// caps).  Validates chi'_nu >= chi_nu for every mode.
GreenEvaluator build_evaluator(const SphericalDomain& domain,
                               const RadialPotential& q, std::size_t n_max = 0,
                               double gamma_min = 0.5, double eps_ode = 1e-10,
                               double r_min = 1e-3, double r_max = 1e3);

struct KernelCompareReport {
  bool ok = false;
  // Minimal relative margins (rhs - lhs)/rhs over the sampled grid; zero
  // margins mean the bound is attained.
  double margin_power = 0.0;    // (1/chi')VW <= (1/chi) r^{mu+} rho^{mu-}
  double margin_order = 0.0;    // mode-nu kernel <= mode-0 kernel
  double margin_scaling = 0.0;  // scaled-argument comparison at gamma=1/2, delta=2
};

// Per-mode kernel comparison inequalities, sampled on a log grid.
KernelCompareReport mode_kernel_compare(const SphericalDomain& domain,
                                        std::size_t nu,
                                        const RadialPotential& q);

struct EnvelopeCertificate {
  // Smallest constant per envelope form over the sampled pairs:
  double b_product = 0.0;  // G <= b V(r) W(rho) phi0 phi0
  double b_ratio = 0.0;    // G <= b r^{2-n} W(rho)/W(delta r) phi0 phi0
  double b_power = 0.0;    // q = 0 only: G <= b rho^{2-n} (r/rho)^{mu+} phi0 phi0
  bool holds_product = false;  // product fit finite and positive
  bool holds_ratio = false;    // product constant dominates via the ratio form
  bool holds_power = false;    // q = 0 only: same with the pure-power form
  std::size_t samples = 0;
};

// Fits the smallest constant b with G <= b V(r) W(rho) phi0(theta) phi0(psi)
// over a sampled grid with delta * r <= rho, then checks that the same
// constant makes the reformulated envelopes dominate on the same samples.
EnvelopeCertificate envelope_bound(const GreenEvaluator& evaluator,
                                   double delta);

struct HomogeneityReport {
  bool ok = false;
  double max_rel = 0.0;
};

// For q = 0 the Green's function is homogeneous of degree 2 - n:
// G(kx; ky) = k^{2-n} G(x; y).  Verified on sampled triples.
HomogeneityReport harmonic_homogeneity_check(const SphericalDomain& domain);

}  // namespace conefield
