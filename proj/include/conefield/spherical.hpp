// Dirichlet spectrum of the Laplace-Beltrami operator on spherical domains:
// planar sectors (arcs of the unit circle, n = 2) and axisymmetric caps of
// the two-sphere (n = 3).
//
// Sector eigenpairs are closed forms.  Cap eigenpairs come from the Legendre
// equation on (0, theta0): the eigenfunctions are P_mu^m(cos theta) with
// non-integer degree mu chosen so the function vanishes at the rim, and the
// eigenvalue is lambda = mu (mu + 1).  Degrees are located by bracketing and
// bisection on the hypergeometric series of P_mu^m.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "conefield/common.hpp"

namespace conefield {

// Arc alpha < theta < beta of the unit circle.  Opening in (0, 2 pi):
// the complement must have interior points.
struct Sector2D {
  double alpha = 0.0;
  double beta = kPi;
};

// Cap 0 <= theta < theta0 of the unit two-sphere.  theta0 is restricted to
// (0, 0.95 pi]: beyond that the Legendre series in (1 - cos theta)/2 loses
// too many digits and a connection formula would be required.
struct Cap3D {
  double theta0 = 0.5 * kPi;
};

void validate_domain(const Sector2D& dom);  // throws ConstructionError
void validate_domain(const Cap3D& dom);     // throws ConstructionError

class SphericalDomain {
 public:
  explicit SphericalDomain(const Sector2D& sector);
  explicit SphericalDomain(const Cap3D& cap);

  int n() const;            // ambient dimension: 2 for sectors, 3 for caps
  double measure() const;   // arc length, resp. spherical area
  bool is_sector() const { return std::holds_alternative<Sector2D>(body_); }
  const Sector2D& sector() const;  // throws PreconditionError on wrong kind
  const Cap3D& cap() const;        // throws PreconditionError on wrong kind
  std::string describe() const;

 private:
  std::variant<Sector2D, Cap3D> body_;
};

struct EigenPair {
  std::size_t nu = 0;      // position in the lambda-ordered list
  double lambda = 0.0;     // Dirichlet eigenvalue, > 0
  double mu_plus = 0.0;    // positive root of mu (mu + n - 2) = lambda
  double mu_minus = 0.0;   // negative root
  double chi = 0.0;        // sqrt((n-2)^2 + 4 lambda) = mu_plus - mu_minus
  double norm_check = 0.0; // independent quadrature of Integral phi^2 dsigma
  int azimuthal_m = 0;     // azimuthal order (caps; 0 for sectors)
  bool sine_branch = false;  // sin(m phi) copy of a doubled m >= 1 mode
  double degree = 0.0;     // Legendre degree mu (caps); mode number (sectors)
  // Eigenfunction value at (theta, azimuth); zero-extended outside the
  // domain.  Sectors ignore the azimuth argument.
  std::function<double(double, double)> value;
  // Closed-form polar-angle derivative d phi / d theta at (theta, azimuth),
  // zero-extended outside the closed domain (one-sided at the rim).
  std::function<double(double, double)> derivative;
};

// --- Legendre functions of real degree (Ferrers, Condon-Shortley phase) ----

// P_mu(x) for x in (-1, 1], via the hypergeometric series in (1 - x)/2.
double legendre_degree(double mu, double x);

// d/dx P_mu(x).
double legendre_degree_derivative(double mu, double x);

// P_mu^m(x) = (-1)^m (1 - x^2)^{m/2} (d/dx)^m P_mu(x), m >= 0.
double associated_legendre(double mu, int m, double x);

// d/dx P_mu^m(x) for x in (-1, 1).
double associated_legendre_dx(double mu, int m, double x);

// --- Spectrum ---------------------------------------------------------------

// mu_plus = (2 - n + sqrt((n-2)^2 + 4 lambda0)) / 2.
double characteristic_constant(double lambda0, int n);

// Closed-form Dirichlet eigenpairs of the arc: lambda_nu = ((nu+1) pi / L)^2
// with L = beta - alpha, phi = sqrt(2/L) sin((nu+1) pi (theta - alpha)/L).
std::vector<EigenPair> sector_eigenpairs(const Sector2D& dom,
                                         std::size_t count);

// Cap eigenpairs ordered by eigenvalue, azimuthal orders included with their
// multiplicity (m >= 1 appears as a cos/sin pair).  Degrees are bisected to
// near machine precision; `tol` is the accuracy certified for lambda.
// Quadrature uses `nodes` Gauss-Legendre points in cos theta.
std::vector<EigenPair> cap_eigenpairs(const Cap3D& dom, std::size_t count,
                                      double tol = 1e-10,
                                      std::size_t nodes = 256);

struct ExhaustionReport {
  std::vector<double> lambdas;   // ground eigenvalue per sub-cap
  std::vector<double> sup_gaps;  // sup over the compact part of |phi_j - phi|
  double limit_lambda = 0.0;     // ground eigenvalue of the full cap
  bool lambda_strictly_decreasing = false;
  double final_lambda_gap = 0.0;
  double final_sup_gap = 0.0;
  bool converged = false;  // decreasing lambdas and final sup gap <= 1e-4
};

// Ground pairs of the sub-caps theta_j (strictly increasing, < theta0),
// compared against the full cap on {theta <= theta0 - compact_margin}.
// A non-monotone eigenvalue sequence is reported, not thrown: it signals a
// solver-accuracy failure, since shrinking domains must raise lambda0.
ExhaustionReport exhaustion_convergence(const Cap3D& dom,
                                        const std::vector<double>& thetas,
                                        double compact_margin);

struct EigenGrowthReport {
  double b1 = 0.0;  // lower Weyl constant: lambda_nu >= b1 (nu+1)^{2/(n-1)}
  double b2 = 0.0;  // upper Weyl constant
  double b3 = 0.0;  // sup-norm constant: sup|phi_nu| <= b3 lambda_nu^{n/4}
  double fitted_exponent = 0.0;  // regression of ln lambda on ln(nu+1)
  bool ok = false;
};

// Diagnostic fit of the eigenvalue growth law and the eigenfunction sup-norm
// bound over a computed list of pairs.
EigenGrowthReport eigen_growth_check(const std::vector<EigenPair>& pairs,
                                     const SphericalDomain& dom);

}  // namespace conefield
