#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "conefield/ball_green.hpp"
#include "conefield/common.hpp"
#include "conefield/potential.hpp"
#include "conefield/radial_ode.hpp"

using namespace conefield;

namespace {

BallPoint pt(double a, double b, double c = 0.0) { return {a, b, c}; }

BallPoint polar(double r, double phi) {
  return {r * std::cos(phi), r * std::sin(phi), 0.0};
}

BallPotential constant_c(double value) {
  return [value](const BallPoint&) { return value; };
}

// Frozen reference values for the unit disk / unit ball (independent
// high-precision route: Fourier-Bessel bilinear series resp. the closed-form
// radial solution; see the kernel values asserted below).
constexpr double kDiskC01Pair = 0.05486714217807836;       // c=0.1, (0.3,0.2)-(0.6,2.1) polar
constexpr double kDiskC01Center = 0.108063147040135476;    // c=0.1, center-(0.5,0)
constexpr double kDiskC02Pair = 0.05351050091441408;       // c=0.2, first pair
constexpr double kDiskHarmonicPair = 0.05627613417285042;  // c=0, first pair
constexpr double kBallC1Half = 0.07057080450553762;        // n=3 c=1, center-(0.5,0,0)

}  // namespace

TEST_CASE("round domains and the harmonic kernel") {
  const BallDomain disk(2, pt(0, 0), 1.0);
  const BallDomain ball(3, pt(0, 0, 0), 1.0);

  SUBCASE("geometry accessors") {
    CHECK(disk.n() == 2);
    CHECK(ball.n() == 3);
    CHECK(disk.volume() == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(disk.boundary_measure() == doctest::Approx(2 * kPi).epsilon(1e-14));
    CHECK(ball.volume() == doctest::Approx(4.0 / 3.0 * kPi).epsilon(1e-14));
    CHECK(ball.boundary_measure() == doctest::Approx(4 * kPi).epsilon(1e-14));

    const BallDomain shifted(3, pt(1.0, -2.0, 0.5), 2.0);
    CHECK(shifted.contains(pt(1.0, -2.0, 0.5)));
    CHECK(shifted.contains(pt(2.9, -2.0, 0.5)));
    CHECK_FALSE(shifted.contains(pt(3.0, -2.0, 0.5)));  // boundary is excluded
    CHECK_FALSE(shifted.contains(pt(4.0, 0.0, 0.0)));

    // The third coordinate is ignored in dimension two.
    CHECK(disk.contains(pt(0.2, 0.1, 123.0)));
  }

  SUBCASE("construction screening") {
    CHECK_THROWS_AS(BallDomain(4, pt(0, 0), 1.0), UnsupportedError);
    CHECK_THROWS_AS(BallDomain(1, pt(0, 0), 1.0), UnsupportedError);
    CHECK_THROWS_AS(BallDomain(2, pt(0, 0), 0.0), ConstructionError);
    CHECK_THROWS_AS(BallDomain(2, pt(0, 0), -1.0), ConstructionError);
    CHECK_THROWS_AS(
        BallDomain(2, pt(0, 0), std::numeric_limits<double>::infinity()),
        ConstructionError);
    CHECK_THROWS_AS(
        BallDomain(3, pt(std::nan(""), 0, 0), 1.0), ConstructionError);
  }

  SUBCASE("reported scale pins the leading constant") {
    // Unit ball, source at the center: theta_3 * (1/|y| - 1/R) = 4*pi at
    // |y| = 1/2.
    const double value = harmonic_green(ball, pt(0, 0, 0), pt(0.5, 0, 0));
    CHECK(value == doctest::Approx(4 * kPi).epsilon(1e-12));
    const double theta = fundamental_constant(3);
    CHECK(harmonic_green_unit_source(ball, pt(0, 0, 0), pt(0.5, 0, 0)) ==
          doctest::Approx(value / (theta * theta)).epsilon(1e-14));
  }

  SUBCASE("frozen disk value") {
    const double value =
        harmonic_green_unit_source(disk, polar(0.3, 0.2), polar(0.6, 2.1));
    CHECK(value == doctest::Approx(kDiskHarmonicPair).epsilon(1e-12));
  }

  SUBCASE("symmetry is exact") {
    const BallPoint x = pt(0.31, -0.12, 0.4);
    const BallPoint y = pt(-0.2, 0.05, -0.33);
    CHECK(harmonic_green(ball, x, y) == harmonic_green(ball, y, x));
    CHECK(harmonic_green(disk, pt(0.3, 0.1), pt(-0.5, 0.2)) ==
          harmonic_green(disk, pt(-0.5, 0.2), pt(0.3, 0.1)));
  }

  SUBCASE("boundary limit vanishes") {
    const double near = harmonic_green(ball, pt(0.2, 0, 0),
                                       pt(0.0, 0.9999999, 0));
    CHECK(std::abs(near) < 1e-3);
    CHECK(near >= 0.0);
    const double near2 = harmonic_green(disk, pt(0.2, 0), pt(0.0, 0.9999999));
    CHECK(std::abs(near2) < 1e-3);
    CHECK(near2 >= 0.0);
  }

  SUBCASE("translation and scaling behaviour") {
    const BallDomain moved(3, pt(1.0, 2.0, -0.5), 1.0);
    const double base = harmonic_green(ball, pt(0.25, 0.1, 0), pt(-0.3, 0.2, 0.1));
    const double shifted = harmonic_green(moved, pt(1.25, 2.1, -0.5),
                                          pt(0.7, 2.2, -0.4));
    CHECK(shifted == doctest::Approx(base).epsilon(1e-13));

    // n = 2 is similarity invariant; n = 3 scales like 1/length.
    const BallDomain disk2(2, pt(0, 0), 2.0);
    CHECK(harmonic_green(disk2, pt(0.6, 0.2), pt(-1.0, 0.4)) ==
          doctest::Approx(harmonic_green(disk, pt(0.3, 0.1), pt(-0.5, 0.2)))
              .epsilon(1e-13));
    const BallDomain ball2(3, pt(0, 0, 0), 2.0);
    CHECK(harmonic_green(ball2, pt(0.5, 0.2, 0), pt(-0.6, 0.4, 0.2)) ==
          doctest::Approx(0.5 * harmonic_green(ball, pt(0.25, 0.1, 0),
                                               pt(-0.3, 0.2, 0.1)))
              .epsilon(1e-13));
  }

  SUBCASE("argument screening") {
    CHECK_THROWS_AS(harmonic_green(ball, pt(0, 0, 0), pt(0, 0, 0)), RegimeError);
    CHECK_THROWS_AS(harmonic_green(ball, pt(0.3, 0.2, 0.1),
                                   pt(0.3, 0.2, 0.1)),
                    RegimeError);
    CHECK_THROWS_AS(harmonic_green(ball, pt(2, 0, 0), pt(0.5, 0, 0)),
                    PreconditionError);
    CHECK_THROWS_AS(harmonic_green(ball, pt(0, 0, 0), pt(1.0, 0, 0)),
                    PreconditionError);
  }
}

TEST_CASE("iterated kernels") {
  const BallDomain disk(2, pt(0, 0), 1.0);
  const BallDomain ball(3, pt(0, 0, 0), 1.0);

  SUBCASE("depth one returns the harmonic kernel") {
    const BallPoint x = pt(0.2, 0.1, -0.3);
    const BallPoint y = pt(-0.4, 0.3, 0.2);
    CHECK(iterated_kernel(ball, constant_c(1.0), 1, x, y) ==
          harmonic_green(ball, x, y));
  }

  SUBCASE("zero coefficient annihilates depth two") {
    CHECK(iterated_kernel(disk, constant_c(0.0), 2, pt(0.3, 0), pt(-0.2, 0.4)) ==
          0.0);
    CHECK(iterated_kernel(ball, constant_c(0.0), 2, pt(0.3, 0, 0),
                          pt(-0.2, 0.4, 0.1)) == 0.0);
  }

  SUBCASE("closed-form value through the spherical mean") {
    // For a unit coefficient on the unit ball with x at the center, averaging
    // the kernel over spheres reduces the second kernel to
    //   g2(0, y) = (1/4pi) [ int_0^|y| (1/r - 1)(1/|y| - 1) r^2 dr
    //                      + int_|y|^1 (1/r - 1)^2 r^2 dr ],
    // which at |y| = 1/2 equals (1/4pi)/8, i.e. pi/2 in the reported scale.
    const double reported =
        iterated_kernel(ball, constant_c(1.0), 2, pt(0, 0, 0), pt(0.5, 0, 0));
    CHECK(reported == doctest::Approx(0.5 * kPi).epsilon(3e-4));
  }

  SUBCASE("depth two stays bounded near the diagonal") {
    const BallPoint x3 = pt(0.1, 0, 0);
    std::vector<double> lead, second;
    for (const double d : {0.2, 0.05, 0.01}) {
      const BallPoint y = pt(0.1 + d, 0, 0);
      lead.push_back(harmonic_green(ball, x3, y));
      second.push_back(iterated_kernel(ball, constant_c(1.0), 2, x3, y));
    }
    CHECK(lead.back() / lead.front() > 15.0);      // the kernel itself blows up
    CHECK(second.back() / second.front() < 1.5);   // the iterate does not
    CHECK(second.back() < 2.0 * second.front());

    const BallPoint x2 = pt(0.1, 0);
    std::vector<double> second2;
    for (const double d : {0.2, 0.05, 0.01}) {
      second2.push_back(
          iterated_kernel(disk, constant_c(1.0), 2, x2, pt(0.1 + d, 0)));
    }
    CHECK(second2.back() < 2.0 * second2.front());
  }

  SUBCASE("symmetry") {
    const BallPoint x = pt(0.25, -0.1);
    const BallPoint y = pt(-0.3, 0.35);
    const double ab = iterated_kernel(disk, constant_c(0.7), 2, x, y);
    const double ba = iterated_kernel(disk, constant_c(0.7), 2, y, x);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
  }

  SUBCASE("quadrature refinement settles") {
    const BallPoint x = pt(0.2, 0.1);
    const BallPoint y = pt(-0.4, 0.3);
    const double base = iterated_kernel(disk, constant_c(1.0), 2, x, y);
    KernelQuadrature fine;
    fine.angle_nodes = 96;
    fine.radial_nodes = 32;
    const double refined = iterated_kernel(disk, constant_c(1.0), 2, x, y, fine);
    CHECK(base == doctest::Approx(refined).epsilon(3e-4));

    // A loose gate passes, a strict gate on a coarse rule reports drift.
    KernelQuadrature gated;
    gated.refine_tol = 0.5;
    CHECK_NOTHROW(iterated_kernel(disk, constant_c(1.0), 2, x, y, gated));
    KernelQuadrature strict;
    strict.angle_nodes = 16;
    strict.radial_nodes = 8;
    strict.refine_tol = 1e-9;
    CHECK_THROWS_AS(iterated_kernel(disk, constant_c(1.0), 2, x, y, strict),
                    AccuracyError);
  }

  SUBCASE("argument screening") {
    CHECK_THROWS_AS(iterated_kernel(disk, BallPotential{}, 2, pt(0.1, 0),
                                    pt(0.3, 0)),
                    PreconditionError);
    CHECK_THROWS_AS(iterated_kernel(disk, constant_c(1.0), 0, pt(0.1, 0),
                                    pt(0.3, 0)),
                    PreconditionError);
    CHECK_THROWS_AS(iterated_kernel(disk, constant_c(1.0), 7, pt(0.1, 0),
                                    pt(0.3, 0)),
                    PreconditionError);
    CHECK_THROWS_AS(iterated_kernel(disk, constant_c(1.0), 2, pt(1.5, 0),
                                    pt(0.3, 0)),
                    PreconditionError);
  }
}

TEST_CASE("alternating series evaluator") {
  const BallDomain disk(2, pt(0, 0), 1.0);
  const BallDomain ball(3, pt(0, 0, 0), 1.0);

  SUBCASE("zero coefficient reproduces the harmonic kernel exactly") {
    const NeumannGreen green = neumann_green(disk, constant_c(0.0));
    CHECK(green.terms_used() == 1);
    CHECK(green.contraction() == 0.0);
    CHECK(green.remainder_bound() == 0.0);
    const BallPoint x = pt(0.3, -0.2);
    const BallPoint y = pt(-0.1, 0.45);
    CHECK(green.evaluate(x, y) == harmonic_green(disk, x, y));
    CHECK(green.evaluate_unit_source(x, y) ==
          harmonic_green_unit_source(disk, x, y));
  }

  SUBCASE("frozen disk values") {
    const BallPoint x = polar(0.3, 0.2);
    const BallPoint y = polar(0.6, 2.1);
    const NeumannGreen g01 = neumann_green(disk, constant_c(0.1));
    CHECK(g01.evaluate_unit_source(x, y) ==
          doctest::Approx(kDiskC01Pair).epsilon(5e-4));
    CHECK(g01.evaluate_unit_source(pt(0, 0), pt(0.5, 0)) ==
          doctest::Approx(kDiskC01Center).epsilon(5e-4));
    const NeumannGreen g02 = neumann_green(disk, constant_c(0.2));
    CHECK(g02.evaluate_unit_source(x, y) ==
          doctest::Approx(kDiskC02Pair).epsilon(5e-4));

    // Absorption strictly lowers the kernel.
    CHECK(g01.evaluate(x, y) < harmonic_green(disk, x, y));
    CHECK(g02.evaluate(x, y) < g01.evaluate(x, y));
    CHECK(g01.evaluate(pt(0.4, 0.2), pt(-0.3, 0.1)) <
          harmonic_green(disk, pt(0.4, 0.2), pt(-0.3, 0.1)));
  }

  SUBCASE("unit coefficient on the ball matches the radial oracle") {
    // Independent route: the one-dimensional pair solved by the radial
    // engine, combined to vanish at the boundary and carry a unit source:
    //   G(rho) = (W(rho) - V(rho)) / (4 pi e)   for q = 1, R = 1.
    const RadialPair pair =
        solve_pair(RadialIndex{3, 0.0}, RadialPotential::constant(1.0));
    auto oracle = [&](double rho) {
      return (std::exp(pair.log_w(rho)) - std::exp(pair.log_v(rho))) /
             (4.0 * kPi * std::exp(1.0));
    };

    KernelQuadrature quad;
    quad.angle_nodes = 24;
    quad.radial_nodes = 10;
    const NeumannGreen green = neumann_green(ball, constant_c(1.0), 3, 8e-3, quad);
    CHECK(green.terms_used() == 3);
    CHECK(green.contraction() > 0.1);
    CHECK(green.contraction() < 0.25);
    CHECK(green.remainder_bound() <= 8e-3);

    CHECK(green.evaluate_unit_source(pt(0, 0, 0), pt(0.5, 0, 0)) ==
          doctest::Approx(kBallC1Half).epsilon(1e-3));
    for (const double rho : {0.3, 0.5, 0.7}) {
      CHECK(green.evaluate_unit_source(pt(0, 0, 0), pt(rho, 0, 0)) ==
            doctest::Approx(oracle(rho)).epsilon(1e-3));
    }
  }

  SUBCASE("partial sums bracket the value") {
    const BallPoint x = polar(0.3, 0.2);
    const BallPoint y = polar(0.6, 2.1);
    const NeumannGreen green = neumann_green(disk, constant_c(0.2));
    const std::vector<double> t = green.series_terms(x, y, 4);
    REQUIRE(t.size() == 4);
    for (const double term : t) CHECK(term >= 0.0);
    const double s1 = t[0];
    const double s2 = t[0] - t[1];
    const double s3 = s2 + t[2];
    const double s4 = s3 - t[3];
    const double value = green.evaluate(x, y);
    CHECK(s2 < s4);
    CHECK(s4 <= value);
    CHECK(value <= s3);
    CHECK(s3 < s1);
  }

  SUBCASE("contraction failure is reported") {
    CHECK_THROWS_AS(neumann_green(disk, constant_c(100.0)), SmallnessError);
  }

  SUBCASE("term cap failure is reported") {
    CHECK_THROWS_AS(neumann_green(disk, constant_c(1.0), 2, 1e-6),
                    ConvergenceError);
  }

  SUBCASE("input screening") {
    CHECK_THROWS_AS(neumann_green(disk, BallPotential{}), PreconditionError);
    CHECK_THROWS_AS(neumann_green(disk, constant_c(0.1), 0), PreconditionError);
    CHECK_THROWS_AS(neumann_green(disk, constant_c(0.1), 7), PreconditionError);
    CHECK_THROWS_AS(neumann_green(disk, constant_c(0.1), 3, -1.0),
                    PreconditionError);
    CHECK_THROWS_AS(neumann_green(disk, constant_c(-0.5)), PreconditionError);
    CHECK_THROWS_AS(
        neumann_green(disk, constant_c(std::nan(""))), PreconditionError);

    const NeumannGreen green = neumann_green(disk, constant_c(0.1));
    CHECK_THROWS_AS(green.evaluate(pt(2, 0), pt(0.1, 0)), PreconditionError);
    CHECK_THROWS_AS(green.evaluate(pt(0.1, 0), pt(0.1, 0)), RegimeError);
    CHECK_THROWS_AS(green.series_terms(pt(0.1, 0), pt(0.3, 0), 7),
                    PreconditionError);
  }

  SUBCASE("evaluations are deterministic and copies agree") {
    const NeumannGreen a = neumann_green(disk, constant_c(0.1));
    const NeumannGreen b = a;  // immutable value semantics
    const BallPoint x = pt(0.25, 0.3);
    const BallPoint y = pt(-0.4, -0.1);
    CHECK(a.evaluate(x, y) == b.evaluate(x, y));
    CHECK(a.evaluate(x, y) == a.evaluate(x, y));
  }
}

TEST_CASE("ordered coefficients order the kernels") {
  const BallDomain disk(2, pt(0, 0), 1.0);
  const BallDomain ball(3, pt(0, 0, 0), 1.0);
  const std::vector<std::pair<BallPoint, BallPoint>> pairs = {
      {polar(0.3, 0.2), polar(0.6, 2.1)},
      {pt(0, 0), pt(0.5, 0)},
  };

  SUBCASE("strict ordering gives strictly positive margins") {
    const ComparisonReport report =
        comparison_check(disk, constant_c(0.0), constant_c(0.2), pairs);
    REQUIRE(report.margins.size() == 2);
    CHECK(report.min_margin > 0.0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(report.lower[i] ==
            doctest::Approx(harmonic_green(disk, pairs[i].first,
                                           pairs[i].second))
                .epsilon(1e-12));
      CHECK(report.margins[i] == doctest::Approx(report.lower[i] -
                                                 report.upper[i])
                                     .epsilon(1e-14));
      CHECK(report.upper[i] < report.lower[i]);
    }
  }

  SUBCASE("resolvent reconstruction closes") {
    const ComparisonReport report =
        comparison_check(disk, constant_c(0.05), constant_c(0.1), pairs);
    CHECK(report.min_margin > 0.0);
    CHECK(report.reconstruction_residual < 1e-3);
  }

  SUBCASE("a non-radial coefficient is sandwiched in the ball") {
    auto wedge = [](const BallPoint& p) { return 0.3 * (1.0 + 0.5 * p[0]); };
    const std::vector<std::pair<BallPoint, BallPoint>> one = {
        {pt(0.2, 0.3, 0.1), pt(-0.1, 0.2, 0.0)}};
    const ComparisonReport below =
        comparison_check(ball, constant_c(0.15), wedge, one);
    CHECK(below.min_margin > 0.0);
    CHECK(below.reconstruction_residual < 5e-3);
    const ComparisonReport above =
        comparison_check(ball, wedge, constant_c(0.45), one);
    CHECK(above.min_margin > 0.0);
  }

  SUBCASE("screening") {
    CHECK_THROWS_AS(
        comparison_check(disk, constant_c(0.2), constant_c(0.1), pairs),
        PreconditionError);
    CHECK_THROWS_AS(comparison_check(disk, constant_c(0.0), constant_c(0.1),
                                     {}),
                    PreconditionError);
    CHECK_THROWS_AS(
        comparison_check(disk, BallPotential{}, constant_c(0.1), pairs),
        PreconditionError);
    const std::vector<std::pair<BallPoint, BallPoint>> outside = {
        {pt(1.5, 0), pt(0.2, 0)}};
    CHECK_THROWS_AS(
        comparison_check(disk, constant_c(0.0), constant_c(0.1), outside),
        PreconditionError);
  }
}

TEST_CASE("heat balance of the unit-source kernel") {
  const BallDomain disk(2, pt(0, 0), 1.0);
  const BallDomain ball(3, pt(0, 0, 0), 1.0);

  SUBCASE("pure boundary outflow without absorption") {
    for (const BallPoint& x :
         {pt(0, 0, 0), pt(0.3, 0.1, -0.2), pt(-0.5, 0.2, 0.1)}) {
      const FluxReport report = flux_identity_check(ball, constant_c(0.0), x, 1e-4);
      CHECK(report.residual < 1e-4);
      CHECK(report.volume == 0.0);
      CHECK(report.boundary == doctest::Approx(1.0).epsilon(2e-4));
    }
    const FluxReport flat = flux_identity_check(disk, constant_c(0.0),
                                                pt(0.2, -0.3), 1e-4);
    CHECK(flat.residual < 1e-4);
  }

  SUBCASE("absorption shifts the split but keeps the balance") {
    const FluxReport center =
        flux_identity_check(disk, constant_c(0.1), pt(0, 0));
    CHECK(center.residual < 1e-3);
    CHECK(center.volume > 0.0);

    double previous_boundary = 2.0;
    double previous_volume = -1.0;
    for (const double c0 : {0.0, 0.05, 0.1, 0.2}) {
      const FluxReport report =
          flux_identity_check(disk, constant_c(c0), pt(0, 0));
      CHECK(report.residual < 1e-3);
      CHECK(report.boundary < previous_boundary);
      CHECK(report.volume > previous_volume);
      previous_boundary = report.boundary;
      previous_volume = report.volume;
    }

    const FluxReport off =
        flux_identity_check(disk, constant_c(0.1), pt(0.4, 0.2));
    CHECK(off.residual < 1e-3);

    const FluxReport ball_report =
        flux_identity_check(ball, constant_c(0.1), pt(0, 0, 0));
    CHECK(ball_report.residual < 1e-3);
  }

  SUBCASE("step underflow and screening") {
    CHECK_THROWS_AS(flux_identity_check(disk, constant_c(0.1), pt(0, 0), 1e-12),
                    StepSizeError);
    CHECK_THROWS_AS(flux_identity_check(disk, constant_c(0.1), pt(2, 0)),
                    PreconditionError);
    CHECK_THROWS_AS(flux_identity_check(disk, constant_c(0.1), pt(0, 0), -1.0),
                    PreconditionError);
    CHECK_THROWS_AS(flux_identity_check(disk, BallPotential{}, pt(0, 0)),
                    PreconditionError);
  }
}

TEST_CASE("non-radial coefficients keep kernel structure") {
  const BallDomain ball(3, pt(0, 0, 0), 1.0);
  auto wedge = [](const BallPoint& p) { return 0.3 * (1.0 + 0.5 * p[0]); };

  KernelQuadrature quad;
  quad.angle_nodes = 32;
  quad.radial_nodes = 12;
  const NeumannGreen green = neumann_green(ball, wedge, 3, 5e-3, quad);

  SUBCASE("dominated by the harmonic kernel") {
    const BallPoint x = pt(0.2, 0.3, 0.1);
    const BallPoint y = pt(-0.1, 0.2, 0.0);
    CHECK(green.evaluate(x, y) < harmonic_green(ball, x, y));
    CHECK(green.evaluate(x, y) > 0.0);
  }

  SUBCASE("inherits the coefficient's mirror symmetry") {
    // The coefficient does not depend on the second or third coordinate, so
    // reflecting both arguments across the plane y = 0 preserves the kernel.
    const BallPoint x = pt(0.2, 0.3, 0.1);
    const BallPoint y = pt(-0.1, 0.2, 0.0);
    const BallPoint xr = pt(0.2, -0.3, 0.1);
    const BallPoint yr = pt(-0.1, -0.2, 0.0);
    CHECK(green.evaluate(x, y) ==
          doctest::Approx(green.evaluate(xr, yr)).epsilon(1e-3));
  }
}
