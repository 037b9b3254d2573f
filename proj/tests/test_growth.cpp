#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "conefield/common.hpp"
#include "conefield/growth.hpp"

using namespace conefield;

namespace {

const SphericalDomain kHalfPlane{Sector2D{0.0, kPi}};

RadialPair make_pair(double lambda, const RadialPotential& q) {
  return solve_pair(RadialIndex{2, lambda}, q, SolveOptions{});
}

}  // namespace

TEST_CASE("ground-mode sampler has unit mass ratio at every radius") {
  const auto q = RadialPotential::constant(1.0);
  const auto ground = make_pair(1.0, q);
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 1);
  const auto u = ConeFunctionSampler::from_mode(ground, phi[0]);

  const std::vector<double> radii = {0.5, 1.0, 3.0, 10.0, 50.0};
  const auto report = nevanlinna_ratio(u, kHalfPlane, phi[0], ground, radii);
  REQUIRE(report.ratios.size() == radii.size());
  for (double ratio : report.ratios) {
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(report.min_ratio == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(report.trend_slope) < 1e-8);
}

TEST_CASE("negative sampler has zero positive-part mass") {
  const auto q = RadialPotential::zero();
  const auto ground = make_pair(1.0, q);
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 1);
  const ConeFunctionSampler u("minus-one", FunctionClass::kGeneric,
                              [](const ConePoint&) { return -1.0; });
  const auto report = nevanlinna_ratio(u, kHalfPlane, phi[0], ground,
                                       {1.0, 4.0, 16.0});
  for (double ratio : report.ratios) CHECK(ratio == 0.0);
  CHECK(report.min_ratio == 0.0);
}

TEST_CASE("two-mode mixture: clipped mass against a fine quadrature oracle") {
  const auto q = RadialPotential::zero();
  const auto pair0 = make_pair(1.0, q);
  const auto pair1 = make_pair(4.0, q);
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 2);
  const ConeFunctionSampler u(
      "mixture", FunctionClass::kHarmonic, [&](const ConePoint& p) {
        return 0.5 * std::exp(pair0.log_v(p.r)) * phi[0].value(p.theta, 0.0) -
               std::exp(pair1.log_v(p.r)) * phi[1].value(p.theta, 0.0);
      });

  const std::vector<double> radii = {1.0, 2.0, 4.0, 8.0};
  const auto clipped = nevanlinna_ratio(u, kHalfPlane, phi[0], pair0, radii);
  for (double ratio : clipped.ratios) {
    CHECK(ratio >= 0.0);
    CHECK(ratio < 50.0);
  }

  // Independent positive-part quadrature at r = 2: plain trapezoid on a
  // 20001-node angular grid.
  const double r = 2.0;
  const std::size_t nodes = 20001;
  const double h = kPi / (nodes - 1);
  double mass = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double theta = j * h;
    const double weight = (j == 0 || j + 1 == nodes) ? 0.5 : 1.0;
    mass += weight * std::max(u(ConePoint{r, theta, 0.0}), 0.0) *
            phi[0].value(theta, 0.0);
  }
  mass *= h;
  CHECK(clipped.ratios[1] ==
        doctest::Approx(mass / std::exp(pair0.log_v(r))).epsilon(1e-4));

  // Signed variant: orthogonality leaves exactly the ground component.
  const auto signed_report =
      nevanlinna_ratio(u, kHalfPlane, phi[0], pair0, radii, false);
  for (double ratio : signed_report.ratios) {
    CHECK(ratio == doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("a Green-potential column has vanishing relative growth") {
  auto ev = build_evaluator(kHalfPlane, RadialPotential::zero(), 40);
  const auto ground = make_pair(1.0, RadialPotential::zero());
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 1);
  const auto u = ConeFunctionSampler::from_green_potential(
      ev, {{ConePoint{0.3, 0.5 * kPi, 0.0}, 1.0}});

  const std::vector<double> radii = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  const auto report = nevanlinna_ratio(u, kHalfPlane, phi[0], ground, radii);
  for (std::size_t j = 0; j + 1 < radii.size(); ++j) {
    CHECK(report.ratios[j + 1] < report.ratios[j]);
  }
  CHECK(report.ratios.back() < 1e-2 * report.ratios.front());
  CHECK(report.trend_slope < 0.0);
  CHECK(report.min_ratio == report.ratios.back());

  CHECK_THROWS_AS(ConeFunctionSampler::from_green_potential(
                      ev, {{ConePoint{0.3, 1.0, 0.0}, -1.0}}),
                  PreconditionError);
}

TEST_CASE("mode samplers vanish at the angular boundary") {
  const auto q = RadialPotential::constant(1.0);
  const auto ground = make_pair(1.0, q);
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 1);
  const auto u = ConeFunctionSampler::from_mode(ground, phi[0]);
  const double scale = u(ConePoint{2.0, 0.5 * kPi, 0.0});
  CHECK(std::abs(u(ConePoint{2.0, 1e-9, 0.0})) < 1e-6 * scale);
  CHECK(std::abs(u(ConePoint{2.0, kPi - 1e-9, 0.0})) < 1e-6 * scale);
  CHECK(u.declared_class() == FunctionClass::kHarmonic);
}

TEST_CASE("radial projection solves the one-dimensional equation") {
  const auto q = RadialPotential::constant(1.0);
  const auto pair0 = make_pair(1.0, q);
  const auto pair1 = make_pair(4.0, q);
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 2);
  const auto radii = linspace(1.0, 1.4, 401);

  SUBCASE("pure ground mode") {
    const auto u = ConeFunctionSampler::from_mode(pair0, phi[0]);
    const auto out =
        radial_projection_residual(u, kHalfPlane, phi[0], q, 1.0, radii);
    CHECK(out.max_residual < 1e-6);
    for (std::size_t j = 0; j < radii.size(); j += 80) {
      CHECK(out.y0[j] ==
            doctest::Approx(std::exp(pair0.log_v(radii[j]))).epsilon(1e-8));
    }
  }

  SUBCASE("orthogonal mode projects to zero") {
    const auto u = ConeFunctionSampler::from_mode(pair1, phi[1]);
    const auto out =
        radial_projection_residual(u, kHalfPlane, phi[0], q, 1.0, radii);
    for (double y : out.y0) CHECK(std::abs(y) < 1e-10);
  }

  SUBCASE("mixture keeps only the ground part") {
    const ConeFunctionSampler u(
        "sum", FunctionClass::kHarmonic, [&](const ConePoint& p) {
          return std::exp(pair0.log_v(p.r)) * phi[0].value(p.theta, 0.0) +
                 std::exp(pair1.log_v(p.r)) * phi[1].value(p.theta, 0.0);
        });
    const auto out =
        radial_projection_residual(u, kHalfPlane, phi[0], q, 1.0, radii);
    CHECK(out.max_residual < 1e-6);
    CHECK(out.y0[200] ==
          doctest::Approx(std::exp(pair0.log_v(radii[200]))).epsilon(1e-8));
  }

  SUBCASE("coarse spacing is rejected, not reported") {
    const auto u = ConeFunctionSampler::from_mode(pair0, phi[0]);
    CHECK_THROWS_AS(radial_projection_residual(u, kHalfPlane, phi[0], q, 1.0,
                                               linspace(1.0, 5.0, 9)),
                    StepSizeError);
  }

  SUBCASE("class tag is enforced") {
    const ConeFunctionSampler u("untagged", FunctionClass::kGeneric,
                                [](const ConePoint&) { return 1.0; });
    CHECK_THROWS_AS(radial_projection_residual(u, kHalfPlane, phi[0], q, 1.0,
                                               radii),
                    PreconditionError);
  }

  SUBCASE("a genuine defect survives refinement and is reported") {
    const ConeFunctionSampler u(
        "squared", FunctionClass::kHarmonic, [&](const ConePoint& p) {
          return sqr(std::exp(pair0.log_v(p.r))) * phi[0].value(p.theta, 0.0);
        });
    const auto out =
        radial_projection_residual(u, kHalfPlane, phi[0], q, 1.0, radii);
    CHECK(out.max_residual > 1e-3);
  }
}

TEST_CASE("real spherical harmonics are orthonormal and match std") {
  // Orthonormality: Gauss-Legendre in cos(theta) (the products are
  // polynomials there) and a periodic trapezoid in the azimuth.
  const auto sphere_dot = [](int k1, int i1, int k2, int i2) {
    const std::size_t na = 128;
    return boost::math::quadrature::gauss<double, 128>::integrate(
        [&](double x) {
          const double theta = std::acos(x);
          double ring = 0.0;
          for (std::size_t b = 0; b < na; ++b) {
            const double az = 2.0 * kPi * (b + 0.5) / na;
            ring += real_harmonic(k1, i1, theta, az) *
                    real_harmonic(k2, i2, theta, az);
          }
          return ring * (2.0 * kPi / na);
        },
        -1.0, 1.0);
  };
  CHECK(sphere_dot(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sphere_dot(2, 3, 2, 3) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sphere_dot(3, 0, 3, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(sphere_dot(2, 3, 2, 1)) < 1e-12);
  CHECK(std::abs(sphere_dot(1, 0, 2, 0)) < 1e-12);

  // Cosine branches at zero azimuth against std::sph_legendre.
  for (int k : {1, 2, 4}) {
    for (int m = 1; m <= k; ++m) {
      const double theta = 0.8;
      const double mine = real_harmonic(k, 2 * m - 1, theta, 0.0);
      const double reference = std::sqrt(2.0) * std::sph_legendre(k, m, theta);
      CHECK(mine == doctest::Approx(reference).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(real_harmonic(2, 5, 1.0, 0.0), PreconditionError);
}

TEST_CASE("full-space expansion coefficients") {
  const std::vector<double> radii = {1.0, 3.0, 7.0, 15.0};

  SUBCASE("the radial entire solution has one constant coefficient") {
    const auto u = [](const ConePoint& p) {
      return std::sinh(p.r) / (p.r * std::sinh(1.0));
    };
    const auto table = liouville_coefficients(u, 1.0, 2, radii);
    const auto& base = table.row(0, 0);
    for (double value : base.values) {
      CHECK(value == doctest::Approx(std::sqrt(4.0 * kPi)).epsilon(1e-6));
    }
    for (const auto& row : table.rows) {
      if (row.degree == 0) continue;
      for (double value : row.values) CHECK(std::abs(value) < 1e-8);
    }
  }

  SUBCASE("bounded samplers lose every coefficient as r grows") {
    const auto table = liouville_coefficients(
        [](const ConePoint&) { return 1.0; }, 1.0, 4,
        {5.0, 8.0, 12.0, 20.0, 30.0});
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 5; ++j) {
      const double level = table.max_abs(j, 4);
      CHECK(level <= previous);
      previous = level;
    }
    CHECK(table.max_abs(4, 4) < 1e-6);
  }

  SUBCASE("degree-one mode keeps only its own row") {
    const auto pair = solve_pair(RadialIndex{3, 2.0},
                                 RadialPotential::constant(1.0),
                                 SolveOptions{});
    const auto u = [&](const ConePoint& p) {
      return std::exp(pair.log_v(p.r)) *
             real_harmonic(1, 1, p.theta, p.azimuth);
    };
    const auto table = liouville_coefficients(u, 1.0, 2, radii);
    for (double value : table.row(1, 1).values) {
      CHECK(value == doctest::Approx(1.0).epsilon(1e-6));
    }
    for (const auto& row : table.rows) {
      if (row.degree == 1 && row.index == 1) continue;
      for (double value : row.values) CHECK(std::abs(value) < 1e-8);
    }
  }

  CHECK_THROWS_AS(liouville_coefficients(
                      [](const ConePoint&) { return 1.0; }, -0.5, 1, radii),
                  PreconditionError);
}

TEST_CASE("two-parameter radial fits of positive solutions") {
  const std::vector<double> radii = {0.5, 1.0, 2.0, 4.0, 8.0};

  SUBCASE("pure ground mode pins a = 1, everything else at zero") {
    const auto ev = build_evaluator(kHalfPlane, RadialPotential::zero(), 5);
    const auto u = ConeFunctionSampler::from_mode(*ev.modes()[0].radial,
                                                  ev.modes()[0].eigen);
    const auto fit =
        positive_solution_projection(u, kHalfPlane, ev.modes(), radii);
    REQUIRE(fit.positive);
    REQUIRE(fit.modes.size() == 6);
    CHECK(fit.modes[0].a == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(fit.modes[0].b) < 1e-6);
    CHECK(fit.modes[0].residual < 1e-8);
    for (std::size_t nu = 1; nu < fit.modes.size(); ++nu) {
      CHECK(std::abs(fit.modes[nu].a) < 1e-6);
      CHECK(std::abs(fit.modes[nu].b) < 1e-6);
    }
  }

  SUBCASE("sign-changing mixtures are flagged, not fitted") {
    const auto ev = build_evaluator(kHalfPlane, RadialPotential::zero(), 5);
    const ConeFunctionSampler u(
        "tilted", FunctionClass::kHarmonic, [&](const ConePoint& p) {
          return std::exp(ev.modes()[0].radial->log_v(p.r)) *
                     ev.modes()[0].eigen.value(p.theta, 0.0) +
                 0.1 * std::exp(ev.modes()[1].radial->log_v(p.r)) *
                     ev.modes()[1].eigen.value(p.theta, 0.0);
        });
    const auto fit =
        positive_solution_projection(u, kHalfPlane, ev.modes(), radii);
    CHECK_FALSE(fit.positive);
    CHECK(fit.min_value <= 0.0);
    CHECK(fit.modes.empty());
    CHECK(u(fit.violation) <= 0.0);
  }

  SUBCASE("slowly varying potential keeps the ground coefficient") {
    const auto ev =
        build_evaluator(kHalfPlane, RadialPotential::log_perturbation(1.0), 3);
    const auto u = ConeFunctionSampler::from_mode(*ev.modes()[0].radial,
                                                  ev.modes()[0].eigen);
    const auto fit =
        positive_solution_projection(u, kHalfPlane, ev.modes(), radii);
    REQUIRE(fit.positive);
    CHECK(fit.modes[0].a == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(fit.modes[0].residual < 1e-6);
  }

  SUBCASE("nearly coincident radii are rejected") {
    const auto ev = build_evaluator(kHalfPlane, RadialPotential::zero(), 2);
    const auto u = ConeFunctionSampler::from_mode(*ev.modes()[0].radial,
                                                  ev.modes()[0].eigen);
    CHECK_THROWS_AS(positive_solution_projection(u, kHalfPlane, ev.modes(),
                                                 {1.0, 1.0 + 1e-9}),
                    ConstructionError);
  }
}

TEST_CASE("pointwise majorant checks") {
  const auto q = RadialPotential::constant(1.0);
  const auto pair0 = make_pair(1.0, q);
  const auto pair2 = make_pair(9.0, q);
  const auto phi = sector_eigenpairs(kHalfPlane.sector(), 3);
  const auto radial = [&](double r) { return std::exp(pair0.log_v(r)); };
  const auto phi_hat = [](const ConePoint& p) { return std::sin(p.theta); };

  std::vector<ConePoint> grid;
  for (double r : logspace(1.0, 100.0, 12)) {
    for (double theta : linspace(0.1 * kPi, 0.9 * kPi, 9)) {
      grid.push_back(ConePoint{r, theta, 0.0});
    }
  }

  SUBCASE("equality case sits at zero margin") {
    const ConeFunctionSampler u(
        "extremal", FunctionClass::kHarmonic, [&](const ConePoint& p) {
          return 2.0 * radial(p.r) * std::sin(p.theta);
        });
    const auto check = pl_bound_check(u, 0.0, 2.0, radial, phi_hat, grid);
    CHECK(check.ok);
    CHECK(std::abs(check.worst_margin) <=
          1e-8 * (1.0 + 2.0 * radial(check.worst_point.r)));
  }

  SUBCASE("strictly smaller function has negative margin") {
    const ConeFunctionSampler u(
        "deficient", FunctionClass::kHarmonic, [&](const ConePoint& p) {
          return 2.0 * radial(p.r) * std::sin(p.theta) - 0.01 * radial(p.r);
        });
    const auto check = pl_bound_check(u, 0.0, 2.0, radial, phi_hat, grid);
    CHECK(check.ok);
    CHECK(check.worst_margin < 0.0);
  }

  SUBCASE("fast mode defeats a ground-mode majorant") {
    const ConeFunctionSampler u(
        "fast-mode", FunctionClass::kHarmonic, [&](const ConePoint& p) {
          return std::exp(pair2.log_v(p.r)) * phi[2].value(p.theta, 0.0);
        });
    const auto check = pl_bound_check(u, 0.0, 1.0, radial, phi_hat, grid);
    CHECK_FALSE(check.ok);
    CHECK(check.worst_margin > 0.0);
  }

  SUBCASE("unnormalized angular profiles are rejected") {
    CHECK_THROWS_AS(
        pl_bound_check(ConeFunctionSampler("one", FunctionClass::kGeneric,
                                           [](const ConePoint&) {
                                             return 1.0;
                                           }),
                       0.0, 1.0, radial,
                       [](const ConePoint& p) {
                         return 1.5 * std::sin(p.theta);
                       },
                       grid),
        PreconditionError);
  }
}
