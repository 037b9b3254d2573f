// Tests for growth classification and closed asymptotic laws.
//
// Test-local oracles (closed forms derived by hand):
//   * s(r) = k + r^{-1} gives the correction integral J(r) = 1 - 1/r, so the
//     power-limit law is r^{(2-n+chi_k)/2} exp{(1 - 1/r)/chi_k}.
//   * q(r) = a/(r^2(1+ln r)) gives J(r) = a ln(1+ln r), so for n=2,
//     lambda0=1, k=0 the law is r (1+ln r)^{a/2}.
//   * n=3, lambda=0, q=1: the exact pair is V = sinh(r)/(r sinh 1),
//     W = e^{1-r}/r, while the JWKB law gives r^{-1} e^{r-1}.
//   * n=2, lambda=1, q=r^2: y = r^{-1} e^{(r^2-1)/2} solves the radial
//     equation exactly, and the JWKB law reproduces it exactly as well.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <cmath>
#include <vector>

#include "conefield/asymptotics.hpp"
#include "conefield/common.hpp"
#include "conefield/potential.hpp"
#include "conefield/radial_ode.hpp"
#include "doctest.h"

using namespace conefield;

namespace {

// Oscillation of f over a log grid on [lo, hi].
template <typename F>
double log_grid_oscillation(const F& f, double lo, double hi, int points) {
  std::vector<double> values;
  values.reserve(points);
  for (double r : logspace(lo, hi, points)) values.push_back(f(r));
  return oscillation(values);
}

}  // namespace

TEST_CASE("classification of the built-in families") {
  SUBCASE("zero potential is power-like with limit 0") {
    const auto c = classify_growth(RadialPotential::zero(), 1.0, 1e4);
    CHECK(c.verdict == GrowthVerdict::kPowerLike);
    CHECK(c.k == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.diagnostics.relative_spread == doctest::Approx(0.0));
    CHECK(c.diagnostics.power_tail_integral == doctest::Approx(0.0));
  }

  SUBCASE("constant potential is rapid") {
    const auto c = classify_growth(RadialPotential::constant(1.0), 1.0, 1e4);
    CHECK(c.verdict == GrowthVerdict::kRapid);
    CHECK(c.diagnostics.s_nondecreasing);
    CHECK(c.diagnostics.rapid_integral_converged);
  }

  SUBCASE("growing power potential is rapid") {
    const auto c = classify_growth(RadialPotential::power(2.0, 1.0), 0.5, 1e3);
    CHECK(c.verdict == GrowthVerdict::kRapid);
  }

  SUBCASE("inverse-square perturbation: limit and tail integral") {
    const auto c =
        classify_growth(RadialPotential::inverse_square_plus(3.0, 1.0), 1.0,
                        1e4, 400);
    CHECK(c.verdict == GrowthVerdict::kPowerLike);
    CHECK(c.k == doctest::Approx(3.0).epsilon(1e-12));
    // Integral of (s-3)^2 d ln r = Integral e^{-2x} dx over [0, ln 1e4].
    const double exact = 0.5 * (1.0 - std::pow(1e4, -2.0));
    CHECK(c.diagnostics.power_tail_integral ==
          doctest::Approx(exact).epsilon(5e-4));
    CHECK(c.diagnostics.power_tail_converged);
  }

  SUBCASE("logarithmic perturbation is power-like with limit 0") {
    const auto c =
        classify_growth(RadialPotential::log_perturbation(0.5), 1.0, 1e4);
    CHECK(c.verdict == GrowthVerdict::kPowerLike);
    CHECK(c.k == doctest::Approx(0.0).epsilon(1e-12));
    // Spread of 1/(1+ln r) over the final decade is well above 10%: only the
    // verified hint rescues the classification.
    CHECK(c.diagnostics.relative_spread > 0.10);
    CHECK_FALSE(c.diagnostics.tag_conflict);
  }
}

TEST_CASE("classification without hints infers the limit and decay rate") {
  const RadialPotential q(
      "custom", [](double r) { return (2.0 + 5.0 * std::pow(r, -1.5)) / (r * r); },
      PotentialHints{GrowthClass::kUnspecified, 0.0, true});
  const auto c = classify_growth(q, 1.0, 1e4);
  CHECK(c.verdict == GrowthVerdict::kPowerLike);
  CHECK(c.k == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(c.diagnostics.fitted_decay == doctest::Approx(1.5).epsilon(0.03));

  const RadialPotential lin("linear", [](double r) { return r; },
                            PotentialHints{GrowthClass::kUnspecified, 0.0,
                                           true});
  const auto cl = classify_growth(lin, 1.0, 1e4);
  CHECK(cl.verdict == GrowthVerdict::kRapid);
}

TEST_CASE("classification flags unverifiable hints") {
  // Claims a finite limit but is actually a constant potential.
  const RadialPotential forged("forged", [](double) { return 1.0; },
                               PotentialHints{GrowthClass::kPowerLike, 7.0,
                                              true});
  const auto c = classify_growth(forged, 1.0, 1e4);
  CHECK(c.verdict == GrowthVerdict::kIndeterminate);
  CHECK(c.diagnostics.tag_conflict);

  // Claims rapid growth but decays.
  const RadialPotential slow("slow", [](double r) { return std::pow(r, -3.0); },
                             PotentialHints{GrowthClass::kRapid, 0.0, true});
  const auto cs = classify_growth(slow, 1.0, 1e4);
  CHECK(cs.verdict == GrowthVerdict::kIndeterminate);
  CHECK(cs.diagnostics.tag_conflict);
}

TEST_CASE("classification rejects inadequate probes") {
  CHECK_THROWS_AS(classify_growth(RadialPotential::zero(), 1.0, 50.0),
                  PreconditionError);
  CHECK_THROWS_AS(classify_growth(RadialPotential::zero(), 1.0, 1e4, 10),
                  PreconditionError);
  CHECK_THROWS_AS(classify_growth(RadialPotential::zero(), -1.0, 1e4),
                  PreconditionError);
}

TEST_CASE("power-limit laws against closed forms") {
  SUBCASE("zero potential reduces to pure powers") {
    const auto [v, w] = power_limit_laws(3, 2.0, 0.0,
                                         RadialPotential::zero());
    CHECK(v.chi_k == doctest::Approx(3.0).epsilon(1e-14));
    for (double r : {0.25, 1.0, 2.0, 50.0}) {
      CHECK(v.log_value(r) == doctest::Approx(std::log(r)).epsilon(1e-10));
      CHECK(w.log_value(r) ==
            doctest::Approx(-2.0 * std::log(r)).epsilon(1e-10));
    }
  }

  SUBCASE("s = 3 + 1/r: correction integral 1 - 1/r") {
    const auto q = RadialPotential::inverse_square_plus(3.0, 1.0);
    const auto [v, w] = power_limit_laws(3, 2.0, 3.0, q);
    const double chi = std::sqrt(21.0);
    CHECK(v.chi_k == doctest::Approx(chi).epsilon(1e-14));
    for (double r : {1.0, 2.0, 10.0, 100.0, 1e4}) {
      const double expected =
          0.5 * (-1.0 + chi) * std::log(r) + (1.0 - 1.0 / r) / chi;
      CHECK(v.log_value(r) == doctest::Approx(expected).epsilon(1e-9));
      CHECK(w.log_value(r) ==
            doctest::Approx(0.5 * (-1.0 - chi) * std::log(r) -
                            (1.0 - 1.0 / r) / chi)
                .epsilon(1e-9));
    }
  }

  SUBCASE("logarithmic perturbation: law r (1+ln r)^{a/2}") {
    const auto q = RadialPotential::log_perturbation(1.0);
    const auto [v, w] = power_limit_laws(2, 1.0, 0.0, q);
    for (double r : {1.0, 10.0, 1e3, 1e4}) {
      const double expected =
          std::log(r) + 0.5 * std::log(1.0 + std::log(r));
      CHECK(v.log_value(r) == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  SUBCASE("product duality is exact") {
    const auto q = RadialPotential::inverse_square_plus(1.0, 2.0);
    const auto [v, w] = power_limit_laws(4, 3.0, 1.0, q);
    for (double r : {0.5, 1.0, 7.0, 400.0}) {
      CHECK(v.log_value(r) + w.log_value(r) + 2.0 * std::log(r) ==
            doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("confluent index is rejected") {
    CHECK_THROWS_AS(power_limit_laws(2, 0.0, 0.0, RadialPotential::zero()),
                    PreconditionError);
  }
}

TEST_CASE("power-limit law matches the computed pair up to a constant") {
  const RadialIndex index{3, 1.0};
  const auto q = RadialPotential::inverse_square_plus(1.0, 1.0);
  SolveOptions opts;
  opts.r_min = 0.5;
  opts.r_max = 1e4;
  const RadialPair pair = solve_pair(index, q, opts);
  const auto [v_law, w_law] = power_limit_laws(3, 1.0, 1.0, q);

  const double osc_v = log_grid_oscillation(
      [&](double r) { return pair.log_v(r) - v_law.log_value(r); }, 1e3, 1e4,
      200);
  const double osc_w = log_grid_oscillation(
      [&](double r) { return pair.log_w(r) - w_law.log_value(r); }, 1e3, 1e4,
      200);
  CHECK(osc_v < 1e-3);
  CHECK(osc_w < 1e-3);
}

TEST_CASE("JWKB laws against closed forms") {
  SUBCASE("constant potential in three dimensions") {
    const auto q = RadialPotential::constant(1.0);
    const auto [v, w] = jwkb_laws(3, 0.0, q, 1.0, 200.0);
    for (double r : {1.0, 3.0, 40.0}) {
      CHECK(v.log_value(r) ==
            doctest::Approx(-std::log(r) + (r - 1.0)).epsilon(1e-10));
      CHECK(w.log_value(r) ==
            doctest::Approx(-std::log(r) - (r - 1.0)).epsilon(1e-10));
    }
    // Exact pair: V = sinh(r)/(r sinh 1).  The log-difference from the law
    // settles to the constant ln(2 sinh(1)/e) up to e^{-2r}.
    const double settle = std::log(2.0 * std::sinh(1.0) / std::exp(1.0));
    for (double r : {10.0, 20.0, 50.0}) {
      const double exact = std::log(std::sinh(r) / (r * std::sinh(1.0)));
      CHECK(exact - v.log_value(r) ==
            doctest::Approx(-settle).epsilon(1e-8));
    }
  }

  SUBCASE("q = r^2 in two dimensions reproduces an exact solution") {
    const auto q = RadialPotential::power(1.0, 2.0);
    const auto [v, w] = jwkb_laws(2, 1.0, q, 1.0, 200.0);
    for (double r : {1.0, 2.0, 5.0, 10.0}) {
      const double expected = -std::log(r) + 0.5 * (r * r - 1.0);
      CHECK(v.log_value(r) == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  SUBCASE("product identity: V W = r^{1-n} q^{-1/2} exactly") {
    const auto q = RadialPotential::power(1.0, 2.0);
    const auto [v, w] = jwkb_laws(2, 1.0, q, 1.0, 200.0);
    for (double r : {1.0, 4.0, 90.0}) {
      const double s = q.scaled_profile(r);
      CHECK(v.log_value(r) + w.log_value(r) + 0.0 * std::log(r) +
                0.5 * std::log(s) ==
            doctest::Approx(0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("JWKB law matches the computed pair up to a constant") {
  SUBCASE("n=3, constant potential") {
    const RadialIndex index{3, 0.0};
    const auto q = RadialPotential::constant(1.0);
    SolveOptions opts;
    opts.r_max = 200.0;
    const RadialPair pair = solve_pair(index, q, opts);
    const auto [v_law, w_law] = jwkb_laws(3, 0.0, q, 1.0, 200.0);
    const double osc_v = log_grid_oscillation(
        [&](double r) { return pair.log_v(r) - v_law.log_value(r); }, 20.0,
        200.0, 200);
    const double osc_w = log_grid_oscillation(
        [&](double r) { return pair.log_w(r) - w_law.log_value(r); }, 20.0,
        200.0, 200);
    CHECK(osc_v < 1e-2);
    CHECK(osc_w < 1e-2);
  }

  SUBCASE("n=2, q = r^2") {
    const RadialIndex index{2, 1.0};
    const auto q = RadialPotential::power(1.0, 2.0);
    SolveOptions opts;
    opts.r_max = 200.0;
    const RadialPair pair = solve_pair(index, q, opts);
    const auto [v_law, w_law] = jwkb_laws(2, 1.0, q, 1.0, 200.0);
    const double osc_v = log_grid_oscillation(
        [&](double r) { return pair.log_v(r) - v_law.log_value(r); }, 20.0,
        200.0, 200);
    CHECK(osc_v < 1e-2);
  }
}

TEST_CASE("rapid growth dominates every power") {
  const RadialIndex index{3, 0.0};
  SolveOptions opts;
  opts.r_max = 200.0;
  const RadialPair pair =
      solve_pair(index, RadialPotential::constant(1.0), opts);
  for (double alpha : {1.0, 5.0, 10.0}) {
    double previous = -1e300;
    bool increasing = true;
    for (double r : logspace(50.0, 200.0, 50)) {
      const double value = pair.log_v(r) - alpha * std::log(r);
      if (value <= previous) increasing = false;
      previous = value;
    }
    CHECK(increasing);
  }
}

TEST_CASE("JWKB preconditions") {
  SUBCASE("shifted potential must stay positive") {
    CHECK_THROWS_AS(jwkb_laws(3, 0.0, RadialPotential::zero(), 1.0, 100.0),
                    PreconditionError);
  }

  SUBCASE("finite-difference path requires smoothness") {
    CHECK_THROWS_AS(jwkb_laws(3, 0.0,
                              RadialPotential::inverse_square_plus(1.0, 1.0),
                              1.0, 1e3),
                    PreconditionError);
  }

  SUBCASE("rapidly oscillating potentials are rejected") {
    const RadialPotential wobble(
        "wobble", [](double r) { return 2.0 + std::sin(r * r); },
        PotentialHints{GrowthClass::kUnspecified, 0.0, true});
    CHECK_THROWS_AS(jwkb_laws(3, 0.0, wobble, 1.0, 1e3), PreconditionError);
  }
}

TEST_CASE("power envelope check") {
  SUBCASE("pure power pair satisfies a zero-width envelope") {
    const RadialIndex index{3, 2.0};
    SolveOptions opts;
    opts.r_min = 1e-2;
    opts.r_max = 1e3;
    const RadialPair pair =
        solve_pair(index, RadialPotential::zero(), opts);
    const auto report = power_envelope_check(pair, 0.0, 1e-6);
    CHECK(report.holds);
    CHECK(std::abs(report.fitted_slope) < 1e-8);
  }

  SUBCASE("logarithmic perturbation: envelope holds only for slack eps") {
    const RadialIndex index{2, 1.0};
    SolveOptions opts;
    opts.r_max = 1e4;
    const RadialPair pair =
        solve_pair(index, RadialPotential::log_perturbation(0.5), opts);
    const auto ok = power_envelope_check(pair, 0.0, 0.05, 2.0);
    CHECK(ok.holds);
    CHECK(ok.window_lo == doctest::Approx(1e2).epsilon(1e-9));
    // The drift (1/4) ln(1+ln r) moves by ~0.15 across the window, so a
    // st slope bound near 0.01 is the break-even point.
    const auto tight = power_envelope_check(pair, 0.0, 0.005, 2.0);
    CHECK_FALSE(tight.holds);
    CHECK(ok.fitted_slope > 0.02);
    CHECK(ok.fitted_slope < 0.045);
  }

  SUBCASE("rapid growth defeats any power envelope") {
    const RadialIndex index{3, 0.0};
    SolveOptions opts;
    opts.r_max = 100.0;
    const RadialPair pair =
        solve_pair(index, RadialPotential::constant(1.0), opts);
    const auto report = power_envelope_check(pair, 0.0, 1.0);
    CHECK_FALSE(report.holds);
  }

  SUBCASE("grid spanning less than a decade is rejected") {
    const RadialIndex index{3, 2.0};
    SolveOptions opts;
    opts.r_min = 0.9;
    opts.r_max = 5.0;
    const RadialPair pair =
        solve_pair(index, RadialPotential::zero(), opts);
    CHECK_THROWS_AS(power_envelope_check(pair, 0.0, 0.1), RangeError);
  }
}
