// Growth classification of radial potentials and closed asymptotic laws for
// the fundamental pair.
//
// Two regimes are distinguished by the scaled profile s(r) = r^2 q(r):
//   * power-like: s(r) -> k finite, with Integral (s-k)^2 d(ln r) convergent;
//     the pair then behaves like powers of r with a slowly varying correction,
//       log V(r) = (2-n+chi_k)/2 ln r + (1/chi_k) Integral_1^r (s(t)-k) dt/t,
//     chi_k^2 = (n-2)^2 + 4(lambda0 + k), and W mirrored with negated signs.
//   * rapid: s(r) increases without bound; if q is smooth enough the pair
//     follows the JWKB form
//       log V(r) = (1-n)/2 ln r - (1/4) ln q(r) + Integral_1^r sqrt(q) dt,
//     again with W mirrored.
// Laws are determined up to one multiplicative constant; comparisons must be
// performed on log-differences up to an additive constant.
#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "conefield/potential.hpp"
#include "conefield/radial_ode.hpp"

namespace conefield {

enum class GrowthVerdict { kPowerLike, kRapid, kIndeterminate };

struct GrowthDiagnostics {
  double limit_estimate = 0.0;    // final-decade average of s(r)
  double relative_spread = 0.0;   // spread of s over the final decade
  double fitted_decay = 0.0;      // beta in s ~ k + c r^{-beta}, 0 if unused
  double power_tail_integral = 0.0;  // Integral (s-k)^2 d ln r over the probe
  bool power_tail_converged = false;
  double rapid_integral = 0.0;    // Integral r^{-2} q^{-1/2} dr over the probe
  bool rapid_integral_converged = false;
  bool s_nondecreasing = false;
  bool tag_conflict = false;      // the potential's hint could not be verified
};

struct GrowthClassification {
  GrowthVerdict verdict = GrowthVerdict::kIndeterminate;
  double k = 0.0;  // limit of s(r) when verdict == kPowerLike
  GrowthDiagnostics diagnostics;
};

// Probe s(r) on a log grid over [r_lo, r_hi] and classify.  A growth hint on
// the potential is verified, never trusted blindly: failed verification
// yields kIndeterminate with tag_conflict set.
GrowthClassification classify_growth(const RadialPotential& q, double r_lo,
                                     double r_hi, std::size_t grid_size = 400);

struct AsymptoticLaw {
  enum class Kind { kPowerLimit, kJwkb };
  Kind kind;
  int n = 3;
  double lambda0 = 0.0;
  double k = 0.0;      // power-limit parameter (0 for JWKB laws)
  double chi_k = 0.0;  // sqrt((n-2)^2 + 4(lambda0 + k))
  bool increasing = true;
  std::function<double(double)> log_value;
};

// Laws for the power-like regime; the caller is responsible for having
// verified the classification (see classify_growth).
std::pair<AsymptoticLaw, AsymptoticLaw> power_limit_laws(
    int n, double lambda0, double k, const RadialPotential& q);

// Laws for the rapid regime.  Verifies on [probe_lo, probe_hi] that
//   * q_tilde(r) = q(r) + ((n^2-4n+3)/4 + lambda0) r^{-2} stays positive,
//   * either the oscillation-control integral
//       Integral |4 q_tilde q_tilde'' - 5 q_tilde'^2| q_tilde^{-5/2} dr
//     converges on the probe, or the alternative sufficient conditions hold
//     (Integral r^{-4} q^{-3/2} and Integral |q''| q^{-3/2} convergent and
//     q' q^{-3/2} -> 0).
// Derivatives of the potential are formed by centered differences, so the
// potential must carry the twice-differentiable hint.
std::pair<AsymptoticLaw, AsymptoticLaw> jwkb_laws(int n, double lambda0,
                                                  const RadialPotential& q,
                                                  double probe_lo,
                                                  double probe_hi);

struct EnvelopeReport {
  bool holds = false;       // there is a constant b with |d(r) - ln b| <= eps ln r
  double fitted_slope = 0.0;  // least-squares slope of d against ln r
  double window_lo = 0.0, window_hi = 0.0;
};

// Check the two-sided power envelope b r^{-eps} < V(r) r^{-(2-n+chi_k)/2}
// < b r^{eps} on the tail of the pair's grid (the trailing `window_decades`
// decades).  Throws RangeError when the grid spans less than one decade.
EnvelopeReport power_envelope_check(const RadialPair& pair, double k,
                                    double eps, double window_decades = 1.0);

}  // namespace conefield
