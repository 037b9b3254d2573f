// Radial potential terms q(r) >= 0 for the operator -Laplace + q(|x|).
//
// A potential carries, besides its evaluation rule, a few structural hints:
// whether the scaled profile s(r) = r^2 q(r) approaches a finite limit
// ("power-like" behaviour, growth class A) or increases without bound
// (exponential-type behaviour, growth class B).  The hints are advisory:
// consumers that depend on the growth class re-verify it numerically.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conefield/common.hpp"

namespace conefield {

enum class GrowthClass {
  kPowerLike,    // s(r) = r^2 q(r) -> k, finite
  kRapid,        // s(r) -> infinity monotonically
  kUnspecified,  // no claim
};

struct PotentialHints {
  GrowthClass growth = GrowthClass::kUnspecified;
  // Limit of s(r) = r^2 q(r) when growth == kPowerLike.
  double power_limit = 0.0;
  // True when q has two continuous derivatives on (0, inf) wherever positive.
  bool twice_differentiable = true;
};

class RadialPotential {
 public:
  using Fn = std::function<double(double)>;

  RadialPotential();  // identically zero
  RadialPotential(std::string name, Fn fn, PotentialHints hints,
                  std::vector<double> parameters = {});

  double operator()(double r) const;

  const std::string& name() const { return name_; }
  const PotentialHints& hints() const { return hints_; }
  const std::vector<double>& parameters() const { return parameters_; }
  bool is_zero() const { return zero_; }

  // Scaled profile s(r) = r^2 q(r).
  double scaled_profile(double r) const { return r * r * (*this)(r); }

  // --- Built-in families -------------------------------------------------

  // q = 0.
  static RadialPotential zero();

  // q = c0 >= 0.
  static RadialPotential constant(double c0);

  // q = a * r^p with a >= 0 and p > -2 (keeps r*q integrable at the origin).
  static RadialPotential power(double a, double p);

  // q(r) = (k + r^{-decay}) / r^2 for r >= 1, zero below; k >= 0, decay > 0.
  // The scaled profile is s(r) = k + r^{-decay}, a power-like perturbation.
  static RadialPotential inverse_square_plus(double k, double decay);

  // q(r) = a / (r^2 (1 + ln r)) for r >= 1, zero below; a >= 0.  Power-like
  // with limit 0, but with a logarithmic correction that never becomes a
  // genuine power.
  static RadialPotential log_perturbation(double a);

 private:
  std::string name_;
  Fn fn_;
  PotentialHints hints_;
  std::vector<double> parameters_;
  bool zero_ = false;
};

// Inversion r -> 1/r of a potential: returns q*(r) = r^{-4} q(1/r).  Swapping
// the roles of the origin and infinity this way turns the growing solution of
// the radial equation for q into the decaying one for q* and vice versa.
RadialPotential invert_potential(const RadialPotential& q);

// Parse a potential description of the form used by the CLI configuration:
// {"family": "constant", "parameters": [1.0]} etc.  Throws PreconditionError
// for unknown families or malformed parameter lists.
RadialPotential potential_from_family(const std::string& family,
                                      const std::vector<double>& parameters);

}  // namespace conefield
