#include "conefield/potential.hpp"

#include <cmath>
#include <utility>

namespace conefield {

RadialPotential::RadialPotential() : RadialPotential(zero()) {}

RadialPotential::RadialPotential(std::string name, Fn fn, PotentialHints hints,
                                 std::vector<double> parameters)
    : name_(std::move(name)),
      fn_(std::move(fn)),
      hints_(hints),
      parameters_(std::move(parameters)) {}

double RadialPotential::operator()(double r) const {
  if (!(r > 0.0)) throw RangeError("RadialPotential: radius must be positive");
  double v = fn_(r);
  if (!std::isfinite(v) || v < 0.0)
    throw RangeError("RadialPotential '" + name_ +
                     "': evaluation produced a negative or non-finite value");
  return v;
}

RadialPotential RadialPotential::zero() {
  RadialPotential q("zero", [](double) { return 0.0; },
                    PotentialHints{GrowthClass::kPowerLike, 0.0, true}, {});
  q.zero_ = true;
  return q;
}

RadialPotential RadialPotential::constant(double c0) {
  if (c0 < 0.0) throw PreconditionError("constant potential: c0 must be >= 0");
  if (c0 == 0.0) return zero();
  return RadialPotential("constant", [c0](double) { return c0; },
                         PotentialHints{GrowthClass::kRapid, 0.0, true}, {c0});
}

RadialPotential RadialPotential::power(double a, double p) {
  if (a < 0.0) throw PreconditionError("power potential: coefficient must be >= 0");
  if (p <= -2.0)
    throw PreconditionError(
        "power potential: exponent must be > -2 so that r*q(r) stays "
        "integrable at the origin");
  if (a == 0.0) return zero();
  // For p > -2 the scaled profile a*r^{2+p} always increases without bound.
  return RadialPotential(
      "power", [a, p](double r) { return a * std::pow(r, p); },
      PotentialHints{GrowthClass::kRapid, 0.0, true}, {a, p});
}

RadialPotential RadialPotential::inverse_square_plus(double k, double decay) {
  if (k < 0.0) throw PreconditionError("inverse_square_plus: k must be >= 0");
  if (decay <= 0.0)
    throw PreconditionError("inverse_square_plus: decay must be positive");
  return RadialPotential(
      "inverse_square_plus",
      [k, decay](double r) {
        if (r < 1.0) return 0.0;
        return (k + std::pow(r, -decay)) / (r * r);
      },
      PotentialHints{GrowthClass::kPowerLike, k, false}, {k, decay});
}

RadialPotential RadialPotential::log_perturbation(double a) {
  if (a < 0.0) throw PreconditionError("log_perturbation: a must be >= 0");
  return RadialPotential(
      "log_perturbation",
      [a](double r) {
        if (r < 1.0) return 0.0;
        return a / (r * r * (1.0 + std::log(r)));
      },
      PotentialHints{GrowthClass::kPowerLike, 0.0, false}, {a});
}

RadialPotential invert_potential(const RadialPotential& q) {
  if (q.is_zero()) return RadialPotential::zero();
  // Capture by value: the result must outlive the argument.
  RadialPotential base = q;
  return RadialPotential(
      "inverted(" + q.name() + ")",
      [base](double r) {
        double inv = 1.0 / r;
        return inv * inv * inv * inv * base(inv);
      },
      PotentialHints{GrowthClass::kUnspecified, 0.0,
                     q.hints().twice_differentiable},
      q.parameters());
}

RadialPotential potential_from_family(const std::string& family,
                                      const std::vector<double>& parameters) {
  auto need = [&](std::size_t count) {
    if (parameters.size() != count)
      throw PreconditionError("potential family '" + family + "' expects " +
                              std::to_string(count) + " parameter(s), got " +
                              std::to_string(parameters.size()));
  };
  if (family == "zero") {
    need(0);
    return RadialPotential::zero();
  }
  if (family == "constant") {
    need(1);
    return RadialPotential::constant(parameters[0]);
  }
  if (family == "power") {
    need(2);
    return RadialPotential::power(parameters[0], parameters[1]);
  }
  if (family == "inverse_square_plus") {
    need(2);
    return RadialPotential::inverse_square_plus(parameters[0], parameters[1]);
  }
  if (family == "log_perturbation") {
    need(1);
    return RadialPotential::log_perturbation(parameters[0]);
  }
  throw PreconditionError("unknown potential family '" + family + "'");
}

}  // namespace conefield
