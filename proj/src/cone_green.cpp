#include "conefield/cone_green.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>

#include "conefield/common.hpp"

namespace conefield {
namespace {

std::vector<EigenPair> domain_eigenpairs(const SphericalDomain& domain,
                                         std::size_t count) {
  if (domain.is_sector()) return sector_eigenpairs(domain.sector(), count);
  return cap_eigenpairs(domain.cap(), count);
}

void check_interior(const SphericalDomain& domain, const ConePoint& p) {
  if (!(p.r > 0.0) || !std::isfinite(p.r)) {
    throw RangeError("cone point: radius must be positive");
  }
  if (domain.is_sector()) {
    const auto& s = domain.sector();
    if (!(p.theta > s.alpha) || !(p.theta < s.beta)) {
      throw RangeError("cone point: angle must be interior to the sector");
    }
  } else {
    if (!(p.theta >= 0.0) || !(p.theta < domain.cap().theta0)) {
      throw RangeError("cone point: colatitude must be interior to the cap");
    }
  }
}

// Sampled sup of |phi| over the domain (axis of symmetry handled by the
// azimuth choice that maximizes the angular factor).
double sampled_sup(const EigenPair& pair, const SphericalDomain& domain) {
  double lo = 0.0, hi = 0.0;
  if (domain.is_sector()) {
    lo = domain.sector().alpha;
    hi = domain.sector().beta;
  } else {
    hi = domain.cap().theta0;
  }
  const double azimuth =
      pair.sine_branch ? 0.5 * kPi / std::max(pair.azimuthal_m, 1) : 0.0;
  double sup = 0.0;
  for (double theta : linspace(lo, hi, 512)) {
    sup = std::max(sup, std::abs(pair.value(theta, azimuth)));
  }
  return sup;
}

}  // namespace

GreenEvaluator build_evaluator(const SphericalDomain& domain,
                               const RadialPotential& q, std::size_t n_max,
                               double gamma_min, double eps_ode, double r_min,
                               double r_max) {
  if (n_max == 0) n_max = domain.is_sector() ? 64 : 32;
  if (n_max < 1) throw PreconditionError("build_evaluator: n_max >= 1");
  if (!(gamma_min > 0.0) || !(gamma_min < 1.0)) {
    throw PreconditionError("build_evaluator: gamma_min must lie in (0, 1)");
  }

  GreenEvaluator evaluator(domain, q);
  evaluator.gamma_min_ = gamma_min;
  evaluator.r_min_ = r_min;
  evaluator.r_max_ = r_max;

  const auto eigen = domain_eigenpairs(domain, n_max + 1);

  // Radial pairs depend on the eigenvalue only; multiplicity groups share
  // one solve.
  std::vector<std::size_t> owner(eigen.size());  // index of the distinct λ
  std::vector<std::size_t> distinct;
  for (std::size_t nu = 0; nu < eigen.size(); ++nu) {
    if (nu > 0 &&
        std::abs(eigen[nu].lambda - eigen[owner[nu - 1]].lambda) <=
            1e-12 * eigen[nu].lambda) {
      owner[nu] = owner[nu - 1];
    } else {
      owner[nu] = nu;
      distinct.push_back(nu);
    }
  }

  std::vector<std::shared_ptr<const RadialPair>> solved(eigen.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(distinct.size(), [&](std::size_t i) {
    const std::size_t nu = distinct[i];
    try {
      SolveOptions opts;
      opts.r_min = r_min;
      opts.r_max = r_max;
      opts.eps = eps_ode;
      solved[nu] = std::make_shared<const RadialPair>(
          solve_pair(RadialIndex{domain.n(), eigen[nu].lambda}, q, opts));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) {
        try {
          std::throw_with_nested(
              ConstructionError("build_evaluator: radial solve failed for "
                                "mode " +
                                std::to_string(nu)));
        } catch (...) {
          failure = std::current_exception();
        }
      }
    }
  });
  if (failure) std::rethrow_exception(failure);

  evaluator.modes_.reserve(eigen.size());
  for (std::size_t nu = 0; nu < eigen.size(); ++nu) {
    GreenMode mode;
    mode.eigen = eigen[nu];
    mode.radial = solved[owner[nu]];
    mode.chi_prime = mode.radial->wronskian();
    mode.sup_phi = sampled_sup(eigen[nu], domain);
    if (!(mode.chi_prime >= mode.eigen.chi * (1.0 - 1e-10))) {
      std::ostringstream msg;
      msg << "build_evaluator: mode " << nu
          << " violates chi' >= chi (chi'=" << mode.chi_prime
          << ", chi=" << mode.eigen.chi << ")";
      throw ConstructionError(msg.str());
    }
    evaluator.modes_.push_back(std::move(mode));
  }

  // Growth-law fits feeding the truncation estimate.
  const double weyl = 2.0 / static_cast<double>(domain.n() - 1);
  double b1 = std::numeric_limits<double>::infinity();
  double b2 = 0.0, b3 = 0.0;
  for (std::size_t nu = 0; nu < evaluator.modes_.size(); ++nu) {
    const auto& mode = evaluator.modes_[nu];
    const double weight = std::pow(static_cast<double>(nu + 1), weyl);
    b1 = std::min(b1, mode.eigen.lambda / weight);
    b2 = std::max(b2, mode.eigen.lambda / weight);
    b3 = std::max(b3, mode.sup_phi / std::pow(mode.eigen.lambda,
                                              0.25 * domain.n()));
  }
  evaluator.weyl_lower_ = b1;
  evaluator.weyl_upper_ = b2;
  evaluator.sup_constant_ = b3;
  return evaluator;
}

double GreenEvaluator::mode_sum(const ConePoint& x, const ConePoint& y,
                                bool derivative,
                                const ConeBoundaryPoint* boundary,
                                double* tail) const {
  check_interior(domain_, x);
  double rho, psi, psi_azimuth;
  if (derivative) {
    rho = boundary->rho;
    psi_azimuth = boundary->azimuth;
    if (domain_.is_sector()) {
      psi = boundary->sector_side == 0 ? domain_.sector().alpha
                                       : domain_.sector().beta;
    } else {
      psi = domain_.cap().theta0;
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) {
      throw RangeError("boundary point: radius must be positive");
    }
  } else {
    check_interior(domain_, y);
    rho = y.r;
    psi = y.theta;
    psi_azimuth = y.azimuth;
  }

  const double r_lo = std::min(x.r, rho);
  const double r_hi = std::max(x.r, rho);
  if (r_lo < r_min_ || r_hi > r_max_) {
    throw RangeError("evaluate: radius outside the solved radial range");
  }
  const double gamma = r_lo / r_hi;
  if (!(gamma <= gamma_min_)) {
    throw RegimeError(
        "evaluate: points too close to the diagonal (ratio " +
        std::to_string(gamma) + " exceeds the guard " +
        std::to_string(gamma_min_) + ")");
  }

  // Accumulate with the largest radial log-magnitude factored out.
  const int n = domain_.n();
  std::vector<double> log_radial(modes_.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t nu = 0; nu < modes_.size(); ++nu) {
    const auto& mode = modes_[nu];
    log_radial[nu] = mode.radial->log_v(r_lo) + mode.radial->log_w(r_hi) -
                     std::log(mode.chi_prime);
    peak = std::max(peak, log_radial[nu]);
  }
  double scaled = 0.0;
  for (std::size_t nu = 0; nu < modes_.size(); ++nu) {
    const auto& mode = modes_[nu];
    const double phi_x = mode.eigen.value(x.theta, x.azimuth);
    double phi_y;
    if (derivative) {
      const double inward = domain_.is_sector()
                                ? (boundary->sector_side == 0 ? 1.0 : -1.0)
                                : -1.0;
      phi_y = inward * mode.eigen.derivative(psi, psi_azimuth) / rho;
    } else {
      phi_y = mode.eigen.value(psi, psi_azimuth);
    }
    scaled += std::exp(log_radial[nu] - peak) * phi_x * phi_y;
  }

  // Truncation estimate: each dropped mode obeys
  //   (1/chi') V(r) W(rho) <= (1/chi) (r/rho)^{chi/2} (r rho)^{(2-n)/2},
  // |phi| <= b3 lambda^{n/4}, and the fitted Weyl window brackets lambda.
  // The derivative series gains at most a factor lambda^{1/2}/rho from the
  // angular slope (Bernstein-type bound), absorbed by raising the exponent.
  if (tail != nullptr) {
    const double weyl = 2.0 / static_cast<double>(n - 1);
    const double base = std::pow(r_lo * r_hi, 0.5 * (2.0 - n));
    double sum = 0.0;
    for (std::size_t k = modes_.size();; ++k) {
      const double order = std::pow(static_cast<double>(k + 1), weyl);
      const double lambda_lo = weyl_lower_ * order;
      const double lambda_hi = weyl_upper_ * order;
      const double chi_lo =
          std::sqrt(sqr(static_cast<double>(n - 2)) + 4.0 * lambda_lo);
      double amplitude = sqr(sup_constant_) * std::pow(lambda_hi, 0.5 * n);
      if (derivative) amplitude *= std::sqrt(lambda_hi) / rho;
      const double term =
          amplitude / chi_lo * std::pow(gamma, 0.5 * chi_lo) * base;
      sum += term;
      if (term <= 1e-18 * (sum + 1e-300)) break;
      if (k > modes_.size() + 2000000) {
        throw ConvergenceError("evaluate: tail estimate failed to converge");
      }
    }
    *tail = sum * std::abs(normalization);
  }
  return normalization * std::exp(peak) * scaled;
}

GreenValue GreenEvaluator::evaluate(const ConePoint& x, const ConePoint& y,
                                    double accuracy) const {
  GreenValue out;
  out.value = mode_sum(x, y, false, nullptr, &out.tail_bound);
  out.log_value = out.value > 0.0 ? std::log(out.value)
                                  : -std::numeric_limits<double>::infinity();
  if (out.tail_bound > accuracy) {
    throw AccuracyError("evaluate: truncation above the requested accuracy",
                        out.tail_bound);
  }
  return out;
}

double GreenEvaluator::log_evaluate(const ConePoint& x,
                                    const ConePoint& y) const {
  const GreenValue g = evaluate(x, y);
  if (!(g.value > 0.0)) {
    throw ConstructionError("log_evaluate: truncated sum is not positive");
  }
  return g.log_value;
}

GreenValue GreenEvaluator::normal_derivative(
    const ConePoint& x, const ConeBoundaryPoint& y) const {
  if (domain_.is_sector() && y.sector_side != 0 && y.sector_side != 1) {
    throw PreconditionError("normal_derivative: sector_side must be 0 or 1");
  }
  GreenValue out;
  out.value = mode_sum(x, ConePoint{}, true, &y, &out.tail_bound);
  out.log_value = out.value > 0.0 ? std::log(out.value)
                                  : -std::numeric_limits<double>::infinity();
  return out;
}

KernelCompareReport mode_kernel_compare(const SphericalDomain& domain,
                                        std::size_t nu,
                                        const RadialPotential& q) {
  const auto eigen = domain_eigenpairs(domain, nu + 1);
  SolveOptions opts;
  const auto base = solve_pair(RadialIndex{domain.n(), eigen[0].lambda}, q,
                               opts);
  const auto mode =
      nu == 0 ? base
              : solve_pair(RadialIndex{domain.n(), eigen[nu].lambda}, q, opts);

  const double chi = eigen[nu].chi;
  const double chi_prime = mode.wronskian();
  const double chi_prime0 = base.wronskian();
  const double mu_plus = eigen[nu].mu_plus;
  const double mu_minus = eigen[nu].mu_minus;

  KernelCompareReport report;
  report.margin_power = std::numeric_limits<double>::infinity();
  report.margin_order = std::numeric_limits<double>::infinity();
  report.margin_scaling = std::numeric_limits<double>::infinity();

  const auto grid = logspace(opts.r_min * 10.0, opts.r_max * 0.1, 24);
  for (double r : grid) {
    for (double rho : grid) {
      if (!(r <= rho)) continue;
      // ln of (1/chi') V(r) W(rho) and of the pure-power majorant.
      const double lhs =
          mode.log_v(r) + mode.log_w(rho) - std::log(chi_prime);
      const double rhs = mu_plus * std::log(r) + mu_minus * std::log(rho) -
                         std::log(chi);
      report.margin_power =
          std::min(report.margin_power, 1.0 - std::exp(lhs - rhs));

      const double lhs0 =
          base.log_v(r) + base.log_w(rho) - std::log(chi_prime0);
      report.margin_order =
          std::min(report.margin_order, 1.0 - std::exp(lhs - lhs0));

      const double gamma = 0.5, delta = 2.0;
      if (delta * r <= gamma * rho && delta * r >= opts.r_min &&
          gamma * rho <= opts.r_max) {
        const double rhs_scaled = -mu_minus * std::log(gamma) -
                                  mu_plus * std::log(delta) - std::log(chi) +
                                  mode.log_v(delta * r) +
                                  mode.log_w(gamma * rho);
        report.margin_scaling =
            std::min(report.margin_scaling, 1.0 - std::exp(lhs - rhs_scaled));
      }
    }
  }
  report.ok = report.margin_power > -1e-8 && report.margin_order > -1e-8 &&
              report.margin_scaling > -1e-8;
  return report;
}

EnvelopeCertificate envelope_bound(const GreenEvaluator& evaluator,
                                   double delta) {
  if (!(delta > 1.0)) {
    throw PreconditionError("envelope_bound: delta must exceed 1");
  }
  const auto& domain = evaluator.domain();
  const int n = domain.n();
  const auto& ground = evaluator.modes()[0];
  const double mu_plus = ground.eigen.mu_plus;
  const bool harmonic = evaluator.potential().is_zero();

  double theta_lo, theta_hi;
  if (domain.is_sector()) {
    theta_lo = domain.sector().alpha;
    theta_hi = domain.sector().beta;
  } else {
    theta_lo = 0.0;
    theta_hi = domain.cap().theta0;
  }
  const auto angle = [&](double frac) {
    return theta_lo + frac * (theta_hi - theta_lo);
  };

  // Admissible sample set: rho spans the solved range, r = ratio * rho with
  // the fixed ratio set below delta^{-1} and the ratio guard.
  struct Sample {
    double g, product, ratio, power;
  };
  std::vector<Sample> samples;
  const double ratio_cap = std::min(evaluator.gamma_min(), 1.0 / delta);
  const std::vector<double> ratios = {ratio_cap, 0.7 * ratio_cap,
                                      0.4 * ratio_cap, 0.16 * ratio_cap};
  const auto rho_grid = logspace(evaluator.r_min() / ratios.back() * 1.5,
                                 evaluator.r_max() * 0.05, 9);
  const auto fracs = linspace(0.12, 0.88, 6);
  for (double rho : rho_grid) {
    for (double ratio : ratios) {
      const double r = ratio * rho;
      for (double fx : fracs) {
        for (double fy : fracs) {
          const ConePoint x{r, angle(fx), 0.0};
          const ConePoint y{rho, angle(fy), 0.0};
          const double phi_pair = ground.eigen.value(x.theta, 0.0) *
                                  ground.eigen.value(y.theta, 0.0);
          if (!(phi_pair > 0.0)) continue;
          Sample s;
          s.g = evaluator.evaluate(x, y).value;
          s.product = std::exp(ground.radial->log_v(r) +
                               ground.radial->log_w(rho)) *
                      phi_pair;
          s.ratio = std::pow(r, 2.0 - n) *
                    std::exp(ground.radial->log_w(rho) -
                             ground.radial->log_w(delta * r)) *
                    phi_pair;
          s.power = harmonic ? std::pow(rho, 2.0 - n) *
                                   std::pow(r / rho, mu_plus) * phi_pair
                             : 0.0;
          samples.push_back(s);
        }
      }
    }
  }

  // Smallest constant per form, then a cross-check: the product-fitted
  // constant must make each reformulation dominate on the same samples.
  EnvelopeCertificate cert;
  cert.samples = samples.size();
  for (const auto& s : samples) {
    cert.b_product = std::max(cert.b_product, s.g / s.product);
    cert.b_ratio = std::max(cert.b_ratio, s.g / s.ratio);
    if (harmonic) cert.b_power = std::max(cert.b_power, s.g / s.power);
  }
  cert.holds_product = std::isfinite(cert.b_product) && cert.b_product > 0.0;
  cert.holds_ratio = cert.holds_product;
  cert.holds_power = harmonic && cert.holds_product;
  const double slack = 1.0 + 1e-9;
  for (const auto& s : samples) {
    if (!(s.g <= slack * cert.b_product * s.ratio)) cert.holds_ratio = false;
    if (harmonic && !(s.g <= slack * cert.b_product * s.power)) {
      cert.holds_power = false;
    }
  }
  return cert;
}

HomogeneityReport harmonic_homogeneity_check(const SphericalDomain& domain) {
  const auto evaluator =
      build_evaluator(domain, RadialPotential::zero(), 24, 0.5, 1e-11);
  const int n = domain.n();
  double theta_a, theta_b;
  if (domain.is_sector()) {
    const auto& s = domain.sector();
    theta_a = s.alpha + 0.3 * (s.beta - s.alpha);
    theta_b = s.alpha + 0.7 * (s.beta - s.alpha);
  } else {
    theta_a = 0.25 * domain.cap().theta0;
    theta_b = 0.6 * domain.cap().theta0;
  }

  HomogeneityReport report;
  report.ok = true;
  for (double k : {3.0, 2.0, 0.5}) {
    for (double r : {0.02, 0.1, 0.4}) {
      for (double rho : {2.0, 8.0, 40.0}) {
        const ConePoint x{r, theta_a, 0.0};
        const ConePoint y{rho, theta_b, 0.0};
        const double base = evaluator.evaluate(x, y).value;
        const double scaled =
            evaluator.evaluate(ConePoint{k * r, theta_a, 0.0},
                               ConePoint{k * rho, theta_b, 0.0})
                .value;
        const double rel =
            std::abs(scaled - std::pow(k, 2.0 - n) * base) / std::abs(base);
        report.max_rel = std::max(report.max_rel, rel);
        if (!(rel <= 1e-8)) report.ok = false;
      }
    }
  }
  return report;
}

}  // namespace conefield
