#include "conefield/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

namespace conefield {
namespace {

constexpr double kMuMax = 100.0;   // degree search ceiling
constexpr double kMuStep = 0.25;   // bracketing stride (root gaps exceed 1)
constexpr double kCapLimit = 0.95 * kPi;

// Fixed-order Gauss-Legendre integration with a runtime node count.
double gauss_integral(const std::function<double(double)>& f, double a,
                      double b, std::size_t nodes) {
  using boost::math::quadrature::gauss;
  switch (nodes) {
    case 16:
      return gauss<double, 16>::integrate(f, a, b);
    case 32:
      return gauss<double, 32>::integrate(f, a, b);
    case 64:
      return gauss<double, 64>::integrate(f, a, b);
    case 128:
      return gauss<double, 128>::integrate(f, a, b);
    case 256:
      return gauss<double, 256>::integrate(f, a, b);
    case 512:
      return gauss<double, 512>::integrate(f, a, b);
    default:
      throw PreconditionError(
          "gauss_integral: node count must be one of 16/32/64/128/256/512");
  }
}

// m-th derivative (d/dx)^m P_mu(x) via the hypergeometric series in
// z = (1-x)/2:  P_mu(x) = sum_j c_j z^j with c_0 = 1 and
// c_{j+1} = c_j (j - mu)(j + mu + 1) / (j + 1)^2.
double legendre_series_derivative(double mu, double x, int m) {
  if (!(x > -1.0 && x <= 1.0)) {
    throw RangeError("legendre series: x must lie in (-1, 1]");
  }
  if (m < 0) throw PreconditionError("legendre series: m must be >= 0");
  const double z = 0.5 * (1.0 - x);

  // Skip ahead to j = m: c_m and the falling-factorial weight m!.
  double c = 1.0;
  double weight = 1.0;
  for (int j = 0; j < m; ++j) {
    c *= (j - mu) * (j + mu + 1.0) / ((j + 1.0) * (j + 1.0));
    weight *= j + 1.0;
  }

  double sum = 0.0;
  double zpow = 1.0;
  constexpr std::size_t kMaxTerms = 200000;
  for (std::size_t step = 0;; ++step) {
    const double j = static_cast<double>(m) + static_cast<double>(step);
    const double term = c * weight * zpow;
    sum += term;
    if (j > std::abs(mu) + 4.0 &&
        std::abs(term) <= 1e-16 * (std::abs(sum) + 1e-300)) {
      break;
    }
    if (step >= kMaxTerms) {
      throw ConvergenceError(
          "legendre series: no convergence within the term budget");
    }
    c *= (j - mu) * (j + mu + 1.0) / ((j + 1.0) * (j + 1.0));
    weight *= (j + 1.0) / (j + 1.0 - static_cast<double>(m));
    zpow *= z;
  }
  return sum * std::pow(-0.5, m);
}

double lambda_of_degree(double mu) { return mu * (mu + 1.0); }

// Roots of P_mu^m(x0) = 0 in the degree mu, scanned upward from just above
// m (smaller degrees cannot vanish: the series is single-signed there).
// Stops at mu_max, after max_roots roots, or once lambda exceeds the cutoff.
std::vector<double> branch_roots(int m, double x0, double mu_max,
                                 std::size_t max_roots, double lambda_cutoff) {
  std::vector<double> roots;
  double scan_hi = mu_max;
  if (std::isfinite(lambda_cutoff)) {
    const double mu_cut =
        0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * lambda_cutoff)) + 0.5;
    scan_hi = std::min(scan_hi, mu_cut);
  }
  const auto f = [m, x0](double mu) { return associated_legendre(mu, m, x0); };
  double mu_prev = static_cast<double>(m) + 1e-6;
  double f_prev = f(mu_prev);
  while (mu_prev < scan_hi && roots.size() < max_roots) {
    const double mu_next = std::min(mu_prev + kMuStep, scan_hi);
    const double f_next = f(mu_next);
    if (f_prev == 0.0 || f_prev * f_next < 0.0) {
      double lo = mu_prev, hi = mu_next, f_lo = f_prev;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * std::max(1.0, mid)) break;
        const double f_mid = f(mid);
        if (f_lo * f_mid <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          f_lo = f_mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    mu_prev = mu_next;
    f_prev = f_next;
  }
  return roots;
}

struct Candidate {
  double mu = 0.0;
  int m = 0;
  bool sine = false;
};

// Normalized cap eigenfunction for one candidate; fills everything except nu.
EigenPair make_cap_pair(const Candidate& cand, double theta0,
                        std::size_t nodes) {
  const double x0 = std::cos(theta0);
  const double mu = cand.mu;
  const int m = cand.m;
  const auto profile = [mu, m](double x) {
    return associated_legendre(mu, m, x);
  };
  const double angular = m == 0 ? 2.0 * kPi : kPi;
  const double raw =
      gauss_integral([&](double x) { return sqr(profile(x)); }, x0, 1.0,
                     nodes);
  double scale = 1.0 / std::sqrt(angular * raw);
  if (profile(1.0) < 0.0) scale = -scale;  // keep the axis value positive

  EigenPair pair;
  pair.lambda = lambda_of_degree(mu);
  pair.mu_plus = characteristic_constant(pair.lambda, 3);
  pair.chi = std::sqrt(1.0 + 4.0 * pair.lambda);
  pair.mu_minus = pair.mu_plus - pair.chi;
  pair.azimuthal_m = m;
  pair.sine_branch = cand.sine;
  pair.degree = mu;
  pair.value = [mu, m, sine = cand.sine, scale, theta0](double theta,
                                                        double azimuth) {
    if (theta < 0.0 || theta >= theta0) return 0.0;
    const double radial = scale * associated_legendre(mu, m, std::cos(theta));
    if (m == 0) return radial;
    return radial * (sine ? std::sin(m * azimuth) : std::cos(m * azimuth));
  };
  pair.derivative = [mu, m, sine = cand.sine, scale, theta0](double theta,
                                                             double azimuth) {
    if (theta <= 0.0 || theta > theta0) return 0.0;
    const double x = std::cos(theta);
    const double slope =
        -scale * std::sin(theta) * associated_legendre_dx(mu, m, x);
    if (m == 0) return slope;
    return slope * (sine ? std::sin(m * azimuth) : std::cos(m * azimuth));
  };
  // Independent resolution for the certificate: half the node count.
  const double check =
      gauss_integral([&](double x) { return sqr(scale * profile(x)); }, x0,
                     1.0, std::max<std::size_t>(nodes / 2, 16));
  pair.norm_check = angular * check;
  return pair;
}

}  // namespace

void validate_domain(const Sector2D& dom) {
  if (!std::isfinite(dom.alpha) || !std::isfinite(dom.beta) ||
      !(dom.beta > dom.alpha) || !(dom.beta - dom.alpha < 2.0 * kPi)) {
    throw ConstructionError(
        "sector: need alpha < beta with opening below 2 pi");
  }
}

void validate_domain(const Cap3D& dom) {
  if (!std::isfinite(dom.theta0) || !(dom.theta0 > 0.0) ||
      !(dom.theta0 <= kCapLimit)) {
    throw ConstructionError("cap: need theta0 in (0, 0.95 pi]");
  }
}

SphericalDomain::SphericalDomain(const Sector2D& sector) : body_(sector) {
  validate_domain(sector);
}

SphericalDomain::SphericalDomain(const Cap3D& cap) : body_(cap) {
  validate_domain(cap);
}

int SphericalDomain::n() const { return is_sector() ? 2 : 3; }

double SphericalDomain::measure() const {
  if (is_sector()) {
    const auto& s = std::get<Sector2D>(body_);
    return s.beta - s.alpha;
  }
  return 2.0 * kPi * (1.0 - std::cos(std::get<Cap3D>(body_).theta0));
}

const Sector2D& SphericalDomain::sector() const {
  if (!is_sector()) throw PreconditionError("domain is not a sector");
  return std::get<Sector2D>(body_);
}

const Cap3D& SphericalDomain::cap() const {
  if (is_sector()) throw PreconditionError("domain is not a cap");
  return std::get<Cap3D>(body_);
}

std::string SphericalDomain::describe() const {
  std::ostringstream out;
  if (is_sector()) {
    const auto& s = std::get<Sector2D>(body_);
    out << "sector(" << s.alpha << ", " << s.beta << ")";
  } else {
    out << "cap(" << std::get<Cap3D>(body_).theta0 << ")";
  }
  return out.str();
}

double legendre_degree(double mu, double x) {
  return legendre_series_derivative(mu, x, 0);
}

double legendre_degree_derivative(double mu, double x) {
  return legendre_series_derivative(mu, x, 1);
}

double associated_legendre(double mu, int m, double x) {
  if (m < 0) throw PreconditionError("associated_legendre: m must be >= 0");
  if (m == 0) return legendre_series_derivative(mu, x, 0);
  const double body = legendre_series_derivative(mu, x, m);
  const double factor = std::pow(1.0 - x * x, 0.5 * m);
  return (m % 2 == 0 ? 1.0 : -1.0) * factor * body;
}

double associated_legendre_dx(double mu, int m, double x) {
  if (m < 0) throw PreconditionError("associated_legendre_dx: m must be >= 0");
  if (!(x > -1.0 && x < 1.0)) {
    throw RangeError("associated_legendre_dx: x must lie in (-1, 1)");
  }
  if (m == 0) return legendre_series_derivative(mu, x, 1);
  // Product rule on (-1)^m (1-x^2)^{m/2} (d/dx)^m P.
  const double dm = legendre_series_derivative(mu, x, m);
  const double dm1 = legendre_series_derivative(mu, x, m + 1);
  const double one_m_x2 = 1.0 - x * x;
  const double sign = m % 2 == 0 ? 1.0 : -1.0;
  return sign * std::pow(one_m_x2, 0.5 * m - 1.0) *
         (one_m_x2 * dm1 - static_cast<double>(m) * x * dm);
}

double characteristic_constant(double lambda0, int n) {
  if (!(lambda0 > 0.0)) {
    throw PreconditionError("characteristic_constant: lambda0 must be > 0");
  }
  const double nm2 = static_cast<double>(n - 2);
  return 0.5 * (-nm2 + std::sqrt(nm2 * nm2 + 4.0 * lambda0));
}

std::vector<EigenPair> sector_eigenpairs(const Sector2D& dom,
                                         std::size_t count) {
  validate_domain(dom);
  if (count < 1) throw PreconditionError("sector_eigenpairs: count >= 1");
  const double length = dom.beta - dom.alpha;
  const double amp = std::sqrt(2.0 / length);

  std::vector<EigenPair> pairs;
  pairs.reserve(count);
  for (std::size_t nu = 0; nu < count; ++nu) {
    const double rho = static_cast<double>(nu + 1) * kPi / length;
    EigenPair pair;
    pair.nu = nu;
    pair.lambda = rho * rho;
    pair.mu_plus = rho;
    pair.mu_minus = -rho;
    pair.chi = 2.0 * rho;
    pair.degree = static_cast<double>(nu + 1);
    pair.value = [amp, rho, alpha = dom.alpha, beta = dom.beta](
                     double theta, double) {
      if (theta < alpha || theta > beta) return 0.0;
      return amp * std::sin(rho * (theta - alpha));
    };
    pair.derivative = [amp, rho, alpha = dom.alpha, beta = dom.beta](
                          double theta, double) {
      if (theta < alpha || theta > beta) return 0.0;
      return amp * rho * std::cos(rho * (theta - alpha));
    };
    pair.norm_check = gauss_integral(
        [&pair](double theta) { return sqr(pair.value(theta, 0.0)); },
        dom.alpha, dom.beta, 256);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<EigenPair> cap_eigenpairs(const Cap3D& dom, std::size_t count,
                                      double tol, std::size_t nodes) {
  validate_domain(dom);
  if (count < 1) throw PreconditionError("cap_eigenpairs: count >= 1");
  if (!(tol > 0.0)) throw PreconditionError("cap_eigenpairs: tol must be > 0");
  const double x0 = std::cos(dom.theta0);

  std::vector<Candidate> cands;  // multiplicity already expanded
  const auto kth_lambda = [&]() {
    if (cands.size() < count) return std::numeric_limits<double>::infinity();
    std::vector<double> ls(cands.size());
    std::transform(cands.begin(), cands.end(), ls.begin(),
                   [](const Candidate& c) { return lambda_of_degree(c.mu); });
    std::nth_element(ls.begin(), ls.begin() + (count - 1), ls.end());
    return ls[count - 1];
  };

  for (int m = 0; m <= 64; ++m) {
    const double cutoff = kth_lambda();
    const auto roots = branch_roots(m, x0, kMuMax, count, cutoff);
    if (roots.empty()) {
      if (cands.size() < count) {
        std::ostringstream msg;
        msg << "cap_eigenpairs: no further degree root for azimuthal order "
            << m << " in (" << m << ", " << kMuMax << "]";
        throw ConvergenceError(msg.str());
      }
      break;
    }
    for (double mu : roots) {
      cands.push_back({mu, m, false});
      if (m >= 1) cands.push_back({mu, m, true});
    }
    if (cands.size() >= count &&
        lambda_of_degree(roots.front()) > kth_lambda()) {
      break;
    }
  }
  if (cands.size() < count) {
    throw ConvergenceError(
        "cap_eigenpairs: spectrum truncated before the requested count");
  }

  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) {
              const double la = lambda_of_degree(a.mu);
              const double lb = lambda_of_degree(b.mu);
              if (la != lb) return la < lb;
              if (a.m != b.m) return a.m < b.m;
              return a.sine < b.sine;
            });
  cands.resize(count);

  std::vector<EigenPair> pairs;
  pairs.reserve(count);
  for (std::size_t nu = 0; nu < count; ++nu) {
    EigenPair pair = make_cap_pair(cands[nu], dom.theta0, nodes);
    pair.nu = nu;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

ExhaustionReport exhaustion_convergence(const Cap3D& dom,
                                        const std::vector<double>& thetas,
                                        double compact_margin) {
  validate_domain(dom);
  if (thetas.empty()) {
    throw PreconditionError("exhaustion_convergence: empty angle sequence");
  }
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    if (!(thetas[j] > 0.0) || !(thetas[j] < dom.theta0) ||
        (j > 0 && !(thetas[j] > thetas[j - 1]))) {
      throw PreconditionError(
          "exhaustion_convergence: angles must increase strictly within "
          "(0, theta0)");
    }
  }
  if (!(compact_margin > 0.0) || !(dom.theta0 - compact_margin > 0.0)) {
    throw PreconditionError(
        "exhaustion_convergence: compact margin must lie in (0, theta0)");
  }

  const auto full = cap_eigenpairs(dom, 1);
  const std::vector<double> grid =
      linspace(0.0, dom.theta0 - compact_margin, 256);

  ExhaustionReport report;
  report.limit_lambda = full[0].lambda;
  for (double theta_j : thetas) {
    const auto sub = cap_eigenpairs(Cap3D{theta_j}, 1);
    report.lambdas.push_back(sub[0].lambda);
    double sup = 0.0;
    for (double theta : grid) {
      sup = std::max(sup, std::abs(sub[0].value(theta, 0.0) -
                                   full[0].value(theta, 0.0)));
    }
    report.sup_gaps.push_back(sup);
  }

  report.lambda_strictly_decreasing = true;
  for (std::size_t j = 0; j < report.lambdas.size(); ++j) {
    const bool above_limit = report.lambdas[j] > report.limit_lambda;
    const bool below_prev = j == 0 || report.lambdas[j] < report.lambdas[j - 1];
    if (!above_limit || !below_prev) {
      report.lambda_strictly_decreasing = false;
    }
  }
  report.final_lambda_gap = report.lambdas.back() - report.limit_lambda;
  report.final_sup_gap = report.sup_gaps.back();
  report.converged =
      report.lambda_strictly_decreasing && report.final_sup_gap <= 1e-4;
  return report;
}

EigenGrowthReport eigen_growth_check(const std::vector<EigenPair>& pairs,
                                     const SphericalDomain& dom) {
  if (pairs.size() < 5) {
    throw PreconditionError("eigen_growth_check: need at least 5 pairs");
  }
  const int n = dom.n();
  const double weyl = 2.0 / static_cast<double>(n - 1);

  EigenGrowthReport report;
  report.b1 = std::numeric_limits<double>::infinity();
  report.b2 = 0.0;
  report.b3 = 0.0;
  bool sorted = true;
  std::vector<double> xs, ys;
  xs.reserve(pairs.size());
  ys.reserve(pairs.size());

  double theta_lo = 0.0, theta_hi = 0.0;
  if (dom.is_sector()) {
    theta_lo = dom.sector().alpha;
    theta_hi = dom.sector().beta;
  } else {
    theta_hi = dom.cap().theta0;
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const EigenPair& pair = pairs[i];
    if (i > 0 && pair.lambda < pairs[i - 1].lambda) sorted = false;
    const double weight = std::pow(static_cast<double>(i + 1), weyl);
    report.b1 = std::min(report.b1, pair.lambda / weight);
    report.b2 = std::max(report.b2, pair.lambda / weight);
    xs.push_back(std::log(static_cast<double>(i + 1)));
    ys.push_back(std::log(pair.lambda));

    const double azimuth =
        pair.sine_branch ? 0.5 * kPi / std::max(pair.azimuthal_m, 1) : 0.0;
    double sup = 0.0;
    for (double theta : linspace(theta_lo, theta_hi, 512)) {
      sup = std::max(sup, std::abs(pair.value(theta, azimuth)));
    }
    report.b3 =
        std::max(report.b3, sup / std::pow(pair.lambda, 0.25 * n));
  }

  // Regression of ln lambda on ln(nu + 1).
  const double total = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = total * sxx - sx * sx;
  report.fitted_exponent = det > 0.0 ? (total * sxy - sx * sy) / det : 0.0;
  report.ok = sorted && std::isfinite(report.b2) && report.b1 > 0.0 &&
              std::isfinite(report.b3);
  return report;
}

}  // namespace conefield
