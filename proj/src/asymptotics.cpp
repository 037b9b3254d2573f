#include "conefield/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conefield/common.hpp"

namespace conefield {
namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

// Signed adaptive integral, robust to a > b.
template <typename F>
double adaptive_integral(const F& f, double a, double b) {
  if (a == b) return 0.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double value = Quad::integrate(f, lo, hi, 12, 1e-13);
  return a < b ? value : -value;
}

// Trapezoid rule for samples f_i given at abscissae x_i.
double trapezoid(const std::vector<double>& x, const std::vector<double>& f,
                 std::size_t lo, std::size_t hi) {
  double total = 0.0;
  for (std::size_t i = lo + 1; i <= hi; ++i) {
    total += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
  }
  return total;
}

// Split the sample range in half (in x) and report whether the contribution
// of the second half is small compared to the first: the numerical stand-in
// for "the integral converges" on a finite probe.
struct TailTrend {
  double total = 0.0;
  bool converged = false;
};

TailTrend tail_trend(const std::vector<double>& x,
                     const std::vector<double>& f) {
  TailTrend out;
  if (x.size() < 4) return out;
  const double x_mid = 0.5 * (x.front() + x.back());
  std::size_t mid = 0;
  while (mid + 1 < x.size() && x[mid] < x_mid) ++mid;
  const double first = trapezoid(x, f, 0, mid);
  const double second = trapezoid(x, f, mid, x.size() - 1);
  out.total = first + second;
  out.converged = second <= 0.5 * first + 1e-12 * (1.0 + std::abs(out.total));
  return out;
}

// Least-squares line y = c + m x; returns {c, m}.
std::pair<double, double> fit_line(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det <= 0.0) return {y.empty() ? 0.0 : y.front(), 0.0};
  return {(sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

// Integral of (s(t) - k)^2 d ln t over the probe, with a convergence trend.
TailTrend power_tail_integral(const std::vector<double>& log_r,
                              const std::vector<double>& s, double k) {
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) f[i] = sqr(s[i] - k);
  return tail_trend(log_r, f);
}

// Integral of r^{-2} q^{-1/2} dr = r^{-1} s^{-1/2} d ln r over the probe.
TailTrend rapid_integral(const std::vector<double>& r,
                         const std::vector<double>& log_r,
                         const std::vector<double>& s) {
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] <= 0.0) {
      TailTrend out;
      out.total = std::numeric_limits<double>::infinity();
      return out;
    }
    f[i] = 1.0 / (r[i] * std::sqrt(s[i]));
  }
  return tail_trend(log_r, f);
}

double chi_from(int n, double lambda0, double k) {
  const double chi_sq = sqr(static_cast<double>(n - 2)) + 4.0 * (lambda0 + k);
  if (chi_sq <= 0.0) {
    throw PreconditionError(
        "power-limit law: (n-2)^2 + 4 (lambda0 + k) must be positive");
  }
  return std::sqrt(chi_sq);
}

// Centered five-point derivatives of a smooth function, with a step scaled to
// the abscissa.
template <typename F>
double fd_first(const F& f, double r) {
  const double h = 1e-3 * r;
  return (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) /
         (12 * h);
}

template <typename F>
double fd_second(const F& f, double r) {
  const double h = 1e-3 * r;
  return (-f(r - 2 * h) + 16 * f(r - h) - 30 * f(r) + 16 * f(r + h) -
          f(r + 2 * h)) /
         (12 * h * h);
}

}  // namespace

GrowthClassification classify_growth(const RadialPotential& q, double r_lo,
                                     double r_hi, std::size_t grid_size) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) {
    throw PreconditionError("classify_growth: need 0 < r_lo < r_hi");
  }
  if (r_hi < 100.0 * r_lo) {
    throw PreconditionError(
        "classify_growth: probe range must span at least two decades");
  }
  if (grid_size < 50) {
    throw PreconditionError("classify_growth: grid_size must be >= 50");
  }

  const std::vector<double> r = logspace(r_lo, r_hi, grid_size);
  std::vector<double> log_r(grid_size), s(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    log_r[i] = std::log(r[i]);
    s[i] = q.scaled_profile(r[i]);
  }

  GrowthClassification out;
  GrowthDiagnostics& d = out.diagnostics;

  // Monotonicity of the scaled profile (allowing round-off wiggle).
  d.s_nondecreasing = true;
  const double s_scale = std::max(1.0, *std::max_element(s.begin(), s.end()));
  for (std::size_t i = 1; i < grid_size; ++i) {
    if (s[i] < s[i - 1] - 1e-10 * s_scale) {
      d.s_nondecreasing = false;
      break;
    }
  }

  // Final-decade statistics.
  std::size_t decade_start = 0;
  while (decade_start + 1 < grid_size && r[decade_start] < 0.1 * r_hi) {
    ++decade_start;
  }
  double s_min = s[decade_start], s_max = s[decade_start], s_sum = 0.0;
  for (std::size_t i = decade_start; i < grid_size; ++i) {
    s_min = std::min(s_min, s[i]);
    s_max = std::max(s_max, s[i]);
    s_sum += s[i];
  }
  d.limit_estimate = s_sum / static_cast<double>(grid_size - decade_start);
  d.relative_spread =
      (s_max - s_min) / std::max(std::abs(d.limit_estimate), 1e-12);

  const TailTrend rapid = rapid_integral(r, log_r, s);
  d.rapid_integral = rapid.total;
  d.rapid_integral_converged = rapid.converged;

  const auto settle_power_like = [&](double k) -> bool {
    const TailTrend tail = power_tail_integral(log_r, s, k);
    d.power_tail_integral = tail.total;
    d.power_tail_converged = tail.converged;
    if (!tail.converged) return false;
    out.verdict = GrowthVerdict::kPowerLike;
    out.k = k;
    return true;
  };

  const GrowthClass claimed = q.hints().growth;
  if (claimed == GrowthClass::kPowerLike) {
    if (settle_power_like(q.hints().power_limit)) return out;
    d.tag_conflict = true;
    return out;
  }
  if (claimed == GrowthClass::kRapid) {
    if (d.s_nondecreasing && d.rapid_integral_converged &&
        s.back() > 10.0 * std::max(1.0, s.front())) {
      out.verdict = GrowthVerdict::kRapid;
      return out;
    }
    d.tag_conflict = true;
    return out;
  }

  // No claim: infer.  A small final-decade spread suggests a finite limit;
  // refine the limit by fitting the residual s - k ~ c r^{-beta}.
  if (d.relative_spread <= 0.10) {
    double k = d.limit_estimate;
    // Fit s - k0 ~ c r^{-beta} on [0.01 r_hi, 0.1 r_hi], anchoring k0 at the
    // last sample (the best available proxy for the limit, and one whose bias
    // only enters the fit through a small relative correction).
    const double k0 = s.back();
    std::vector<double> xs, ys;
    int sign_pos = 0, sign_neg = 0;
    for (std::size_t i = 0; i < grid_size; ++i) {
      if (r[i] < 0.01 * r_hi || r[i] > 0.1 * r_hi) continue;
      const double res = s[i] - k0;
      if (std::abs(res) < 1e-12 * std::max(1.0, std::abs(k0))) continue;
      (res > 0 ? sign_pos : sign_neg)++;
      xs.push_back(log_r[i]);
      ys.push_back(std::log(std::abs(res)));
    }
    if (xs.size() >= 8 && (sign_pos == 0 || sign_neg == 0)) {
      const auto [intercept, slope] = fit_line(xs, ys);
      if (slope < -1e-3) {
        d.fitted_decay = -slope;
        const double sign = sign_pos > 0 ? 1.0 : -1.0;
        double shift = 0.0;
        std::size_t count = 0;
        for (std::size_t i = decade_start; i < grid_size; ++i) {
          shift += s[i] - sign * std::exp(intercept + slope * log_r[i]);
          ++count;
        }
        k = shift / static_cast<double>(count);
      }
    }
    if (settle_power_like(k)) return out;
    return out;
  }

  if (d.s_nondecreasing && d.rapid_integral_converged &&
      s.back() > 10.0 * std::max(1.0, s.front())) {
    out.verdict = GrowthVerdict::kRapid;
    return out;
  }
  return out;
}

std::pair<AsymptoticLaw, AsymptoticLaw> power_limit_laws(
    int n, double lambda0, double k, const RadialPotential& q) {
  if (n < 2) throw PreconditionError("power_limit_laws: need n >= 2");
  const double chi = chi_from(n, lambda0, k);

  // Integral of (s(t) - k) dt/t, evaluated on the log axis where the
  // integrand is smooth and the quadrature resolves all decades alike.
  const auto correction = [q, k](double r) {
    if (!(r > 0.0)) throw RangeError("power-limit law: r must be positive");
    return adaptive_integral(
        [&q, k](double x) { return q.scaled_profile(std::exp(x)) - k; }, 0.0,
        std::log(r));
  };

  AsymptoticLaw v;
  v.kind = AsymptoticLaw::Kind::kPowerLimit;
  v.n = n;
  v.lambda0 = lambda0;
  v.k = k;
  v.chi_k = chi;
  v.increasing = true;
  v.log_value = [n, chi, correction](double r) {
    return 0.5 * (2.0 - n + chi) * std::log(r) + correction(r) / chi;
  };

  AsymptoticLaw w = v;
  w.increasing = false;
  w.log_value = [n, chi, correction](double r) {
    return 0.5 * (2.0 - n - chi) * std::log(r) - correction(r) / chi;
  };
  return {v, w};
}

std::pair<AsymptoticLaw, AsymptoticLaw> jwkb_laws(int n, double lambda0,
                                                  const RadialPotential& q,
                                                  double probe_lo,
                                                  double probe_hi) {
  if (n < 1) throw PreconditionError("jwkb_laws: need n >= 1");
  if (!(probe_lo > 0.0) || !(probe_hi > probe_lo)) {
    throw PreconditionError("jwkb_laws: need 0 < probe_lo < probe_hi");
  }
  if (!q.hints().twice_differentiable) {
    throw PreconditionError(
        "jwkb_laws: potential must be twice differentiable (derivatives are "
        "formed by finite differences)");
  }

  // Normal form of the radial equation: substituting y = r^{(1-n)/2} w turns
  // it into w'' = q_tilde w with the shifted potential below.  The law is
  // valid when q_tilde is positive and slowly varying.
  const double shift =
      0.25 * static_cast<double>((n - 1) * (n - 3)) + lambda0;
  const auto q_tilde = [q, shift](double r) { return q(r) + shift / (r * r); };

  const std::size_t probe_points = 200;
  const std::vector<double> r = logspace(probe_lo, probe_hi, probe_points);
  std::vector<double> log_r(probe_points);
  for (std::size_t i = 0; i < probe_points; ++i) log_r[i] = std::log(r[i]);

  std::vector<double> oscillation(probe_points);
  for (std::size_t i = 0; i < probe_points; ++i) {
    const double qt = q_tilde(r[i]);
    if (!(qt > 0.0)) {
      throw PreconditionError(
          "jwkb_laws: shifted potential must be positive on the probe range");
    }
    const double d1 = fd_first(q_tilde, r[i]);
    const double d2 = fd_second(q_tilde, r[i]);
    // r * |...| because the trapezoid below runs in d ln r.
    oscillation[i] =
        r[i] * std::abs(4.0 * qt * d2 - 5.0 * d1 * d1) * std::pow(qt, -2.5);
  }
  const TailTrend main_path = tail_trend(log_r, oscillation);

  bool admissible = main_path.converged;
  if (!admissible) {
    // Fallback path: three cruder sufficient conditions on q itself.
    std::vector<double> f1(probe_points), f2(probe_points);
    double ratio_mid = 0.0, ratio_end = 0.0;
    bool positive = true;
    for (std::size_t i = 0; i < probe_points; ++i) {
      const double qi = q(r[i]);
      if (!(qi > 0.0)) {
        positive = false;
        break;
      }
      const double q32 = std::pow(qi, -1.5);
      f1[i] = r[i] * std::pow(r[i], -4.0) * q32;
      f2[i] = r[i] * std::abs(fd_second(q, r[i])) * q32;
      const double decay = std::abs(fd_first(q, r[i])) * q32;
      if (i == probe_points / 2) ratio_mid = decay;
      if (i + 1 == probe_points) ratio_end = decay;
    }
    if (positive) {
      const bool conv1 = tail_trend(log_r, f1).converged;
      const bool conv2 = tail_trend(log_r, f2).converged;
      const bool vanishes = ratio_end <= 0.5 * ratio_mid + 1e-12;
      admissible = conv1 && conv2 && vanishes;
    }
  }
  if (!admissible) {
    throw PreconditionError(
        "jwkb_laws: potential varies too quickly for the JWKB form "
        "(oscillation-control integral diverges on the probe range)");
  }

  const auto phase = [q](double r) {
    if (!(r > 0.0)) throw RangeError("jwkb law: r must be positive");
    return adaptive_integral(
        [&q](double x) {
          const double t = std::exp(x);
          return std::sqrt(q(t)) * t;
        },
        0.0, std::log(r));
  };
  const auto amplitude = [q, n](double r) {
    const double qr = q(r);
    if (!(qr > 0.0)) {
      throw RangeError("jwkb law: potential must be positive at r");
    }
    return 0.5 * (1.0 - n) * std::log(r) - 0.25 * std::log(qr);
  };

  AsymptoticLaw v;
  v.kind = AsymptoticLaw::Kind::kJwkb;
  v.n = n;
  v.lambda0 = lambda0;
  v.k = 0.0;
  v.chi_k = chi_from(n, lambda0, 0.0);
  v.increasing = true;
  v.log_value = [amplitude, phase](double r) {
    return amplitude(r) + phase(r);
  };

  AsymptoticLaw w = v;
  w.increasing = false;
  w.log_value = [amplitude, phase](double r) {
    return amplitude(r) - phase(r);
  };
  return {v, w};
}

EnvelopeReport power_envelope_check(const RadialPair& pair, double k,
                                    double eps, double window_decades) {
  if (!(eps >= 0.0)) {
    throw PreconditionError("power_envelope_check: eps must be >= 0");
  }
  if (!(window_decades > 0.0)) {
    throw PreconditionError(
        "power_envelope_check: window_decades must be positive");
  }
  const double r_hi = pair.r_max();
  if (r_hi < 10.0 * pair.r_min()) {
    throw RangeError(
        "power_envelope_check: pair grid must span at least one decade");
  }
  const double r_lo =
      std::max(pair.r_min(), r_hi * std::pow(10.0, -window_decades));

  const double chi = chi_from(pair.index().n, pair.index().lambda, k);
  const double exponent = 0.5 * (2.0 - pair.index().n + chi);

  const std::size_t samples = 512;
  const std::vector<double> r = logspace(r_lo, r_hi, samples);
  std::vector<double> log_r(samples), d(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    log_r[i] = std::log(r[i]);
    d[i] = pair.log_v(r[i]) - exponent * log_r[i];
  }

  // The envelope holds iff some constant ln b fits between the two hulls
  // d - eps ln r and d + eps ln r (pointwise, over the window).
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    lower = std::max(lower, d[i] - eps * log_r[i]);
    upper = std::min(upper, d[i] + eps * log_r[i]);
  }

  EnvelopeReport out;
  out.holds = lower <= upper;
  out.fitted_slope = fit_line(log_r, d).second;
  out.window_lo = r_lo;
  out.window_hi = r_hi;
  return out;
}

}  // namespace conefield
