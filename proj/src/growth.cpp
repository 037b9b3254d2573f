#include "conefield/growth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "conefield/common.hpp"

namespace conefield {
namespace {

using Gauss128 = boost::math::quadrature::gauss<double, 128>;

constexpr std::size_t kAzimuthNodes = 128;

double factorial_ratio(int hi, int lo) {
  // (hi)! / (lo)! for hi >= lo >= 0, kept in double (degrees here are small).
  double out = 1.0;
  for (int j = lo + 1; j <= hi; ++j) out *= j;
  return out;
}

void check_radii(const std::vector<double>& radii, std::size_t minimum) {
  if (radii.size() < minimum) {
    throw PreconditionError("at least " + std::to_string(minimum) +
                            " radii are required");
  }
  for (std::size_t j = 0; j + 1 < radii.size(); ++j) {
    if (!(radii[j] < radii[j + 1])) {
      throw PreconditionError("radii must be strictly increasing");
    }
  }
  if (!(radii.front() > 0.0)) {
    throw PreconditionError("radii must be positive");
  }
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sxx += sqr(x[j] - mx);
    sxy += (x[j] - mx) * (y[j] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

ConeFunctionSampler ConeFunctionSampler::from_mode(const RadialPair& pair,
                                                   const EigenPair& eigen) {
  return ConeFunctionSampler(
      "mode", FunctionClass::kHarmonic, [pair, eigen](const ConePoint& p) {
        return std::exp(pair.log_v(p.r)) * eigen.value(p.theta, p.azimuth);
      });
}

ConeFunctionSampler ConeFunctionSampler::from_green_potential(
    GreenEvaluator evaluator,
    std::vector<std::pair<ConePoint, double>> charges) {
  if (charges.empty()) {
    throw PreconditionError("from_green_potential: at least one charge");
  }
  for (const auto& [point, weight] : charges) {
    (void)point;
    if (!(weight >= 0.0)) {
      throw PreconditionError("from_green_potential: weights must be >= 0");
    }
  }
  return ConeFunctionSampler(
      "green-potential", FunctionClass::kGeneric,
      [ev = std::move(evaluator),
       charges = std::move(charges)](const ConePoint& p) {
        double sum = 0.0;
        for (const auto& [point, weight] : charges) {
          sum += weight * ev.evaluate(p, point).value;
        }
        return sum;
      });
}

double angular_integral(
    const SphericalDomain& domain,
    const std::function<double(double theta, double azimuth)>& f) {
  if (domain.is_sector()) {
    const auto& s = domain.sector();
    return Gauss128::integrate([&](double theta) { return f(theta, 0.0); },
                               s.alpha, s.beta);
  }
  const double theta0 = domain.cap().theta0;
  const double step = 2.0 * kPi / kAzimuthNodes;
  return Gauss128::integrate(
      [&](double theta) {
        double ring = 0.0;
        for (std::size_t j = 0; j < kAzimuthNodes; ++j) {
          ring += f(theta, step * (j + 0.5));
        }
        return ring * step * std::sin(theta);
      },
      0.0, theta0);
}

GrowthReport nevanlinna_ratio(const ConeFunctionSampler& u,
                              const SphericalDomain& domain,
                              const EigenPair& phi0, const RadialPair& ground,
                              const std::vector<double>& radii,
                              bool clip_positive) {
  check_radii(radii, 1);
  if (radii.front() < ground.r_min() || radii.back() > ground.r_max()) {
    throw RangeError("nevanlinna_ratio: radii leave the solved range of V");
  }

  GrowthReport report;
  report.radii = radii;
  report.ratios.assign(radii.size(), 0.0);
  parallel_for(radii.size(), [&](std::size_t j) {
    const double r = radii[j];
    const double mass = angular_integral(domain, [&](double theta,
                                                     double azimuth) {
      const double value = u(ConePoint{r, theta, azimuth});
      const double kept = clip_positive ? std::max(value, 0.0) : value;
      return kept * phi0.value(theta, azimuth);
    });
    report.ratios[j] = mass / std::exp(ground.log_v(r));
  });

  report.min_ratio = *std::min_element(report.ratios.begin(),
                                       report.ratios.end());
  std::vector<double> log_r(radii.size());
  std::transform(radii.begin(), radii.end(), log_r.begin(),
                 [](double r) { return std::log(r); });
  report.trend_slope = fit_slope(log_r, report.ratios);
  return report;
}

ProjectionResidual radial_projection_residual(
    const ConeFunctionSampler& u, const SphericalDomain& domain,
    const EigenPair& phi0, const RadialPotential& q, double lambda0,
    const std::vector<double>& radii) {
  if (u.declared_class() != FunctionClass::kHarmonic) {
    throw PreconditionError(
        "radial_projection_residual: sampler not declared harmonic");
  }
  check_radii(radii, 5);
  const double h = radii[1] - radii[0];
  for (std::size_t j = 0; j + 1 < radii.size(); ++j) {
    if (std::abs(radii[j + 1] - radii[j] - h) > 1e-8 * h) {
      throw PreconditionError(
          "radial_projection_residual: radii must be uniformly spaced");
    }
  }

  const int n = domain.n();
  const auto project = [&](double r) {
    return angular_integral(domain, [&](double theta, double azimuth) {
      return u(ConePoint{r, theta, azimuth}) * phi0.value(theta, azimuth);
    });
  };
  const auto defect = [&](const std::vector<double>& grid, double spacing,
                          const std::vector<double>& y, double scale) {
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
      const double r = grid[j];
      const double second = (y[j + 1] - 2.0 * y[j] + y[j - 1]) / sqr(spacing);
      const double first = (y[j + 1] - y[j - 1]) / (2.0 * spacing);
      const double res = second + (n - 1) / r * first -
                         (lambda0 / sqr(r) + q(r)) * y[j];
      worst = std::max(worst, std::abs(res) / scale);
    }
    return worst;
  };

  ProjectionResidual out;
  out.radii = radii;
  out.y0.assign(radii.size(), 0.0);
  parallel_for(radii.size(), [&](std::size_t j) {
    out.y0[j] = project(radii[j]);
  });

  double mass_scale = 0.0;
  for (double r : {radii.front(), radii[radii.size() / 2], radii.back()}) {
    mass_scale = std::max(
        mass_scale, angular_integral(domain, [&](double theta, double az) {
          return std::abs(u(ConePoint{r, theta, az})) *
                 std::abs(phi0.value(theta, az));
        }));
  }
  double scale = 0.0;
  for (double y : out.y0) scale = std::max(scale, std::abs(y));
  scale = std::max(scale, 1e-10 * mass_scale) + 1e-300;

  out.max_residual = defect(radii, h, out.y0, scale);

  // Half-step refinement at the same interior radii: a defect that shrinks
  // like the step squared came from the difference stencil, not from u.
  if (out.max_residual > 1e-6) {
    std::vector<double> mid_y(radii.size() - 1);
    parallel_for(mid_y.size(), [&](std::size_t j) {
      mid_y[j] = project(radii[j] + 0.5 * h);
    });
    double refined = 0.0;
    for (std::size_t j = 1; j + 1 < radii.size(); ++j) {
      const double r = radii[j];
      const double hh = 0.5 * h;
      const double second =
          (mid_y[j] - 2.0 * out.y0[j] + mid_y[j - 1]) / sqr(hh);
      const double first = (mid_y[j] - mid_y[j - 1]) / (2.0 * hh);
      const double res = second + (n - 1) / r * first -
                         (lambda0 / sqr(r) + q(r)) * out.y0[j];
      refined = std::max(refined, std::abs(res) / scale);
    }
    if (refined < 0.3 * out.max_residual) {
      throw StepSizeError(
          "radial_projection_residual: defect is dominated by the step "
          "size (halving the spacing shrank it from " +
          std::to_string(out.max_residual) + " to " +
          std::to_string(refined) + "); use a finer radius grid");
    }
  }
  return out;
}

double real_harmonic(int degree, int index, double theta, double azimuth) {
  if (degree < 0 || index < 0 || index > 2 * degree) {
    throw PreconditionError("real_harmonic: index out of range");
  }
  const int m = (index + 1) / 2;
  const double x = std::cos(theta);
  const double normalization =
      std::sqrt((2.0 * degree + 1.0) / (4.0 * kPi) /
                factorial_ratio(degree + m, degree - m)) *
      (m > 0 ? std::sqrt(2.0) : 1.0);
  const double angular = m == 0 ? 1.0
                         : index % 2 == 1 ? std::cos(m * azimuth)
                                          : std::sin(m * azimuth);
  return normalization * associated_legendre(degree, m, x) * angular;
}

double LiouvilleTable::max_abs(std::size_t radius_index,
                               int max_degree) const {
  double worst = 0.0;
  for (const auto& row : rows) {
    if (row.degree > max_degree) continue;
    worst = std::max(worst, std::abs(row.values.at(radius_index)));
  }
  return worst;
}

const HarmonicCoefficientRow& LiouvilleTable::row(int degree,
                                                  int index) const {
  for (const auto& r : rows) {
    if (r.degree == degree && r.index == index) return r;
  }
  throw RangeError("LiouvilleTable: no such row");
}

LiouvilleTable liouville_coefficients(
    const std::function<double(const ConePoint&)>& u, double c0,
    int max_degree, const std::vector<double>& radii) {
  if (!(c0 >= 0.0)) {
    throw PreconditionError("liouville_coefficients: c0 must be >= 0");
  }
  if (max_degree < 0) {
    throw PreconditionError("liouville_coefficients: max_degree must be >= 0");
  }
  check_radii(radii, 1);

  const RadialPotential q = c0 == 0.0 ? RadialPotential::zero()
                                      : RadialPotential::constant(c0);
  std::vector<RadialPair> radial;
  radial.reserve(max_degree + 1);
  for (int k = 0; k <= max_degree; ++k) {
    radial.push_back(solve_pair(
        RadialIndex{3, static_cast<double>(k) * (k + 1)}, q, SolveOptions{}));
  }

  LiouvilleTable table;
  table.radii = radii;
  for (int k = 0; k <= max_degree; ++k) {
    for (int index = 0; index <= 2 * k; ++index) {
      table.rows.push_back(
          HarmonicCoefficientRow{k, index,
                                 std::vector<double>(radii.size(), 0.0)});
    }
  }

  const auto full_sphere = [&](const std::function<double(double, double)>& f) {
    const double step = 2.0 * kPi / kAzimuthNodes;
    return Gauss128::integrate(
        [&](double theta) {
          double ring = 0.0;
          for (std::size_t j = 0; j < kAzimuthNodes; ++j) {
            ring += f(theta, step * (j + 0.5));
          }
          return ring * step * std::sin(theta);
        },
        0.0, kPi);
  };

  parallel_for(radii.size(), [&](std::size_t j) {
    const double r = radii[j];
    std::size_t slot = 0;
    for (int k = 0; k <= max_degree; ++k) {
      for (int index = 0; index <= 2 * k; ++index, ++slot) {
        const double mass = full_sphere([&](double theta, double azimuth) {
          return u(ConePoint{r, theta, azimuth}) *
                 real_harmonic(k, index, theta, azimuth);
        });
        if (mass == 0.0) continue;
        const double log_abs = std::log(std::abs(mass)) -
                               radial[k].log_v(r);
        table.rows[slot].values[j] =
            std::copysign(std::exp(log_abs), mass);
      }
    }
  });
  return table;
}

PositiveProjection positive_solution_projection(
    const ConeFunctionSampler& u, const SphericalDomain& domain,
    const std::vector<GreenMode>& modes, const std::vector<double>& radii) {
  if (modes.empty()) {
    throw PreconditionError("positive_solution_projection: no modes");
  }
  check_radii(radii, 2);

  PositiveProjection out;
  out.min_value = std::numeric_limits<double>::infinity();
  double theta_lo = 0.0, theta_hi = 0.0;
  if (domain.is_sector()) {
    theta_lo = domain.sector().alpha;
    theta_hi = domain.sector().beta;
  } else {
    theta_hi = domain.cap().theta0;
  }
  const double pad = 1e-3 * (theta_hi - theta_lo);
  const std::vector<double> azimuths =
      domain.is_sector() ? std::vector<double>{0.0}
                         : linspace(0.0, 2.0 * kPi, 16);
  for (double r : radii) {
    for (double theta : linspace(theta_lo + pad, theta_hi - pad, 48)) {
      for (double azimuth : azimuths) {
        const double value = u(ConePoint{r, theta, azimuth});
        if (value < out.min_value) {
          out.min_value = value;
          if (value <= 0.0 && out.positive) {
            out.positive = false;
            out.violation = ConePoint{r, theta, azimuth};
          }
        }
      }
    }
  }
  if (!out.positive) return out;

  // Per-mode projections and two-parameter least-squares fits.
  std::vector<std::vector<double>> projections(modes.size());
  double global_scale = 0.0;
  for (std::size_t nu = 0; nu < modes.size(); ++nu) {
    projections[nu].assign(radii.size(), 0.0);
    for (std::size_t j = 0; j < radii.size(); ++j) {
      projections[nu][j] =
          angular_integral(domain, [&](double theta, double azimuth) {
            return u(ConePoint{radii[j], theta, azimuth}) *
                   modes[nu].eigen.value(theta, azimuth);
          });
      global_scale = std::max(global_scale, std::abs(projections[nu][j]));
    }
  }

  for (std::size_t nu = 0; nu < modes.size(); ++nu) {
    const auto& pair = *modes[nu].radial;
    std::vector<double> v(radii.size()), w(radii.size());
    double v_top = 0.0, w_top = 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      v[j] = std::exp(pair.log_v(radii[j]));
      w[j] = std::exp(pair.log_w(radii[j]));
      v_top = std::max(v_top, std::abs(v[j]));
      w_top = std::max(w_top, std::abs(w[j]));
    }
    double gvv = 0.0, gvw = 0.0, gww = 0.0, pv = 0.0, pw = 0.0, yy = 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double vj = v[j] / v_top, wj = w[j] / w_top;
      gvv += vj * vj;
      gvw += vj * wj;
      gww += wj * wj;
      pv += vj * projections[nu][j];
      pw += wj * projections[nu][j];
      yy += sqr(projections[nu][j]);
    }
    const double det = gvv * gww - sqr(gvw);
    if (!(det > 1e-14 * gvv * gww)) {
      std::ostringstream msg;
      msg << "positive_solution_projection: mode " << nu
          << " fit is ill-conditioned on the given radii; spread them over "
             "a wider range (e.g. a factor of "
          << std::max(4.0, 2.0 * radii.back() / radii.front())
          << " between the ends)";
      throw ConstructionError(msg.str());
    }

    ModeFit fit;
    if (std::sqrt(yy) < 1e-12 * global_scale) {
      out.modes.push_back(fit);  // projection is numerically zero
      continue;
    }
    const double a_hat = (gww * pv - gvw * pw) / det;
    const double b_hat = (gvv * pw - gvw * pv) / det;
    fit.a = a_hat / v_top;
    fit.b = b_hat / w_top;
    double defect = 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      defect += sqr(projections[nu][j] - fit.a * v[j] - fit.b * w[j]);
    }
    fit.residual = std::sqrt(defect / yy);
    out.modes.push_back(fit);
  }
  return out;
}

BoundCheck pl_bound_check(
    const ConeFunctionSampler& u, double offset, double sigma,
    const std::function<double(double)>& radial_majorant,
    const std::function<double(const ConePoint&)>& phi_hat,
    const std::vector<ConePoint>& grid) {
  if (grid.empty()) {
    throw PreconditionError("pl_bound_check: empty grid");
  }
  double phi_top = 0.0;
  for (const auto& p : grid) phi_top = std::max(phi_top, phi_hat(p));
  if (phi_top > 1.0 + 1e-9) {
    throw PreconditionError(
        "pl_bound_check: phi_hat exceeds 1 on the grid; pass the "
        "sup-normalized profile");
  }

  BoundCheck check;
  check.worst_margin = -std::numeric_limits<double>::infinity();
  double scale_at_worst = 1.0;
  for (const auto& p : grid) {
    const double majorant = offset + sigma * radial_majorant(p.r) * phi_hat(p);
    const double margin = u(p) - majorant;
    if (margin > check.worst_margin) {
      check.worst_margin = margin;
      check.worst_point = p;
      scale_at_worst = std::max(1.0, std::abs(majorant));
    }
  }
  check.ok = check.worst_margin <= 1e-8 * scale_at_worst;
  return check;
}

}  // namespace conefield
