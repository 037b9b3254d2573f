#include "conefield/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace conefield {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_tube_dimension(int n) {
  if (n < 1) {
    throw PreconditionError("tube base dimension must be at least 1");
  }
  if (n > 3) {
    throw UnsupportedError("tube base dimension above 3 is not implemented");
  }
}

void check_extent(double extent, const char* label) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    std::ostringstream msg;
    msg << label << " must be positive and finite";
    throw ConstructionError(msg.str());
  }
}

std::size_t even_subdivisions(std::size_t nodes) {
  std::size_t m = std::max<std::size_t>(nodes, 4);
  if (m % 2 != 0) ++m;
  return m;
}

// Composite Simpson with an even number m of subintervals.
double simpson(const std::function<double(double)>& f, double lo, double hi,
               std::size_t m) {
  const double h = (hi - lo) / static_cast<double>(m);
  double sum = f(lo) + f(hi);
  for (std::size_t i = 1; i < m; ++i) {
    sum += f(lo + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

double least_squares_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const double count = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// TubeDomain
// ---------------------------------------------------------------------------

TubeDomain::TubeDomain(int base_dimension, IntervalSection section)
    : n_(base_dimension), kind_(Kind::kInterval), extent_(section.width) {
  check_tube_dimension(n_);
  check_extent(extent_, "interval width");
}

TubeDomain::TubeDomain(int base_dimension, DiskSection section)
    : n_(base_dimension), kind_(Kind::kDisk), extent_(section.radius) {
  check_tube_dimension(n_);
  check_extent(extent_, "disk radius");
}

IntervalSection TubeDomain::interval() const {
  if (kind_ != Kind::kInterval) {
    throw PreconditionError("cross-section is not an interval");
  }
  return IntervalSection{extent_};
}

DiskSection TubeDomain::disk() const {
  if (kind_ != Kind::kDisk) {
    throw PreconditionError("cross-section is not a disk");
  }
  return DiskSection{extent_};
}

double TubeDomain::lambda0() const {
  const double frequency = ground_root() / extent_;
  return frequency * frequency;
}

double TubeDomain::ground_root() const {
  return kind_ == Kind::kInterval ? kPi : kBesselJ0FirstRoot;
}

double TubeDomain::phi0(const CrossSectionPoint& y) const {
  if (!contains(y)) return 0.0;
  if (kind_ == Kind::kInterval) {
    return std::sqrt(2.0 / extent_) * std::sin(kPi * y.a / extent_);
  }
  const double rho = std::hypot(y.a, y.b);
  const double amp = 1.0 / (std::sqrt(kPi) * extent_ *
                            std::cyl_bessel_j(1, kBesselJ0FirstRoot));
  return amp * std::cyl_bessel_j(0, kBesselJ0FirstRoot * rho / extent_);
}

bool TubeDomain::contains(const CrossSectionPoint& y) const {
  if (kind_ == Kind::kInterval) {
    return y.a > 0.0 && y.a < extent_;
  }
  return std::hypot(y.a, y.b) < extent_;
}

double TubeDomain::section_measure() const {
  return kind_ == Kind::kInterval ? extent_ : kPi * extent_ * extent_;
}

double TubeDomain::section_integral(
    const std::function<double(const CrossSectionPoint&)>& f,
    std::size_t nodes) const {
  if (!f) throw PreconditionError("section_integral: empty integrand");
  const std::size_t m = even_subdivisions(nodes);
  if (kind_ == Kind::kInterval) {
    return simpson([&](double t) { return f(CrossSectionPoint{t, 0.0}); }, 0.0,
                   extent_, m);
  }
  const double step = 2.0 * kPi / static_cast<double>(m);
  auto ring = [&](double rho) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double phi = step * (static_cast<double>(j) + 0.5);
      sum += f(CrossSectionPoint{rho * std::cos(phi), rho * std::sin(phi)});
    }
    return sum * step * rho;
  };
  return simpson(ring, 0.0, extent_, m);
}

bool TubeDomain::same_geometry(const TubeDomain& other) const {
  return n_ == other.n_ && kind_ == other.kind_ && extent_ == other.extent_;
}

// ---------------------------------------------------------------------------
// Radial pair along the tube
// ---------------------------------------------------------------------------

RadialPair tube_radial_pair(const TubeDomain& dom, const RadialPotential& q,
                            double r_max, double eps) {
  const double shift = dom.lambda0();
  PotentialHints hints;
  hints.growth = GrowthClass::kRapid;  // r^2 (lambda0 + q) is unbounded
  hints.power_limit = 0.0;
  hints.twice_differentiable = q.hints().twice_differentiable;

  std::vector<double> parameters = q.parameters();
  parameters.insert(parameters.begin(), shift);
  RadialPotential shifted(
      "lambda0 + " + q.name(), [shift, q](double r) { return shift + q(r); },
      hints, std::move(parameters));

  SolveOptions options;
  options.r_max = r_max;
  options.eps = eps;
  if (dom.n() == 1) {
    // Select the even growing solution.  The admixture of the odd branch
    // scales like sqrt(lambda0 + q(0)) * r_start, so the start must sit far
    // below the default for the closed forms to be met at 1e-8.
    options.start_exponent = 0.0;
    options.r_min = 1e-10;
  }
  return solve_pair(RadialIndex{dom.n(), 0.0}, shifted, options);
}

// ---------------------------------------------------------------------------
// Sphere averages and the minimal-growth ratio
// ---------------------------------------------------------------------------

double tube_average(const TubeDomain& dom, const TubeSampler& u,
                    const CrossSectionPoint& y, double R, std::size_t nodes) {
  if (!u) throw PreconditionError("tube_average: empty sampler");
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw PreconditionError("tube_average: R must be positive and finite");
  }
  const std::size_t m = even_subdivisions(nodes);
  switch (dom.n()) {
    case 1: {
      const double plus = u(TubePoint{{{R, 0.0, 0.0}}, y});
      const double minus = u(TubePoint{{{-R, 0.0, 0.0}}, y});
      return 0.5 * (plus + minus);
    }
    case 2: {
      const double step = 2.0 * kPi / static_cast<double>(m);
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double phi = step * (static_cast<double>(j) + 0.5);
        sum += u(TubePoint{{{R * std::cos(phi), R * std::sin(phi), 0.0}}, y});
      }
      return sum / static_cast<double>(m);
    }
    default: {
      const double step = 2.0 * kPi / static_cast<double>(m);
      auto ring = [&](double z) {
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double phi = step * (static_cast<double>(j) + 0.5);
          sum += u(TubePoint{
              {{R * rho * std::cos(phi), R * rho * std::sin(phi), R * z}}, y});
        }
        return sum / static_cast<double>(m);
      };
      return 0.5 * simpson(ring, -1.0, 1.0, m);
    }
  }
}

GrowthReport tube_nevanlinna(const TubeSampler& u, const TubeDomain& dom,
                             const RadialPair& pair,
                             const std::vector<double>& radii,
                             std::size_t section_nodes,
                             std::size_t sphere_nodes, bool clip_positive) {
  if (!u) throw PreconditionError("tube_nevanlinna: empty sampler");
  if (radii.empty()) {
    throw PreconditionError("tube_nevanlinna: need at least one radius");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) {
      throw PreconditionError("tube_nevanlinna: radii must be positive");
    }
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      throw PreconditionError("tube_nevanlinna: radii must increase");
    }
  }
  if (radii.front() < pair.r_min() || radii.back() > pair.r_max()) {
    throw RangeError("tube_nevanlinna: radii leave the solved range of V");
  }

  GrowthReport report;
  report.radii = radii;
  report.ratios.assign(radii.size(), 0.0);
  parallel_for(radii.size(), [&](std::size_t j) {
    const double r = radii[j];
    const TubeSampler kept = [&](const TubePoint& p) {
      const double value = u(p);
      return clip_positive ? std::max(value, 0.0) : value;
    };
    const double mass = dom.section_integral(
        [&](const CrossSectionPoint& y) {
          return tube_average(dom, kept, y, r, sphere_nodes) * dom.phi0(y);
        },
        section_nodes);
    report.ratios[j] = mass / std::exp(pair.log_v(r));
  });

  report.min_ratio =
      *std::min_element(report.ratios.begin(), report.ratios.end());
  std::vector<double> log_r(radii.size());
  std::transform(radii.begin(), radii.end(), log_r.begin(),
                 [](double r) { return std::log(r); });
  report.trend_slope = least_squares_slope(log_r, report.ratios);
  return report;
}

// ---------------------------------------------------------------------------
// TubeMeasure and the two-sided summability integrals
// ---------------------------------------------------------------------------

TubeMeasure::TubeMeasure(TubeDomain domain) : domain_(std::move(domain)) {}

void TubeMeasure::add_atom(double distance, const CrossSectionPoint& y,
                           double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw PreconditionError("atom mass must be positive and finite");
  }
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw PreconditionError("atom distance must be nonnegative and finite");
  }
  if (!domain_.contains(y)) {
    throw PreconditionError(
        "atom cross-section point must lie strictly inside the section");
  }
  atoms_.push_back(TubeAtom{distance, y, mass});
}

BlaschkeReport tube_blaschke(const TubeMeasure& measure, const TubeDomain& dom,
                             const RadialPair& pair, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw PreconditionError("split radius b must be positive and finite");
  }
  if (!measure.domain().same_geometry(dom)) {
    throw PreconditionError("measure lives on a different tube");
  }
  if (pair.index().n != dom.n() || pair.index().lambda != 0.0 ||
      !(pair.potential()(1.0) >= dom.lambda0() * (1.0 - 1e-9))) {
    throw PreconditionError(
        "pair must come from tube_radial_pair over the same domain (the "
        "section eigenvalue is folded into the potential)");
  }

  constexpr int kMaxOctaves = 256;
  const double log_v_floor = pair.log_v(pair.r_min());

  BlaschkeReport report;
  std::vector<double> near_octaves;
  double near_total = 0.0;
  double far_total = 0.0;

  for (const TubeAtom& atom : measure.atoms()) {
    const double angle_weight = dom.phi0(atom.y);
    if (atom.distance >= b) {
      if (atom.distance > pair.r_max()) {
        std::ostringstream msg;
        msg << "atom at distance " << atom.distance
            << " lies beyond the solved range " << pair.r_max()
            << "; rebuild the pair with a larger r_max";
        throw RangeError(msg.str());
      }
      const double term =
          atom.mass * std::exp(pair.log_w(atom.distance)) * angle_weight;
      int k = static_cast<int>(std::floor(std::log2(atom.distance / b)));
      k = std::clamp(k, 0, kMaxOctaves - 1);
      if (report.far_octaves.size() <= static_cast<std::size_t>(k)) {
        report.far_octaves.resize(static_cast<std::size_t>(k) + 1, 0.0);
      }
      report.far_octaves[static_cast<std::size_t>(k)] += term;
      far_total += term;
    } else {
      const double log_v = atom.distance >= pair.r_min()
                               ? pair.log_v(atom.distance)
                               : log_v_floor;
      const double term = atom.mass * std::exp(log_v) * angle_weight;
      int k = atom.distance > 0.0
                  ? static_cast<int>(std::floor(std::log2(b / atom.distance)))
                  : kMaxOctaves - 1;
      k = std::clamp(k, 0, kMaxOctaves - 1);
      if (near_octaves.size() <= static_cast<std::size_t>(k)) {
        near_octaves.resize(static_cast<std::size_t>(k) + 1, 0.0);
      }
      near_octaves[static_cast<std::size_t>(k)] += term;
      near_total += term;
    }
  }

  report.near_finite = octave_tail_decays(near_octaves);
  report.far_finite = octave_tail_decays(report.far_octaves);
  report.near = report.near_finite ? near_total : kInf;
  report.far = report.far_finite ? far_total : kInf;
  return report;
}

}  // namespace conefield
