// Tubes: products of an unbounded factor R^n with a bounded cross-section
// (an interval or a disk).  The principal Dirichlet eigenvalue lambda0 of
// the cross-section enters the radial equation as a constant zeroth-order
// coefficient, so the one-dimensional engine applies with the potential
// shifted to lambda0 + q; growth along the tube is then exponential rather
// than power-like.  The ground mode phi0 of the cross-section is the
// natural angular weight for sphere averages, Nevanlinna-type minimal
// growth ratios, and the two-sided summability (Blaschke-type) integrals
// that decide which atomic masses arise from bounded subsolutions.
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "conefield/carleman.hpp"
#include "conefield/common.hpp"
#include "conefield/potential.hpp"
#include "conefield/growth.hpp"
#include "conefield/radial_ode.hpp"

namespace conefield {

// First positive root of the order-zero Bessel function J0; the defining
// residual |J0(root)| stays below 1e-12.
inline constexpr double kBesselJ0FirstRoot = 2.40482555769577276862163187933;

// Cross-section (0, width): one bounded direction.
struct IntervalSection {
  double width = 1.0;
};

// Cross-section disk of the given radius about the axis: two bounded
// directions.
struct DiskSection {
  double radius = 1.0;
};

// Coordinate in the cross-section.  Intervals read `a` alone (position in
// (0, width)); disks read (a, b) as Cartesian offsets from the axis.
struct CrossSectionPoint {
  double a = 0.0;
  double b = 0.0;
};

// Geometry of a tube R^n x D together with the spectral data of D that the
// radial theory consumes: lambda0 and the L2-normalised ground mode phi0.
class TubeDomain {
 public:
  TubeDomain(int base_dimension, IntervalSection section);
  TubeDomain(int base_dimension, DiskSection section);

  // Dimension of the unbounded factor (1, 2 or 3 supported).
  int n() const { return n_; }
  // Dimension of the cross-section: 1 for intervals, 2 for disks.
  int p() const { return kind_ == Kind::kInterval ? 1 : 2; }
  bool is_interval() const { return kind_ == Kind::kInterval; }
  IntervalSection interval() const;
  DiskSection disk() const;

  // Principal Dirichlet eigenvalue of the cross-section: (pi/width)^2 for
  // intervals and (root/radius)^2 for disks, with root the first zero of
  // J0.
  double lambda0() const;
  // pi, resp. the first root of J0 (the dimensionless ground frequency).
  double ground_root() const;

  // Ground mode, normalised so that the integral of phi0^2 over the
  // cross-section is 1, and extended by zero outside the open section.
  double phi0(const CrossSectionPoint& y) const;
  // True when y lies strictly inside the cross-section.
  bool contains(const CrossSectionPoint& y) const;
  // Length of the interval, resp. area of the disk.
  double section_measure() const;

  // Integral of f over the cross-section: composite Simpson along the
  // bounded axis (`nodes` subintervals, rounded up to even), with a
  // midpoint rule of `nodes` points in the disk angle.
  double section_integral(
      const std::function<double(const CrossSectionPoint&)>& f,
      std::size_t nodes = 64) const;

  // Same factor dimension and identical cross-section.
  bool same_geometry(const TubeDomain& other) const;

 private:
  enum class Kind { kInterval, kDisk };

  int n_;
  Kind kind_;
  double extent_;  // interval width, resp. disk radius
};

// Fundamental pair (V, W) for radial profiles along the tube: solves
//
//     y'' + (n-1)/r y' - (lambda0 + q(r)) y = 0,
//
// by handing the shifted potential lambda0 + q to the radial engine with a
// zero separation constant.  For n = 1 the regular start is overridden to
// slope zero so that V is the even growing solution.  Normalisation and
// error reporting follow solve_pair.
RadialPair tube_radial_pair(const TubeDomain& dom, const RadialPotential& q,
                            double r_max = 1e3, double eps = 1e-10);

// Point of the tube: axis coordinates (first n entries used) plus the
// cross-section coordinate.
struct TubePoint {
  std::array<double, 3> x{{0.0, 0.0, 0.0}};
  CrossSectionPoint y;
};

using TubeSampler = std::function<double(const TubePoint&)>;

// Average of u over the sphere of radius R in the unbounded factor, taken
// at a fixed cross-section coordinate y.  For n = 1 this is the two-point
// mean (u(R) + u(-R))/2; for n = 2 a midpoint rule on the circle; for
// n = 3 composite Simpson in the polar cosine times a midpoint rule in the
// azimuth, each with `nodes` points (rounded up to even, at least 4).
double tube_average(const TubeDomain& dom, const TubeSampler& u,
                    const CrossSectionPoint& y, double R,
                    std::size_t nodes = 64);

// ratio(R) = integral over the cross-section of M(y, R, u^+) phi0(y),
// divided by V(R), where M is the sphere average above.  A vanishing lower
// limit of this ratio is the minimal-growth criterion in tube geometry;
// evaluation is parallel over radii.  With clip_positive = false the
// signed samples are used instead.
GrowthReport tube_nevanlinna(const TubeSampler& u, const TubeDomain& dom,
                             const RadialPair& pair,
                             const std::vector<double>& radii,
                             std::size_t section_nodes = 64,
                             std::size_t sphere_nodes = 64,
                             bool clip_positive = true);

// Atom of a tube measure.  Weights depend on the axis point only through
// its distance from the origin, so atoms are stored as (distance, y, mass).
struct TubeAtom {
  double distance = 0.0;
  CrossSectionPoint y;
  double mass = 0.0;
};

// Purely atomic mass distribution on a tube.
class TubeMeasure {
 public:
  explicit TubeMeasure(TubeDomain domain);

  // distance >= 0 (the axis sphere may degenerate to the origin), y
  // strictly inside the cross-section, mass positive and finite.
  void add_atom(double distance, const CrossSectionPoint& y, double mass);

  const TubeDomain& domain() const { return domain_; }
  const std::vector<TubeAtom>& atoms() const { return atoms_; }

 private:
  TubeDomain domain_;
  std::vector<TubeAtom> atoms_;
};

// Two-sided summability integrals with tube weights: V(|x|) phi0(y) over
// distances below the split radius b, W(|x|) phi0(y) from b outward,
// with the same per-octave ledgers and trailing-decay verdicts as the cone
// version.  V is frozen at its value at the pair's inner range end for
// atoms below it (an upper bound, since V increases); atoms beyond the
// solved outer range raise a range error because the exponentially
// decaying W admits no honest power continuation.
BlaschkeReport tube_blaschke(const TubeMeasure& measure, const TubeDomain& dom,
                             const RadialPair& pair, double b);

}  // namespace conefield
