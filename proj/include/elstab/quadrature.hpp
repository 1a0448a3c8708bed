#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "elstab/linalg.hpp"

namespace elstab::quad {

/// Node/weight pair on [-1, 1].
struct Node1D {
  double x;
  double w;
};

/// 16-point Gauss-Legendre rule on [-1, 1], exact for degree 31.
std::span<const Node1D> gauss_legendre16();

/// Barycentric point with weight normalized so the weights sum to 1.
struct TriNode {
  double l0, l1, l2;
  double w;
};

/// Symmetric 6-point rule on the triangle, exact for degree 4.
const std::array<TriNode, 6>& triangle_degree4();

struct Interval {
  double lo;
  double hi;
};

/// Options controlling radial subdivision.
struct RadialOptions {
  double r_floor = 1e-12;  // geometric refinement toward r = 0 stops here
  double ratio = 0.5;      // geometric subdivision ratio toward r = 0
  double max_span = 2.0;   // hi/lo ratio above which a piece with lo > 0 is log-split
};

/// Splits [breaks.front(), breaks.back()] into Gauss-friendly pieces:
/// geometric toward r = 0, log-spaced over long spans, never straddling a breakpoint.
std::vector<Interval> radial_pieces(std::span<const double> breaks, const RadialOptions& opt = {});

struct RadialIntegral {
  double value = 0.0;
  // Contributions of the two geometric pieces closest to r = 0 (zero when the
  // integration range does not touch the origin). Used for divergence detection.
  double innermost = 0.0;
  double next_innermost = 0.0;
  bool touches_origin = false;
};

/// ∫ f(r) dr over the pieces generated from breaks.
RadialIntegral integrate_radial(const std::function<double(double)>& f, std::span<const double> breaks,
                                const RadialOptions& opt = {});

/// ∫∫ f(r, θ) r dr dθ over [breaks] × [0, beta], Gauss in both directions.
double integrate_polar(const std::function<double(double, double)>& f, std::span<const double> breaks,
                       double beta, int theta_panels = 8, const RadialOptions& opt = {});

/// Radical-inverse (van der Corput) value of index in the given prime base.
double radical_inverse(std::size_t index, unsigned base);

/// 2D Halton point in [0,1)² (bases 2 and 3), index starting at 1 to skip the origin.
Vec2 halton2(std::size_t index);

}  // namespace elstab::quad
