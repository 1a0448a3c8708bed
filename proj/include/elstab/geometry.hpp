#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "elstab/linalg.hpp"

namespace elstab {

/// Circular sector {r_inner < r < r_outer, 0 < θ < beta}; r_inner = 0 gives the full sector.
class SectorDomain {
 public:
  SectorDomain(double beta, double r_inner = 0.0, double r_outer = 1.0);

  double beta() const { return beta_; }
  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }
  double area() const { return 0.5 * beta_ * (r_outer_ * r_outer_ - r_inner_ * r_inner_); }

  /// Open-set membership.
  bool contains(Vec2 p) const;
  /// Distance to the boundary for points inside (negative values are not produced).
  double boundary_distance(Vec2 p) const;

 private:
  double beta_;
  double r_inner_;
  double r_outer_;
};

/// Piecewise-linear function on a strictly increasing grid.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  /// Slope of the piece containing x (right-sided at grid nodes).
  double slope(double x) const;
  double lipschitz() const;
  double min_value() const;
  double max_value() const;

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  std::size_t piece(double x) const;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Subgraph domain {(x, y) : w_lo < x < w_hi, floor < y < h(x)} inside the cylinder
/// (w_lo, w_hi) × (floor, ceiling).
class GraphDomain {
 public:
  GraphDomain(PiecewiseLinear height, double floor, double ceiling, double lip_bound);

  const PiecewiseLinear& height() const { return height_; }
  double w_lo() const { return height_.xs().front(); }
  double w_hi() const { return height_.xs().back(); }
  double floor() const { return floor_; }
  double ceiling() const { return ceiling_; }
  double lip_bound() const { return lip_bound_; }
  /// The line floor + (ceiling - floor)/10 below which every admissible height stays above.
  double margin() const { return floor_ + 0.1 * (ceiling_ - floor_); }

  bool contains(Vec2 p) const;
  double area() const;
  bool same_cylinder(const GraphDomain& other) const;

 private:
  PiecewiseLinear height_;
  double floor_;
  double ceiling_;
  double lip_bound_;
};

/// A bi-Lipschitz map with its Jacobian and an explicit inverse.
struct BiLipschitzMap {
  std::function<Vec2(Vec2)> forward;
  std::function<Mat2(Vec2)> jacobian;
  std::function<Vec2(Vec2)> inverse;
  /// ‖Dφ‖_∞ and ‖(Dφ)⁻¹‖_∞ (spectral norm). +∞ when the bound does not exist.
  double forward_lip = 1.0;
  double inverse_lip = 1.0;
  /// |E|, E = {x : φ(x) ≠ x}.
  double e_set_measure = 0.0;
  /// Radii across which Dφ jumps; quadrature and meshes align with them.
  std::vector<double> kink_radii;
  /// For graph maps: the constant c with |E| ≤ c |Ω̃ △ Ω|.
  std::optional<double> measure_constant;
  /// True when φ maps circles centred at the origin onto such circles (identity, radial shifts).
  bool radial = false;
  std::string name;

  /// g = |det Dφ|.
  double density(Vec2 p) const { return std::abs(jacobian(p).det()); }
};

BiLipschitzMap identity_map();

/// x ↦ L x + t. `domain_area` is |Ω|, used for |E| when the map moves almost every point.
BiLipschitzMap affine_map(const Mat2& linear, Vec2 shift, double domain_area);

/// φ_ε(r, θ) = (s_ε(r), θ) with s_ε(r) = r/2 + ε on (0, 2ε) and s_ε(r) = r on [2ε, ∞).
/// Maps the sector Ω_β onto the annular sector {ε < r < 1}.
BiLipschitzMap radial_shift_map(double eps, double beta);

/// Radial profile s_ε and its one-sided derivative (outer branch at r = 2ε).
double radial_shift(double eps, double r);
double radial_shift_derivative(double eps, double r);

struct GraphMapOptions {
  /// When set, only the band of thickness band_factor·|h − h̃| under min(h, h̃) is stretched
  /// (never below the margin line) and |E| ≤ (band_factor + 1)·|Ω̃ △ Ω|. When unset, the whole
  /// column above the margin line is rescaled.
  std::optional<double> band_factor;
  /// Sample density per grid piece used for the Lipschitz estimates.
  int samples_per_piece = 32;
};

/// Vertical-rescaling map taking the subgraph of omega.height() onto that of omega_tilde.height().
BiLipschitzMap build_graph_map(const GraphDomain& omega, const GraphDomain& omega_tilde,
                               const GraphMapOptions& opt = {});

/// |Ω̃ △ Ω| = ∫_W |h − h̃| dx̄, exact for piecewise-linear heights.
double symmetric_difference_measure(const GraphDomain& omega, const GraphDomain& omega_tilde);

/// Sorted union of the two grids plus every point where h − h̃ changes sign.
std::vector<double> merged_breakpoints(const PiecewiseLinear& h, const PiecewiseLinear& h_tilde);

}  // namespace elstab
