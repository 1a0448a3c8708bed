#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "elstab/geometry.hpp"
#include "elstab/linalg.hpp"
#include "elstab/quadrature.hpp"

namespace elstab {

/// Two-sided spectral bounds lower·|ξ|² ≤ ξᵀA(x)ξ ≤ upper·|ξ|².
struct EllipticityBounds {
  double lower = 1.0;
  double upper = 1.0;

  /// Smallest M with 1/M ≤ lower and upper ≤ M; +∞ for a degenerate lower bound.
  double constant_M() const {
    if (lower <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(upper, 1.0 / lower);
  }
  bool degenerate() const { return lower <= 0.0; }
};

enum class FieldKind { constant, radial_jump, pulled_back, custom };

/// Evaluable symmetric 2×2 coefficient field.
class CoefficientField {
 public:
  CoefficientField(std::function<Mat2(Vec2)> eval, EllipticityBounds bounds, FieldKind kind,
                   std::vector<double> interface_radii = {});

  Mat2 operator()(Vec2 p) const { return eval_(p); }
  const EllipticityBounds& bounds() const { return bounds_; }
  FieldKind kind() const { return kind_; }
  /// Radii across which the field is discontinuous (sorted, unique).
  const std::vector<double>& interface_radii() const { return interface_radii_; }

 private:
  std::function<Mat2(Vec2)> eval_;
  EllipticityBounds bounds_;
  FieldKind kind_;
  std::vector<double> interface_radii_;
};

/// Constant symmetric positive-definite matrix field.
CoefficientField constant_field(const Mat2& a);

/// Scalar multiple of the identity, a(x)·I, with user-certified bounds.
CoefficientField scalar_field(std::function<double(Vec2)> a, double lower, double upper,
                              std::vector<double> interface_radii = {});

/// a_ε = alpha on |x| < eps and 1 on |x| ≥ eps (times I). The interface circle evaluates
/// the outer branch.
CoefficientField radial_jump_field(double alpha, double eps);

/// a(x) = Dφ(x)⁻¹ A(φ(x)) Dφ(x)⁻ᵗ.
CoefficientField pullback_field(const CoefficientField& field, const BiLipschitzMap& map);

/// Spectral positive part A₊ = Σ max(λ, 0) e eᵀ of a symmetric matrix.
Mat2 matrix_positive_part(const Mat2& a);

struct LpOptions {
  int theta_panels = 8;
  quad::RadialOptions radial{};
  /// Sample count for p = ∞ (Halton points).
  std::size_t sup_samples = 100000;
};

/// sup over entries (i, j) of ‖A_ij − B_ij‖_{L^p(domain)}; p = +∞ is a sampled supremum.
double lp_distance(const CoefficientField& a, const CoefficientField& b, double p, const SectorDomain& domain,
                   const LpOptions& opt = {});

/// Deterministic area-uniform Halton sample of a sector.
std::vector<Vec2> sample_sector(const SectorDomain& domain, std::size_t count);

struct FieldAudit {
  double max_asymmetry = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double max_eigenvalue = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  /// Points where the eigenvalues leave [lower, upper] by more than the tolerance.
  std::vector<Vec2> violations;
};

/// Checks symmetry and the certified ellipticity bounds at the given points.
FieldAudit audit_field(const CoefficientField& field, const std::vector<Vec2>& points, double rel_tol = 1e-12);

}  // namespace elstab
