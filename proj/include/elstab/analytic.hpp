#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "elstab/coefficients.hpp"
#include "elstab/geometry.hpp"
#include "elstab/quadrature.hpp"

namespace elstab {

/// One smooth branch of a radial profile on [lo, hi].
struct RadialBranch {
  double lo;
  double hi;
  std::function<double(double)> w;
  std::function<double(double)> dw;
};

/// u(r, θ) = w(r)·sin(kθ) on a sector, extended by zero outside it.
class SeparableSolution {
 public:
  SeparableSolution(SectorDomain domain, double wavenumber, std::vector<RadialBranch> branches);

  const SectorDomain& domain() const { return domain_; }
  double wavenumber() const { return k_; }
  const std::vector<RadialBranch>& branches() const { return branches_; }
  /// Radii where branches meet (interior only).
  std::vector<double> breakpoints() const;
  /// r_inner, interior breakpoints, r_outer.
  std::vector<double> radial_breaks() const;

  /// Profile w(r) and w'(r); zero outside [r_inner, r_outer]. Breakpoints take the outer branch.
  double profile(double r) const;
  double profile_derivative(double r) const;
  /// Left/right limits of a specific branch boundary, evaluated with the adjacent branch formulas.
  double left_limit(double r) const;
  double right_limit(double r) const;
  double left_derivative(double r) const;
  double right_derivative(double r) const;

  double value(Vec2 p) const;
  Vec2 gradient(Vec2 p) const;

 private:
  const RadialBranch* find(double r) const;
  SectorDomain domain_;
  double k_;
  std::vector<RadialBranch> branches_;
};

/// Right-hand side f = amplitude·sin(kθ), amplitude = (4β² − π²)/β².
struct SourceTerm {
  double amplitude;
  double wavenumber;
  double operator()(Vec2 p) const;
};

SourceTerm sharpness_source(double beta);

/// q* = 2β/(β − π): ∇u₀ ∈ L^q iff q < q*.
double gradient_integrability_threshold(double beta);

/// u₀ = (r^{π/β} − r²) sin(πθ/β) on the unit sector.
SeparableSolution limit_solution(double beta);

/// Solution of −div(a_ε∇u) = f on the unit sector, a_ε the radial jump field.
SeparableSolution jump_solution(double beta, double alpha, double eps);

/// Solution of −Δu = f on the annular sector {eps < r < 1}.
SeparableSolution annulus_solution(double beta, double eps);

/// a − b with both extended by zero; the result lives on the union of the two sectors.
SeparableSolution difference(const SeparableSolution& a, const SeparableSolution& b);

/// sqrt(∫ |∇u|²) = sqrt((β/2) ∫ (w'² + k² w²/r²) r dr) by composite Gauss quadrature.
/// Throws NumericalError when the integrand is not integrable at r = 0.
double h1_seminorm_separable(const SeparableSolution& sol, const quad::RadialOptions& opt = {});

struct ResidualOptions {
  std::size_t samples = 1000;
  double step = 1e-5;
  /// Points closer than this to ∂Ω or to an interface circle are skipped.
  double exclusion = 1e-3;
  /// Points with r below this are skipped (derivatives blow up at the vertex).
  double corner_exclusion = 0.05;
};

struct ResidualReport {
  double max_residual = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// max |−div(A∇u) − f| by nested central differences at quasi-random interior points.
ResidualReport residual_check(const SeparableSolution& sol, const SourceTerm& src, const CoefficientField& field,
                              const ResidualOptions& opt = {});

struct InterfaceDefect {
  double radius;
  double value_jump;  // |w(r⁻) − w(r⁺)|
  double flux_jump;   // |a(r⁻) w'(r⁻) − a(r⁺) w'(r⁺)|
};

/// Transmission-condition defects at every breakpoint; the conductivity is read off the
/// field along the bisector θ = β/2.
std::vector<InterfaceDefect> interface_defects(const SeparableSolution& sol, const CoefficientField& field);

}  // namespace elstab
