#pragma once

#include <optional>
#include <vector>

#include "elstab/analytic.hpp"
#include "elstab/fem.hpp"

namespace elstab {

/// ‖∇u_h − ∇u‖_{L²} over the solution mesh; triangles touching the vertex are integrated on a
/// geometric subdivision toward it.
double h1_error_vs_analytic(const FemSolution& sol, const SeparableSolution& exact, int corner_levels = 40);

/// ‖∇a − ∇b‖_{L²} over the evaluator mesh; each gradient is zero outside its own mesh.
double cross_domain_gradient_error(const FemSolution& sol_a, const FemSolution& sol_b, const TriMesh& evaluator);

/// Same, on a graded evaluator mesh of `region` aligned with both solution meshes' radii.
double cross_domain_gradient_error(const FemSolution& sol_a, const FemSolution& sol_b, const SectorDomain& region);

/// (Σ_T |∇u_T|^q |T|)^{1/q}.
double lq_gradient_norm(const FemSolution& sol, double q);

struct LqNormReport {
  std::optional<double> value;       // unset when divergence was detected
  bool divergent = false;
  std::vector<double> level_values;  // norm with the vertex cut-off at 10^{-2}, 10^{-4}, …
};

/// ‖∇u‖_{L^q} for a separable function by polar quadrature on nested vertex cut-offs; growth by
/// more than 5% per level across the last three levels flags divergence.
LqNormReport lq_gradient_norm(const SeparableSolution& sol, double q, int levels = 6);

}  // namespace elstab
