#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "elstab/coefficients.hpp"
#include "elstab/meshing.hpp"

namespace elstab {

/// Compressed sparse row matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
  /// max |K_ij − K_ji|.
  double asymmetry() const;
};

using ScalarFn = std::function<double(Vec2)>;

struct AssemblyInput {
  const CoefficientField* field = nullptr;
  /// Density g multiplying the coefficient; unset means g ≡ 1.
  ScalarFn weight;
  ScalarFn source;
  /// Extra factor on the source (e.g. g for the right-hand side g·f); unset means 1.
  ScalarFn source_weight;
};

/// Discrete system on the free (non-Dirichlet) vertices.
struct SparseSystem {
  std::shared_ptr<const TriMesh> mesh;
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<int> free_index;      // vertex -> unknown, -1 on Dirichlet vertices
  std::vector<int> unknown_vertex;  // unknown -> vertex
};

/// Element stiffness of ∫ (a g) ∇φ_i·∇φ_j on one triangle with the degree-4 rule.
std::array<std::array<double, 3>, 3> element_stiffness(const std::array<Vec2, 3>& tri,
                                                       const std::function<Mat2(Vec2)>& coeff);

/// Galerkin P1 assembly with symmetric elimination of Dirichlet vertices.
SparseSystem assemble(std::shared_ptr<const TriMesh> mesh, const AssemblyInput& in);

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Locates points in a mesh: walk from a hint, then bucket-grid candidate scan.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);
  /// Triangle containing p (lowest index on shared edges), or -1 outside the mesh.
  /// `hint` is read as the starting triangle and updated with the result.
  int locate(Vec2 p, int* hint = nullptr) const;
  std::array<double, 3> barycentric(int tri, Vec2 p) const;

 private:
  int scan(Vec2 p) const;
  const TriMesh* mesh_;
  std::vector<std::array<int, 3>> neighbours_;  // across edge opposite vertex k
  double x0_, y0_, cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> buckets_;
};

/// Nodal P1 function tied to its mesh.
class FemSolution {
 public:
  FemSolution(std::shared_ptr<const TriMesh> mesh, std::vector<double> nodal_values, SolveReport report = {});

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  const std::vector<double>& nodal_values() const { return values_; }
  const SolveReport& report() const { return report_; }
  const PointLocator& locator() const { return *locator_; }
  /// Constant gradient on triangle t.
  Vec2 triangle_gradient(std::size_t t) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::vector<double> values_;
  SolveReport report_;
  std::shared_ptr<const PointLocator> locator_;
  std::vector<Vec2> gradients_;
};

/// Jacobi-preconditioned conjugate gradients; throws ConvergenceFailure past max_iter.
FemSolution solve_cg(const SparseSystem& system, double rel_tol = 1e-10, int max_iter = 100000);

/// P1 gradient at a point; zero outside the mesh. `hint` speeds up repeated nearby queries.
Vec2 evaluate_gradient(const FemSolution& sol, Vec2 point, int* hint = nullptr);

/// Nodal interpolant (Dirichlet vertices keep the function value).
FemSolution interpolate(std::shared_ptr<const TriMesh> mesh, const ScalarFn& fn);

/// ∫ a g ∇u·∇u over the solution mesh with the degree-4 rule.
double energy(const FemSolution& sol, const CoefficientField& field, const ScalarFn& weight = {});

/// ‖K x − b‖ / ‖b‖ on the free unknowns.
double relative_residual(const SparseSystem& system, const FemSolution& sol);

/// `sol vertex_index value` per vertex.
void write_solution(std::ostream& os, const FemSolution& sol);

}  // namespace elstab
