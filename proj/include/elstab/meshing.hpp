#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "elstab/geometry.hpp"
#include "elstab/linalg.hpp"

namespace elstab {

/// How a mesh was produced; used to restore curved boundaries on refinement and for validity checks.
struct MeshMeta {
  std::variant<SectorDomain, GraphDomain> domain;
  double grading = 1.0;
  int refinement_level = 0;
  std::vector<double> aligned_radii;
  double min_angle_deg = 0.0;
};

/// Conforming P1 triangulation with per-vertex Dirichlet flags.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<std::uint8_t> dirichlet;
  MeshMeta meta;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  double signed_area(std::size_t t) const;
  double total_area() const;
  /// Longest edge over all triangles.
  double max_edge() const;
  /// Smallest interior angle in degrees.
  double min_angle_deg() const;
};

/// Radial node distribution r_i = r_in + (r_out − r_in)(i/n)^μ with every aligned radius
/// placed exactly on a node (nearby nodes are snapped, otherwise a node is inserted).
std::vector<double> graded_radii(const SectorDomain& domain, int n_radial, double grading,
                                 const std::vector<double>& aligned_radii = {});

/// Structured polar mesh on explicit node radii (first = r_inner, last = r_outer).
TriMesh mesh_sector_radii(const SectorDomain& domain, const std::vector<double>& radii, int n_angular,
                          double grading = 1.0, const std::vector<double>& aligned_radii = {});

TriMesh mesh_sector(const SectorDomain& domain, int n_radial, int n_angular, double grading = 1.0,
                    const std::vector<double>& aligned_radii = {});

/// Tensor grid on the subgraph domain; the top row follows h and every grid node of h is a column.
TriMesh mesh_graph_domain(const GraphDomain& domain, int n_x, int n_y);

/// Red refinement: 1 → 4 by edge midpoints; boundary midpoints on arcs are projected back to the arc.
TriMesh refine_uniform(const TriMesh& mesh);

struct MeshValidity {
  double min_signed_area = 0.0;
  std::size_t nonmanifold_edges = 0;    // edges with more than two triangles
  std::size_t boundary_edges = 0;       // edges with exactly one triangle
  std::size_t unflagged_boundary = 0;   // vertices on ∂Ω (or on a boundary edge) without a flag
  std::size_t flagged_interior = 0;     // flagged vertices away from ∂Ω
  bool ok() const { return min_signed_area > 0.0 && nonmanifold_edges == 0 && unflagged_boundary == 0 && flagged_interior == 0; }
};

MeshValidity check_mesh(const TriMesh& mesh, double boundary_tol = 1e-10);

/// `v x y flag` per vertex, then `t i j k` per triangle.
void write_mesh(std::ostream& os, const TriMesh& mesh);

}  // namespace elstab
