#include "elstab/meshing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

#include "elstab/errors.hpp"

namespace elstab {

namespace {

using Edge = std::pair<int, int>;

Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::map<Edge, int> edge_counts(const TriMesh& mesh) {
  std::map<Edge, int> counts;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++counts[make_edge(t[k], t[(k + 1) % 3])];
  return counts;
}

double triangle_min_angle(Vec2 a, Vec2 b, Vec2 c) {
  auto angle = [](Vec2 p, Vec2 q, Vec2 r) {
    const Vec2 u = q - p;
    const Vec2 v = r - p;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)}) * 180.0 / std::numbers::pi;
}

bool on_geometric_boundary(const MeshMeta& meta, Vec2 p, double tol) {
  if (const auto* s = std::get_if<SectorDomain>(&meta.domain)) {
    const double r = norm(p);
    if (std::abs(r - s->r_outer()) <= tol) return true;
    if (s->r_inner() > 0.0 && std::abs(r - s->r_inner()) <= tol) return true;
    if (r <= tol) return true;
    // The two straight edges.
    const Vec2 e1 = from_polar(1.0, s->beta());
    return (std::abs(p.y) <= tol && p.x >= -tol) || (std::abs(cross(e1, p)) <= tol && dot(p, e1) >= -tol);
  }
  const auto& g = std::get<GraphDomain>(meta.domain);
  return std::abs(p.x - g.w_lo()) <= tol || std::abs(p.x - g.w_hi()) <= tol || std::abs(p.y - g.floor()) <= tol ||
         std::abs(p.y - g.height()(p.x)) <= tol;
}

}  // namespace

double TriMesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += signed_area(t);
  return a;
}

double TriMesh::max_edge() const {
  double h = 0.0;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, norm(vertices[t[k]] - vertices[t[(k + 1) % 3]]));
  return h;
}

double TriMesh::min_angle_deg() const {
  double m = 180.0;
  for (const auto& t : triangles) m = std::min(m, triangle_min_angle(vertices[t[0]], vertices[t[1]], vertices[t[2]]));
  return m;
}

std::vector<double> graded_radii(const SectorDomain& domain, int n_radial, double grading,
                                 const std::vector<double>& aligned_radii) {
  if (n_radial < 2) throw DomainError("radial count must be >= 2");
  if (!(grading >= 1.0)) throw DomainError("grading exponent must be >= 1");
  const double r0 = domain.r_inner();
  const double r1 = domain.r_outer();
  std::vector<double> radii;
  for (int i = 0; i <= n_radial; ++i) radii.push_back(r0 + (r1 - r0) * std::pow(static_cast<double>(i) / n_radial, grading));
  radii.back() = r1;

  std::vector<double> aligned = aligned_radii;
  std::sort(aligned.begin(), aligned.end());
  for (const double rho : aligned) {
    if (!(rho > r0 && rho < r1)) throw DomainError("aligned radius lies outside (r_inner, r_outer)");
    auto it = std::lower_bound(radii.begin(), radii.end(), rho);
    const std::size_t hi = static_cast<std::size_t>(it - radii.begin());
    const std::size_t lo = hi - 1;
    if (radii[hi] == rho) continue;
    const double gap = radii[hi] - radii[lo];
    const bool lo_fixed = lo == 0 || std::binary_search(aligned.begin(), aligned.end(), radii[lo]);
    const bool hi_fixed = hi + 1 == radii.size() || std::binary_search(aligned.begin(), aligned.end(), radii[hi]);
    // Snap a free neighbour when it is close; otherwise insert a new circle.
    if (!lo_fixed && rho - radii[lo] < 0.25 * gap)
      radii[lo] = rho;
    else if (!hi_fixed && radii[hi] - rho < 0.25 * gap)
      radii[hi] = rho;
    else
      radii.insert(radii.begin() + static_cast<std::ptrdiff_t>(hi), rho);
  }
  return radii;
}

TriMesh mesh_sector_radii(const SectorDomain& domain, const std::vector<double>& radii, int n_angular, double grading,
                          const std::vector<double>& aligned_radii) {
  if (n_angular < 2) throw DomainError("angular count must be >= 2");
  if (radii.size() < 2 || radii.front() != domain.r_inner() || radii.back() != domain.r_outer())
    throw DomainError("radii must start at r_inner and end at r_outer");
  TriMesh mesh{.vertices = {}, .triangles = {}, .dirichlet = {},
               .meta = {.domain = domain, .grading = grading, .refinement_level = 0, .aligned_radii = aligned_radii, .min_angle_deg = 0.0}};
  const int m = n_angular;
  const bool has_center = domain.r_inner() == 0.0;
  const std::size_t first_ring = has_center ? 1 : 0;

  if (has_center) {
    mesh.vertices.push_back({0.0, 0.0});
    mesh.dirichlet.push_back(1);
  }
  auto ring_index = [&](std::size_t i, int j) {
    return static_cast<int>((has_center ? 1 : 0) + (i - first_ring) * static_cast<std::size_t>(m + 1) + j);
  };
  for (std::size_t i = first_ring; i < radii.size(); ++i) {
    const bool arc = (i + 1 == radii.size()) || (!has_center && i == 0);
    for (int j = 0; j <= m; ++j) {
      const double t = domain.beta() * j / m;
      Vec2 p = from_polar(radii[i], t);
      if (j == 0) p.y = 0.0;
      mesh.vertices.push_back(p);
      mesh.dirichlet.push_back(arc || j == 0 || j == m ? 1 : 0);
    }
  }
  if (has_center) {
    for (int j = 0; j < m; ++j) mesh.triangles.push_back({0, ring_index(1, j), ring_index(1, j + 1)});
  }
  for (std::size_t i = first_ring; i + 1 < radii.size(); ++i) {
    for (int j = 0; j < m; ++j) {
      const int a = ring_index(i, j);
      const int b = ring_index(i + 1, j);
      const int c = ring_index(i + 1, j + 1);
      const int d = ring_index(i, j + 1);
      // Split along the shorter diagonal.
      if (norm(mesh.vertices[a] - mesh.vertices[c]) <= norm(mesh.vertices[b] - mesh.vertices[d])) {
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({a, c, d});
      } else {
        mesh.triangles.push_back({a, b, d});
        mesh.triangles.push_back({b, c, d});
      }
    }
  }
  mesh.meta.min_angle_deg = mesh.min_angle_deg();
  return mesh;
}

TriMesh mesh_sector(const SectorDomain& domain, int n_radial, int n_angular, double grading,
                    const std::vector<double>& aligned_radii) {
  return mesh_sector_radii(domain, graded_radii(domain, n_radial, grading, aligned_radii), n_angular, grading,
                           aligned_radii);
}

TriMesh mesh_graph_domain(const GraphDomain& domain, int n_x, int n_y) {
  if (n_x < 2 || n_y < 2) throw DomainError("grid counts must be >= 2");
  std::vector<double> xs;
  for (int i = 0; i <= n_x; ++i) xs.push_back(domain.w_lo() + (domain.w_hi() - domain.w_lo()) * i / n_x);
  xs.insert(xs.end(), domain.height().xs().begin(), domain.height().xs().end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }), xs.end());

  TriMesh mesh{.vertices = {}, .triangles = {}, .dirichlet = {},
               .meta = {.domain = domain, .grading = 1.0, .refinement_level = 0, .aligned_radii = {}, .min_angle_deg = 0.0}};
  const int nx = static_cast<int>(xs.size()) - 1;
  for (int i = 0; i <= nx; ++i) {
    const double top = domain.height()(xs[i]);
    for (int j = 0; j <= n_y; ++j) {
      const double y = (j == n_y) ? top : domain.floor() + (top - domain.floor()) * j / n_y;
      mesh.vertices.push_back({xs[i], y});
      mesh.dirichlet.push_back(i == 0 || i == nx || j == 0 || j == n_y ? 1 : 0);
    }
  }
  auto id = [&](int i, int j) { return i * (n_y + 1) + j; };
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < n_y; ++j) {
      const int a = id(i, j);
      const int b = id(i + 1, j);
      const int c = id(i + 1, j + 1);
      const int d = id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  mesh.meta.min_angle_deg = mesh.min_angle_deg();
  return mesh;
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh out{.vertices = mesh.vertices, .triangles = {}, .dirichlet = mesh.dirichlet, .meta = mesh.meta};
  out.meta.refinement_level = mesh.meta.refinement_level + 1;

  const auto counts = edge_counts(mesh);
  const auto* sector = std::get_if<SectorDomain>(&mesh.meta.domain);
  std::map<Edge, int> midpoint;
  std::vector<std::pair<int, Vec2>> projected;  // vertex index, chord midpoint
  auto mid = [&](int a, int b) {
    const Edge e = make_edge(a, b);
    if (auto it = midpoint.find(e); it != midpoint.end()) return it->second;
    Vec2 p = (mesh.vertices[e.first] + mesh.vertices[e.second]) * 0.5;
    const int idx = static_cast<int>(out.vertices.size());
    const bool boundary = counts.at(e) == 1;
    if (boundary && sector) {
      const double ra = norm(mesh.vertices[e.first]);
      const double rb = norm(mesh.vertices[e.second]);
      for (const double arc : {sector->r_outer(), sector->r_inner()}) {
        if (arc > 0.0 && std::abs(ra - arc) <= 1e-12 * arc && std::abs(rb - arc) <= 1e-12 * arc) {
          projected.emplace_back(idx, p);
          p = p * (arc / norm(p));
          break;
        }
      }
    }
    out.vertices.push_back(p);
    out.dirichlet.push_back(boundary ? 1 : 0);
    midpoint.emplace(e, idx);
    return idx;
  };
  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({m01, t[1], m12});
    out.triangles.push_back({m20, m12, t[2]});
    out.triangles.push_back({m01, m12, m20});
  }
  // a projected midpoint can push a thin child inside out (inner arc, coarse angles); keep the chord point there
  if (!projected.empty()) {
    std::vector<int> slot(out.vertices.size(), -1);
    for (std::size_t i = 0; i < projected.size(); ++i) slot[projected[i].first] = static_cast<int>(i);
    for (std::size_t t = 0; t < out.triangles.size(); ++t) {
      if (out.signed_area(t) > 0.0) continue;
      for (int v : out.triangles[t])
        if (slot[v] >= 0) out.vertices[v] = projected[slot[v]].second;
    }
  }
  out.meta.min_angle_deg = out.min_angle_deg();
  return out;
}

MeshValidity check_mesh(const TriMesh& mesh, double boundary_tol) {
  MeshValidity v;
  v.min_signed_area = mesh.triangles.empty() ? 0.0 : mesh.signed_area(0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) v.min_signed_area = std::min(v.min_signed_area, mesh.signed_area(t));

  std::vector<std::uint8_t> on_boundary_edge(mesh.vertices.size(), 0);
  for (const auto& [e, c] : edge_counts(mesh)) {
    if (c > 2) ++v.nonmanifold_edges;
    if (c == 1) {
      ++v.boundary_edges;
      on_boundary_edge[e.first] = on_boundary_edge[e.second] = 1;
    }
  }
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const bool geo = on_geometric_boundary(mesh.meta, mesh.vertices[i], boundary_tol);
    if ((geo || on_boundary_edge[i]) && !mesh.dirichlet[i]) ++v.unflagged_boundary;
    if (mesh.dirichlet[i] && !geo && !on_boundary_edge[i]) ++v.flagged_interior;
  }
  return v;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  char buf[96];
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %d\n", mesh.vertices[i].x, mesh.vertices[i].y,
                  static_cast<int>(mesh.dirichlet[i]));
    os << buf;
  }
  for (const auto& t : mesh.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace elstab
