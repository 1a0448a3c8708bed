#include "elstab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "elstab/errors.hpp"
#include "elstab/quadrature.hpp"

namespace elstab {

// ---------------------------------------------------------------------------
// CsrMatrix

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[static_cast<std::size_t>(col[k])];
    y[i] = s;
  }
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  return (it != last && *it == static_cast<int>(j)) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows);
  for (std::size_t i = 0; i < rows; ++i) d[i] = at(i, i);
  return d;
}

double CsrMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      worst = std::max(worst, std::abs(val[k] - at(static_cast<std::size_t>(col[k]), i)));
  return worst;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

struct P1Geometry {
  double area;
  std::array<Vec2, 3> grad;  // ∇λ_i
};

P1Geometry p1_geometry(const std::array<Vec2, 3>& p) {
  P1Geometry g{};
  g.area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
  const double inv = 1.0 / (2.0 * g.area);
  for (int i = 0; i < 3; ++i) {
    const Vec2& pj = p[(i + 1) % 3];
    const Vec2& pk = p[(i + 2) % 3];
    g.grad[i] = Vec2{pj.y - pk.y, pk.x - pj.x} * inv;
  }
  return g;
}

Vec2 map_point(const std::array<Vec2, 3>& p, const quad::TriNode& q) { return p[0] * q.l0 + p[1] * q.l1 + p[2] * q.l2; }

std::array<Vec2, 3> corners(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  return {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
}

}  // namespace

std::array<std::array<double, 3>, 3> element_stiffness(const std::array<Vec2, 3>& tri,
                                                       const std::function<Mat2(Vec2)>& coeff) {
  const P1Geometry g = p1_geometry(tri);
  Mat2 c_avg{};
  for (const auto& q : quad::triangle_degree4()) c_avg = c_avg + coeff(map_point(tri, q)) * q.w;
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = g.area * dot(g.grad[i], c_avg * g.grad[j]);
  return k;
}

SparseSystem assemble(std::shared_ptr<const TriMesh> mesh_ptr, const AssemblyInput& in) {
  if (!in.field) throw DomainError("assembly needs a coefficient field");
  const TriMesh& mesh = *mesh_ptr;
  SparseSystem sys;
  sys.mesh = mesh_ptr;
  sys.free_index.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.dirichlet[v]) {
      sys.free_index[v] = static_cast<int>(sys.unknown_vertex.size());
      sys.unknown_vertex.push_back(static_cast<int>(v));
    }
  }
  const std::size_t n = sys.unknown_vertex.size();

  // Sparsity pattern from element connectivity.
  std::vector<std::vector<int>> pattern(n);
  for (const auto& t : mesh.triangles)
    for (int a = 0; a < 3; ++a) {
      const int i = sys.free_index[t[a]];
      if (i < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int j = sys.free_index[t[b]];
        if (j >= 0) pattern[i].push_back(j);
      }
    }
  CsrMatrix& K = sys.matrix;
  K.rows = n;
  K.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = pattern[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    K.row_ptr[i + 1] = K.row_ptr[i] + row.size();
  }
  K.col.reserve(K.row_ptr[n]);
  for (const auto& row : pattern) K.col.insert(K.col.end(), row.begin(), row.end());
  K.val.assign(K.col.size(), 0.0);
  sys.rhs.assign(n, 0.0);

  const CoefficientField& field = *in.field;
  auto coeff = [&](Vec2 x) {
    Mat2 a = field(x);
    if (in.weight) a = a * in.weight(x);
    return a;
  };
  auto slot = [&](int i, int j) -> double& {
    const auto first = K.col.begin() + static_cast<std::ptrdiff_t>(K.row_ptr[i]);
    const auto last = K.col.begin() + static_cast<std::ptrdiff_t>(K.row_ptr[i + 1]);
    return K.val[static_cast<std::size_t>(std::lower_bound(first, last, j) - K.col.begin())];
  };

  // Element loop in fixed order: accumulation is deterministic run to run.
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = corners(mesh, t);
    const auto& tri = mesh.triangles[t];
    std::array<std::array<double, 3>, 3> ke{};
    std::array<double, 3> fe{};
    try {
      ke = element_stiffness(p, coeff);
      if (in.source) {
        const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
        for (const auto& q : quad::triangle_degree4()) {
          const Vec2 x = map_point(p, q);
          double f = in.source(x);
          if (in.source_weight) f *= in.source_weight(x);
          fe[0] += q.w * area * f * q.l0;
          fe[1] += q.w * area * f * q.l1;
          fe[2] += q.w * area * f * q.l2;
        }
      }
    } catch (const EvaluationError& e) {
      throw AssemblyError(std::string("element ") + std::to_string(t) + ": " + e.what(), t);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (!std::isfinite(ke[a][b])) throw AssemblyError("element " + std::to_string(t) + ": non-finite stiffness", t);
    for (int a = 0; a < 3; ++a) {
      const int i = sys.free_index[tri[a]];
      if (i < 0) continue;
      sys.rhs[static_cast<std::size_t>(i)] += fe[a];
      for (int b = 0; b < 3; ++b) {
        const int j = sys.free_index[tri[b]];
        if (j >= 0) slot(i, j) += ke[a][b];
      }
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Point location

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  const std::size_t nt = mesh.num_triangles();
  neighbours_.assign(nt, {-1, -1, -1});
  // Half-edge matching by sorting (min, max, triangle, local edge).
  std::vector<std::tuple<int, int, int, int>> half;
  half.reserve(3 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      half.emplace_back(std::min(a, b), std::max(a, b), static_cast<int>(t), k);
    }
  }
  std::sort(half.begin(), half.end());
  for (std::size_t i = 0; i + 1 < half.size(); ++i) {
    const auto& [a0, b0, t0, k0] = half[i];
    const auto& [a1, b1, t1, k1] = half[i + 1];
    if (a0 == a1 && b0 == b1) {
      neighbours_[static_cast<std::size_t>(t0)][static_cast<std::size_t>(k0)] = t1;
      neighbours_[static_cast<std::size_t>(t1)][static_cast<std::size_t>(k1)] = t0;
    }
  }

  double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
  for (const auto& v : mesh.vertices) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-300});
  const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nt))));
  cell_ = span / cells * (1.0 + 1e-12);
  x0_ = xmin;
  y0_ = ymin;
  nx_ = std::max(1, static_cast<int>((xmax - xmin) / cell_) + 1);
  ny_ = std::max(1, static_cast<int>((ymax - ymin) / cell_) + 1);
  buckets_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    for (const int v : tri) {
      bx0 = std::min(bx0, mesh.vertices[v].x);
      bx1 = std::max(bx1, mesh.vertices[v].x);
      by0 = std::min(by0, mesh.vertices[v].y);
      by1 = std::max(by1, mesh.vertices[v].y);
    }
    const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
  }
}

std::array<double, 3> PointLocator::barycentric(int tri, Vec2 p) const {
  const auto& t = mesh_->triangles[static_cast<std::size_t>(tri)];
  const Vec2 a = mesh_->vertices[t[0]];
  const Vec2 b = mesh_->vertices[t[1]];
  const Vec2 c = mesh_->vertices[t[2]];
  const double area2 = cross(b - a, c - a);
  const double l1 = cross(p - a, c - a) / area2;
  const double l2 = cross(b - a, p - a) / area2;
  return {1.0 - l1 - l2, l1, l2};
}

namespace {
constexpr double kInsideTol = 1e-12;
}

int PointLocator::scan(Vec2 p) const {
  const int i = static_cast<int>(std::floor((p.x - x0_) / cell_));
  const int j = static_cast<int>(std::floor((p.y - y0_) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  // Buckets are filled in increasing triangle order, so the first hit has the lowest index.
  for (const int t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    const auto l = barycentric(t, p);
    if (std::min({l[0], l[1], l[2]}) >= -kInsideTol) return t;
  }
  return -1;
}

int PointLocator::locate(Vec2 p, int* hint) const {
  const int nt = static_cast<int>(mesh_->num_triangles());
  int found = -1;
  if (hint && *hint >= 0 && *hint < nt) {
    int cur = *hint;
    const int max_steps = 2 * static_cast<int>(std::sqrt(static_cast<double>(nt))) + 64;
    for (int step = 0; step < max_steps && cur >= 0; ++step) {
      const auto l = barycentric(cur, p);
      const auto k = static_cast<std::size_t>(std::min_element(l.begin(), l.end()) - l.begin());
      if (l[k] >= -kInsideTol) {
        // Points on shared edges go through the ordered scan for the lowest-index rule.
        found = l[k] > kInsideTol ? cur : scan(p);
        break;
      }
      cur = neighbours_[static_cast<std::size_t>(cur)][k];
    }
  }
  if (found < 0) found = scan(p);
  if (hint && found >= 0) *hint = found;
  return found;
}

// ---------------------------------------------------------------------------
// Solutions

FemSolution::FemSolution(std::shared_ptr<const TriMesh> mesh, std::vector<double> nodal_values, SolveReport report)
    : mesh_(std::move(mesh)), values_(std::move(nodal_values)), report_(report) {
  if (values_.size() != mesh_->num_vertices()) throw DomainError("nodal vector size does not match the mesh");
  locator_ = std::make_shared<PointLocator>(*mesh_);
  gradients_.resize(mesh_->num_triangles());
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
    const auto g = p1_geometry(corners(*mesh_, t));
    const auto& tri = mesh_->triangles[t];
    gradients_[t] = g.grad[0] * values_[tri[0]] + g.grad[1] * values_[tri[1]] + g.grad[2] * values_[tri[2]];
  }
}

Vec2 FemSolution::triangle_gradient(std::size_t t) const { return gradients_[t]; }

FemSolution solve_cg(const SparseSystem& system, double rel_tol, int max_iter) {
  const CsrMatrix& K = system.matrix;
  const std::size_t n = K.rows;
  const auto& b = system.rhs;
  std::vector<double> x(n, 0.0);
  auto nrm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double e : v) s += e * e;
    return std::sqrt(s);
  };
  auto expand = [&](const std::vector<double>& u) {
    std::vector<double> nodal(system.mesh->num_vertices(), 0.0);
    for (std::size_t i = 0; i < n; ++i) nodal[static_cast<std::size_t>(system.unknown_vertex[i])] = u[i];
    return nodal;
  };
  const double bnorm = nrm(b);
  if (bnorm == 0.0) return FemSolution(system.mesh, expand(x), {0, 0.0});

  std::vector<double> inv_diag = K.diagonal();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) throw NumericalError("stiffness matrix has a non-positive diagonal entry");
    d = 1.0 / d;
  }
  std::vector<double> r = b, z(n), p(n), q(n);
  std::vector<double> history;
  int it = 0;
  double rel = 1.0;
  while (true) {
    // (Re)start from the true residual.
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
    rel = nrm(r) / bnorm;
    while (rel > rel_tol && it < max_iter) {
      K.multiply(p, q);
      double pq = 0.0;
      for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      double rz_new = 0.0;
      for (std::size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      ++it;
      rel = nrm(r) / bnorm;
      history.push_back(rel);
    }
    K.multiply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    rel = nrm(r) / bnorm;
    if (rel <= rel_tol) break;
    if (it >= max_iter)
      throw ConvergenceFailure("conjugate gradients did not reach the tolerance in " + std::to_string(max_iter) +
                                   " iterations",
                               std::move(history));
  }
  return FemSolution(system.mesh, expand(x), {it, rel});
}

Vec2 evaluate_gradient(const FemSolution& sol, Vec2 point, int* hint) {
  const int t = sol.locator().locate(point, hint);
  return t < 0 ? Vec2{} : sol.triangle_gradient(static_cast<std::size_t>(t));
}

FemSolution interpolate(std::shared_ptr<const TriMesh> mesh, const ScalarFn& fn) {
  std::vector<double> vals(mesh->num_vertices());
  for (std::size_t v = 0; v < vals.size(); ++v) vals[v] = fn(mesh->vertices[v]);
  return FemSolution(std::move(mesh), std::move(vals));
}

double energy(const FemSolution& sol, const CoefficientField& field, const ScalarFn& weight) {
  const TriMesh& mesh = sol.mesh();
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = corners(mesh, t);
    const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
    const Vec2 g = sol.triangle_gradient(t);
    for (const auto& q : quad::triangle_degree4()) {
      const Vec2 x = map_point(p, q);
      const double w = weight ? weight(x) : 1.0;
      total += q.w * area * w * dot(g, field(x) * g);
    }
  }
  return total;
}

double relative_residual(const SparseSystem& system, const FemSolution& sol) {
  const std::size_t n = system.matrix.rows;
  std::vector<double> x(n), kx(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = sol.nodal_values()[static_cast<std::size_t>(system.unknown_vertex[i])];
  system.matrix.multiply(x, kx);
  double rn = 0.0, bn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rn += (kx[i] - system.rhs[i]) * (kx[i] - system.rhs[i]);
    bn += system.rhs[i] * system.rhs[i];
  }
  return bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
}

void write_solution(std::ostream& os, const FemSolution& sol) {
  char buf[64];
  for (std::size_t i = 0; i < sol.nodal_values().size(); ++i) {
    std::snprintf(buf, sizeof buf, "sol %zu %.17g\n", i, sol.nodal_values()[i]);
    os << buf;
  }
}

}  // namespace elstab
