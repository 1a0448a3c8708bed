#include "elstab/error_norms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "elstab/errors.hpp"
#include "elstab/quadrature.hpp"

namespace elstab {

namespace {

using Tri = std::array<Vec2, 3>;

template <class F>
double integrate_triangle(const Tri& p, F&& f) {
  const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
  double s = 0.0;
  for (const auto& q : quad::triangle_degree4()) s += q.w * f(p[0] * q.l0 + p[1] * q.l1 + p[2] * q.l2);
  return s * area;
}

// Geometric subdivision toward p[0]: the part of T between the 2^{-l} and 2^{-l-1} scaled copies
// is the union of three of the four red-refinement children.
template <class F>
double integrate_toward_corner(const Tri& p, int levels, F&& f) {
  double total = 0.0;
  Tri cur = p;
  for (int l = 0; l < levels; ++l) {
    const Vec2 m01 = (cur[0] + cur[1]) * 0.5;
    const Vec2 m12 = (cur[1] + cur[2]) * 0.5;
    const Vec2 m20 = (cur[2] + cur[0]) * 0.5;
    total += integrate_triangle({m01, cur[1], m12}, f);
    total += integrate_triangle({m20, m12, cur[2]}, f);
    total += integrate_triangle({m01, m12, m20}, f);
    cur = {cur[0], m01, m20};
  }
  return total + integrate_triangle(cur, f);
}

}  // namespace

double h1_error_vs_analytic(const FemSolution& sol, const SeparableSolution& exact, int corner_levels) {
  const TriMesh& mesh = sol.mesh();
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    Tri p{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    const Vec2 gh = sol.triangle_gradient(t);
    auto f = [&](Vec2 x) {
      const Vec2 d = gh - exact.gradient(x);
      return dot(d, d);
    };
    int corner = -1;
    for (int k = 0; k < 3; ++k)
      if (norm(p[k]) < 1e-14) corner = k;
    if (corner < 0) {
      total += integrate_triangle(p, f);
    } else {
      std::rotate(p.begin(), p.begin() + corner, p.end());
      total += integrate_toward_corner(p, corner_levels, f);
    }
  }
  return std::sqrt(total);
}

double cross_domain_gradient_error(const FemSolution& sol_a, const FemSolution& sol_b, const TriMesh& evaluator) {
  double total = 0.0;
  int hint_a = 0;
  int hint_b = 0;
  for (std::size_t t = 0; t < evaluator.num_triangles(); ++t) {
    const auto& tri = evaluator.triangles[t];
    const Tri p{evaluator.vertices[tri[0]], evaluator.vertices[tri[1]], evaluator.vertices[tri[2]]};
    total += integrate_triangle(p, [&](Vec2 x) {
      const Vec2 d = evaluate_gradient(sol_a, x, &hint_a) - evaluate_gradient(sol_b, x, &hint_b);
      return dot(d, d);
    });
  }
  return std::sqrt(total);
}

double cross_domain_gradient_error(const FemSolution& sol_a, const FemSolution& sol_b, const SectorDomain& region) {
  std::vector<double> radii;
  for (const auto* s : {&sol_a, &sol_b}) {
    const auto& meta = s->mesh().meta;
    radii.insert(radii.end(), meta.aligned_radii.begin(), meta.aligned_radii.end());
    if (const auto* sec = std::get_if<SectorDomain>(&meta.domain)) {
      radii.push_back(sec->r_inner());
      radii.push_back(sec->r_outer());
    }
  }
  std::vector<double> inside;
  for (const double r : radii)
    if (r > region.r_inner() && r < region.r_outer()) inside.push_back(r);
  std::sort(inside.begin(), inside.end());
  inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
  const TriMesh evaluator = mesh_sector(region, 64, 96, 3.0, inside);
  return cross_domain_gradient_error(sol_a, sol_b, evaluator);
}

double lq_gradient_norm(const FemSolution& sol, double q) {
  if (!(q >= 1.0)) throw DomainError("L^q exponent must be >= 1");
  const TriMesh& mesh = sol.mesh();
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    total += std::pow(norm(sol.triangle_gradient(t)), q) * mesh.signed_area(t);
  return std::pow(total, 1.0 / q);
}

LqNormReport lq_gradient_norm(const SeparableSolution& sol, double q, int levels) {
  if (!(q >= 1.0)) throw DomainError("L^q exponent must be >= 1");
  if (levels < 4) throw DomainError("divergence detection needs at least four levels");
  const double k = sol.wavenumber();
  const auto breaks = sol.radial_breaks();
  const double beta = sol.domain().beta();
  auto integrand = [&](double r, double t) {
    const double w = sol.profile(r);
    const double dw = sol.profile_derivative(r);
    const double s = std::sin(k * t);
    const double c = std::cos(k * t);
    const double g2 = dw * dw * s * s + k * k * w * w / (r * r) * c * c;
    return std::pow(g2, 0.5 * q);
  };
  LqNormReport rep;
  for (int l = 1; l <= levels; ++l) {
    quad::RadialOptions opt;
    opt.r_floor = std::pow(10.0, -2.0 * l);
    rep.level_values.push_back(std::pow(quad::integrate_polar(integrand, breaks, beta, 8, opt), 1.0 / q));
  }
  const auto& v = rep.level_values;
  bool growing = true;
  for (std::size_t i = v.size() - 3; i < v.size(); ++i) growing = growing && v[i] > 1.05 * v[i - 1];
  rep.divergent = growing;
  if (!growing) rep.value = v.back();
  return rep;
}

}  // namespace elstab
