#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "elstab/analytic.hpp"
#include "elstab/errors.hpp"
#include "elstab/fem.hpp"
#include "elstab/quadrature.hpp"

using namespace elstab;

namespace {
constexpr double kBeta = 1.5 * std::numbers::pi;

std::shared_ptr<const TriMesh> share(TriMesh m) { return std::make_shared<const TriMesh>(std::move(m)); }

AssemblyInput poisson(const CoefficientField& field, ScalarFn f) {
  AssemblyInput in;
  in.field = &field;
  in.source = std::move(f);
  return in;
}

// Manufactured u = x(1−x)·y·(h(x) − y) with h = a + b x, zero on the whole boundary.
struct Manufactured {
  double a, b;
  double h(double x) const { return a + b * x; }
  Vec2 grad(Vec2 p) const {
    const double g = p.x * (1 - p.x), dg = 1 - 2 * p.x;
    const double q = p.y * h(p.x) - p.y * p.y;
    return {dg * q + g * p.y * b, g * (h(p.x) - 2 * p.y)};
  }
  double source(Vec2 p) const {
    const double g = p.x * (1 - p.x);
    return 2 * (p.y * h(p.x) - p.y * p.y) - 2 * b * (1 - 2 * p.x) * p.y + 2 * g;
  }
};

double energy_error(const FemSolution& sol, const Manufactured& u) {
  const TriMesh& m = sol.mesh();
  double e2 = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const Vec2 g = sol.triangle_gradient(t);
    const double area = m.signed_area(t);
    for (const auto& n : quad::triangle_degree4()) {
      const Vec2 p = m.vertices[tri[0]] * n.l0 + m.vertices[tri[1]] * n.l1 + m.vertices[tri[2]] * n.l2;
      const Vec2 d = g - u.grad(p);
      e2 += n.w * area * dot(d, d);
    }
  }
  return std::sqrt(e2);
}
}  // namespace

TEST_CASE("element stiffness on the reference triangle") {
  const std::array<Vec2, 3> tri{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}};
  const auto k = element_stiffness(tri, [](Vec2) { return Mat2::identity(); });
  const double expect[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(k[i][j] == doctest::Approx(expect[i][j]).epsilon(1e-15));
  const auto k2 = element_stiffness(tri, [](Vec2) { return Mat2::identity() * 2.0; });
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(k2[i][j] == doctest::Approx(2 * expect[i][j]).epsilon(1e-15));
  // rows sum to zero for any coefficient
  const auto k3 = element_stiffness({Vec2{0.1, 0.2}, Vec2{0.9, 0.3}, Vec2{0.4, 1.1}},
                                    [](Vec2 p) { return Mat2{1 + p.x, 0.2, 0.2, 2 + p.y}; });
  for (int i = 0; i < 3; ++i) CHECK(std::abs(k3[i][0] + k3[i][1] + k3[i][2]) < 1e-14);
}

TEST_CASE("conjugate gradients on a small system") {
  TriMesh m{.vertices = {{0, 0}, {1, 0}, {0, 1}}, .triangles = {{0, 1, 2}}, .dirichlet = {0, 0, 0},
            .meta = {.domain = SectorDomain(std::numbers::pi / 2), .grading = 1.0, .refinement_level = 0,
                     .aligned_radii = {}, .min_angle_deg = 0.0}};
  SparseSystem sys;
  sys.mesh = share(m);
  sys.matrix.rows = 3;
  sys.matrix.row_ptr = {0, 2, 5, 7};
  sys.matrix.col = {0, 1, 0, 1, 2, 1, 2};
  sys.matrix.val = {2, -1, -1, 2, -1, -1, 2};
  sys.free_index = {0, 1, 2};
  sys.unknown_vertex = {0, 1, 2};
  sys.rhs = {1, 1, 1};
  const FemSolution sol = solve_cg(sys, 1e-14);
  CHECK(sol.nodal_values()[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sol.nodal_values()[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sol.nodal_values()[2] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sol.report().iterations > 0);

  sys.rhs = {0, 0, 0};
  const FemSolution zero = solve_cg(sys);
  CHECK(zero.report().iterations == 0);
  CHECK(std::all_of(zero.nodal_values().begin(), zero.nodal_values().end(), [](double v) { return v == 0.0; }));

  sys.rhs = {1, 1, 1};
  CHECK_THROWS_AS(solve_cg(sys, 1e-14, 1), ConvergenceFailure);
}

TEST_CASE("assembled sector system") {
  const auto mesh = share(mesh_sector(SectorDomain(kBeta), 12, 18, 3.0, {0.2}));
  const CoefficientField field = radial_jump_field(2.0, 0.2);
  const SourceTerm src = sharpness_source(kBeta);
  const SparseSystem sys = assemble(mesh, poisson(field, [src](Vec2 p) { return src(p); }));
  CHECK(sys.matrix.asymmetry() < 1e-14);
  for (const double d : sys.matrix.diagonal()) CHECK(d > 0.0);
  CHECK(sys.unknown_vertex.size() ==
        static_cast<std::size_t>(std::count(mesh->dirichlet.begin(), mesh->dirichlet.end(), 0)));

  const FemSolution sol = solve_cg(sys, 1e-10);
  CHECK(relative_residual(sys, sol) <= 1e-10);
  // boundary values vanish and the discrete solution is nonnegative for a nonnegative source
  for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
    if (mesh->dirichlet[v]) CHECK(sol.nodal_values()[v] == 0.0);
    CHECK(sol.nodal_values()[v] >= -1e-14);
  }
  // deterministic assembly
  const SparseSystem again = assemble(mesh, poisson(field, [src](Vec2 p) { return src(p); }));
  CHECK(again.matrix.val == sys.matrix.val);
  CHECK(again.rhs == sys.rhs);
  std::ostringstream a, b;
  write_solution(a, sol);
  write_solution(b, solve_cg(again, 1e-10));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("sol 0 0\n", 0) == 0);
}

TEST_CASE("assembly failures name the element") {
  const auto mesh = share(mesh_sector(SectorDomain(kBeta), 3, 4));
  const CoefficientField bad(
      [](Vec2 p) -> Mat2 {
        if (norm(p) > 0.5) throw EvaluationError("coefficient undefined", p);
        return Mat2::identity();
      },
      {1.0, 1.0}, FieldKind::custom);
  CHECK_THROWS_AS(assemble(mesh, poisson(bad, [](Vec2) { return 1.0; })), AssemblyError);
  CHECK_THROWS_AS(assemble(mesh, AssemblyInput{}), DomainError);
}

TEST_CASE("gradients and point location") {
  const auto mesh = share(mesh_sector(SectorDomain(kBeta), 6, 9, 2.0));
  const FemSolution lin = interpolate(mesh, [](Vec2 p) { return p.x + 2 * p.y; });
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    CHECK(lin.triangle_gradient(t).x == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(lin.triangle_gradient(t).y == doctest::Approx(2.0).epsilon(1e-10));
  }
  const Vec2 g = evaluate_gradient(lin, from_polar(0.4, 2.0));
  CHECK(g.x == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(evaluate_gradient(lin, {0.3, -0.3}) == Vec2{0, 0});  // missing quadrant
  CHECK(evaluate_gradient(lin, {2.0, 0.0}) == Vec2{0, 0});

  // every sampled point is found, with and without a hint, in a triangle that contains it
  int hint = 0;
  for (std::size_t i = 1; i <= 2000; ++i) {
    const Vec2 u = quad::halton2(i);
    const Vec2 p{2 * u.x - 1, 2 * u.y - 1};
    const int t1 = lin.locator().locate(p);
    const int t2 = lin.locator().locate(p, &hint);
    CHECK(t1 == t2);
    if (t1 >= 0) {
      const auto bc = lin.locator().barycentric(t1, p);
      for (double l : bc) CHECK(l >= -1e-12);
    }
  }
  // shared edge: the lower triangle index wins
  const auto& t0 = mesh->triangles[mesh->num_triangles() / 2];
  const Vec2 mid = (mesh->vertices[t0[0]] + mesh->vertices[t0[1]]) * 0.5;
  const int found = lin.locator().locate(mid);
  for (std::size_t t = 0; t < static_cast<std::size_t>(found); ++t) {
    const auto bc = lin.locator().barycentric(static_cast<int>(t), mid);
    CHECK_FALSE(std::all_of(bc.begin(), bc.end(), [](double l) { return l >= -1e-14; }));
  }

  // interpolated limit solution: gradient error at a fixed point is O(h·|D²u|) away from the corner
  const SeparableSolution u0 = limit_solution(kBeta);
  const Vec2 p = from_polar(0.5, kBeta / 3);
  TriMesh m = mesh_sector(SectorDomain(kBeta), 32, 48, 3.0);
  for (int l = 0; l < 3; ++l) {
    const FemSolution iu = interpolate(share(m), [&](Vec2 x) { return u0.value(x); });
    CHECK(norm(evaluate_gradient(iu, p) - u0.gradient(p)) < 0.05);
    m = refine_uniform(m);
  }
}

TEST_CASE("energy-norm error decreases under nested refinement on a graph domain") {
  const Manufactured u{0.7, 0.2};
  const GraphDomain g(PiecewiseLinear({0.0, 1.0}, {u.h(0.0), u.h(1.0)}), 0.0, 1.0, 1.0);
  const CoefficientField one = constant_field(Mat2::identity());
  TriMesh mesh = mesh_graph_domain(g, 3, 3);
  double prev = 1e300;
  for (int level = 0; level < 5; ++level) {
    const auto shared = share(mesh);
    const SparseSystem sys = assemble(shared, poisson(one, [&](Vec2 p) { return u.source(p); }));
    const FemSolution sol = solve_cg(sys, 1e-12);
    CHECK(relative_residual(sys, sol) <= 1e-10);
    const double e = energy_error(sol, u);
    CHECK(e < prev);
    prev = e;
    mesh = refine_uniform(mesh);
  }
}

TEST_CASE("pulled-back discrete problem matches the direct one") {
  const CoefficientField big_a = constant_field(Mat2{1.5, 0.2, 0.2, 1.0});
  auto f = [](Vec2 y) { return 1.0 + y.x * y.x; };

  SUBCASE("affine map: meshes correspond exactly") {
    const Mat2 l{1.2, 0.4, -0.3, 0.9};
    const Vec2 t{0.5, 0.1};
    const SectorDomain s(kBeta);
    const BiLipschitzMap map = affine_map(l, t, s.area());
    const TriMesh base = mesh_sector(s, 8, 12, 2.0);
    TriMesh image = base;
    for (auto& v : image.vertices) v = map.forward(v);

    const auto direct_mesh = share(image);
    const FemSolution direct = solve_cg(assemble(direct_mesh, poisson(big_a, f)), 1e-13);

    const CoefficientField a = pullback_field(big_a, map);
    AssemblyInput in;
    in.field = &a;
    in.weight = [&](Vec2 x) { return map.density(x); };
    in.source = [&](Vec2 x) { return f(map.forward(x)); };
    in.source_weight = in.weight;
    const FemSolution pulled = solve_cg(assemble(share(base), in), 1e-13);

    const double e_direct = energy(direct, big_a);
    const double e_pulled = energy(pulled, a, in.weight);
    CHECK(std::abs(e_direct - e_pulled) <= 1e-10 * e_direct);
    for (std::size_t v = 0; v < base.num_vertices(); ++v)
      CHECK(direct.nodal_values()[v] == doctest::Approx(pulled.nodal_values()[v]).epsilon(1e-9));
  }

  SUBCASE("radial shift: agreement within the discretization band") {
    const double eps = 0.1;
    const BiLipschitzMap map = radial_shift_map(eps, kBeta);
    const SectorDomain annulus(kBeta, eps, 1.0);
    const std::vector<double> rho = graded_radii(annulus, 24, 1.0, {2 * eps});
    std::vector<double> radii{0.0};
    for (std::size_t i = 1; i < rho.size(); ++i) radii.push_back(rho[i] < 2 * eps ? 2 * (rho[i] - eps) : rho[i]);

    const FemSolution direct = solve_cg(assemble(share(mesh_sector_radii(annulus, rho, 36)), poisson(big_a, f)));
    const CoefficientField a = pullback_field(big_a, map);
    AssemblyInput in;
    in.field = &a;
    in.weight = [&](Vec2 x) { return map.density(x); };
    in.source = [&](Vec2 x) { return f(map.forward(x)); };
    in.source_weight = in.weight;
    const FemSolution pulled = solve_cg(assemble(share(mesh_sector_radii(SectorDomain(kBeta), radii, 36)), in));
    const double e_direct = energy(direct, big_a);
    const double e_pulled = energy(pulled, a, in.weight);
    CHECK(std::abs(e_direct - e_pulled) <= 0.02 * e_direct);
  }
}
