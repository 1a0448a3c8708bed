#include "elstab/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "elstab/errors.hpp"

namespace elstab {

CoefficientField::CoefficientField(std::function<Mat2(Vec2)> eval, EllipticityBounds bounds, FieldKind kind,
                                   std::vector<double> interface_radii)
    : eval_(std::move(eval)), bounds_(bounds), kind_(kind), interface_radii_(std::move(interface_radii)) {
  if (!(bounds_.lower >= 0.0 && bounds_.upper >= bounds_.lower))
    throw DomainError("ellipticity bounds must satisfy 0 <= lower <= upper");
  std::sort(interface_radii_.begin(), interface_radii_.end());
  interface_radii_.erase(std::unique(interface_radii_.begin(), interface_radii_.end()), interface_radii_.end());
}

CoefficientField constant_field(const Mat2& a) {
  if (a.asymmetry() > 1e-14 * std::max(1.0, a.max_abs())) throw DomainError("coefficient matrix must be symmetric");
  const auto eig = sym_eigen(a);
  if (!(eig.values[0] > 0.0)) throw DomainError("coefficient matrix must be positive definite");
  return CoefficientField([a](Vec2) { return a; }, {eig.values[0], eig.values[1]}, FieldKind::constant);
}

CoefficientField scalar_field(std::function<double(Vec2)> a, double lower, double upper,
                              std::vector<double> interface_radii) {
  if (!(lower > 0.0)) throw DomainError("scalar coefficient must be bounded below by a positive constant");
  return CoefficientField([a = std::move(a)](Vec2 p) { return Mat2::identity() * a(p); }, {lower, upper},
                          FieldKind::custom, std::move(interface_radii));
}

CoefficientField radial_jump_field(double alpha, double eps) {
  if (!(alpha > 0.0)) throw DomainError("conductivity alpha must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("jump radius must lie in (0, 1)");
  return CoefficientField(
      [alpha, eps](Vec2 p) { return Mat2::identity() * (norm(p) < eps ? alpha : 1.0); },
      {std::min(alpha, 1.0), std::max(alpha, 1.0)}, FieldKind::radial_jump, {eps});
}

CoefficientField pullback_field(const CoefficientField& field, const BiLipschitzMap& map) {
  auto eval = [field, map](Vec2 x) {
    const Mat2 j = map.jacobian(x);
    const double det = j.det();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) throw EvaluationError("singular Jacobian in pull-back", x);
    const Mat2 ji = j.inverse();
    Mat2 a = ji * field(map.forward(x)) * ji.transposed();
    const double off = 0.5 * (a.b + a.c);
    a.b = off;
    a.c = off;
    return a;
  };
  EllipticityBounds b;
  const double fl = map.forward_lip;
  b.lower = std::isfinite(fl) ? field.bounds().lower / (fl * fl) : 0.0;
  b.upper = field.bounds().upper * map.inverse_lip * map.inverse_lip;

  std::vector<double> radii = map.kink_radii;
  if (map.radial) {
    for (const double rho : field.interface_radii()) {
      try {
        radii.push_back(norm(map.inverse(Vec2{rho, 0.0})));
      } catch (const EvaluationError&) {
        // Interface lies outside the image; nothing to align with.
      }
    }
  }
  return CoefficientField(std::move(eval), b, FieldKind::pulled_back, std::move(radii));
}

Mat2 matrix_positive_part(const Mat2& a) {
  if (a.asymmetry() > 1e-14 * std::max(1.0, a.max_abs())) throw DomainError("positive part needs a symmetric matrix");
  const auto eig = sym_eigen(a);
  if (eig.values[0] >= 0.0) return a;
  Mat2 out{};
  for (int n = 0; n < 2; ++n) {
    if (eig.values[n] > 0.0) out = out + outer(eig.vectors[n], eig.vectors[n]) * eig.values[n];
  }
  const double off = 0.5 * (out.b + out.c);
  out.b = off;
  out.c = off;
  return out;
}

std::vector<Vec2> sample_sector(const SectorDomain& domain, std::size_t count) {
  std::vector<Vec2> pts;
  pts.reserve(count);
  const double ri2 = domain.r_inner() * domain.r_inner();
  const double ro2 = domain.r_outer() * domain.r_outer();
  for (std::size_t i = 1; i <= count; ++i) {
    const Vec2 u = quad::halton2(i);
    const double r = std::sqrt(ri2 + u.x * (ro2 - ri2));
    pts.push_back(from_polar(r, u.y * domain.beta()));
  }
  return pts;
}

namespace {

double entry(const Mat2& m, int k) {
  switch (k) {
    case 0:
      return m.a;
    case 1:
      return 0.5 * (m.b + m.c);
    default:
      return m.d;
  }
}

}  // namespace

double lp_distance(const CoefficientField& a, const CoefficientField& b, double p, const SectorDomain& domain,
                   const LpOptions& opt) {
  if (!(p >= 1.0)) throw DomainError("L^p exponent must be >= 1");
  if (std::isinf(p)) {
    double sup = 0.0;
    for (const Vec2& x : sample_sector(domain, opt.sup_samples)) {
      const Mat2 d = a(x) - b(x);
      for (int k = 0; k < 3; ++k) sup = std::max(sup, std::abs(entry(d, k)));
    }
    return sup;
  }
  std::vector<double> breaks{domain.r_inner(), domain.r_outer()};
  for (const auto* f : {&a, &b})
    for (const double r : f->interface_radii())
      if (r > domain.r_inner() && r < domain.r_outer()) breaks.push_back(r);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double integral = quad::integrate_polar(
        [&](double r, double t) { return std::pow(std::abs(entry(a(from_polar(r, t)) - b(from_polar(r, t)), k)), p); },
        breaks, domain.beta(), opt.theta_panels, opt.radial);
    worst = std::max(worst, std::pow(integral, 1.0 / p));
  }
  return worst;
}

FieldAudit audit_field(const CoefficientField& field, const std::vector<Vec2>& points, double rel_tol) {
  FieldAudit out;
  const auto& bounds = field.bounds();
  for (const Vec2& x : points) {
    const Mat2 m = field(x);
    out.max_asymmetry = std::max(out.max_asymmetry, m.asymmetry());
    const auto eig = sym_eigen(m);
    out.min_eigenvalue = std::min(out.min_eigenvalue, eig.values[0]);
    out.max_eigenvalue = std::max(out.max_eigenvalue, eig.values[1]);
    const double tol = rel_tol * std::max(1.0, std::abs(eig.values[1]));
    if (eig.values[0] < bounds.lower - tol || eig.values[1] > bounds.upper + tol) out.violations.push_back(x);
    ++out.samples;
  }
  return out;
}

}  // namespace elstab
