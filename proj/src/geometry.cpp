#include "elstab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "elstab/errors.hpp"

namespace elstab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + ab * t));
}

}  // namespace

// ---------------------------------------------------------------------------
// SectorDomain

SectorDomain::SectorDomain(double beta, double r_inner, double r_outer)
    : beta_(beta), r_inner_(r_inner), r_outer_(r_outer) {
  if (!(beta > 0.0 && beta < kTwoPi)) throw DomainError("sector angle must lie in (0, 2pi)");
  if (!(r_inner >= 0.0 && r_outer > r_inner)) throw DomainError("sector radii must satisfy 0 <= r_inner < r_outer");
}

bool SectorDomain::contains(Vec2 p) const {
  const double r = norm(p);
  if (!(r > r_inner_ && r < r_outer_)) return false;
  const double t = polar_angle(p);
  return t > 0.0 && t < beta_;
}

double SectorDomain::boundary_distance(Vec2 p) const {
  const double r = norm(p);
  double d = r_outer_ - r;
  if (r_inner_ > 0.0) d = std::min(d, r - r_inner_);
  const Vec2 e0{1.0, 0.0};
  const Vec2 e1 = from_polar(1.0, beta_);
  d = std::min(d, segment_distance(p, e0 * r_inner_, e0 * r_outer_));
  d = std::min(d, segment_distance(p, e1 * r_inner_, e1 * r_outer_));
  return std::max(d, 0.0);
}

// ---------------------------------------------------------------------------
// PiecewiseLinear

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() < 2 || xs_.size() != ys_.size()) throw DomainError("piecewise-linear function needs >= 2 matching nodes");
  for (std::size_t i = 1; i < xs_.size(); ++i)
    if (!(xs_[i] > xs_[i - 1])) throw DomainError("piecewise-linear grid must be strictly increasing");
}

std::size_t PiecewiseLinear::piece(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = (it == xs_.begin()) ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
  return std::min(i, xs_.size() - 2);
}

double PiecewiseLinear::operator()(double x) const {
  const std::size_t i = piece(x);
  const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return ys_[i] + t * (ys_[i + 1] - ys_[i]);
}

double PiecewiseLinear::slope(double x) const {
  const std::size_t i = piece(x);
  return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
}

double PiecewiseLinear::lipschitz() const {
  double l = 0.0;
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
    l = std::max(l, std::abs((ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i])));
  return l;
}

double PiecewiseLinear::min_value() const { return *std::min_element(ys_.begin(), ys_.end()); }
double PiecewiseLinear::max_value() const { return *std::max_element(ys_.begin(), ys_.end()); }

// ---------------------------------------------------------------------------
// GraphDomain

GraphDomain::GraphDomain(PiecewiseLinear height, double floor, double ceiling, double lip_bound)
    : height_(std::move(height)), floor_(floor), ceiling_(ceiling), lip_bound_(lip_bound) {
  if (!(ceiling > floor)) throw DomainError("graph domain needs ceiling > floor");
  if (!(lip_bound > 0.0)) throw DomainError("graph domain needs a positive Lipschitz bound");
  if (height_.min_value() < margin() || height_.max_value() > ceiling_)
    throw DomainError("height must stay within [floor + (ceiling - floor)/10, ceiling]");
  if (height_.lipschitz() > lip_bound_) throw DomainError("height Lipschitz constant exceeds the bound M");
}

bool GraphDomain::contains(Vec2 p) const {
  if (!(p.x > w_lo() && p.x < w_hi())) return false;
  return p.y > floor_ && p.y < height_(p.x);
}

double GraphDomain::area() const {
  const auto& xs = height_.xs();
  const auto& ys = height_.ys();
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) a += 0.5 * (ys[i] + ys[i + 1] - 2.0 * floor_) * (xs[i + 1] - xs[i]);
  return a;
}

bool GraphDomain::same_cylinder(const GraphDomain& other) const {
  return w_lo() == other.w_lo() && w_hi() == other.w_hi() && floor_ == other.floor_ && ceiling_ == other.ceiling_;
}

// ---------------------------------------------------------------------------
// Maps

BiLipschitzMap identity_map() {
  BiLipschitzMap m;
  m.forward = [](Vec2 p) { return p; };
  m.inverse = [](Vec2 p) { return p; };
  m.jacobian = [](Vec2) { return Mat2::identity(); };
  m.radial = true;
  m.name = "identity";
  return m;
}

BiLipschitzMap affine_map(const Mat2& linear, Vec2 shift, double domain_area) {
  if (std::abs(linear.det()) < 1e-14) throw DomainError("affine map must be invertible");
  const Mat2 inv = linear.inverse();
  BiLipschitzMap m;
  m.forward = [linear, shift](Vec2 p) { return linear * p + shift; };
  m.inverse = [inv, shift](Vec2 q) { return inv * (q - shift); };
  m.jacobian = [linear](Vec2) { return linear; };
  m.forward_lip = spectral_norm(linear);
  m.inverse_lip = spectral_norm(inv);
  const bool is_identity = (linear - Mat2::identity()).max_abs() == 0.0 && shift == Vec2{};
  // An affine map other than the identity fixes at most a line.
  m.e_set_measure = is_identity ? 0.0 : domain_area;
  m.name = "affine";
  return m;
}

double radial_shift(double eps, double r) { return r < 2.0 * eps ? 0.5 * r + eps : r; }

double radial_shift_derivative(double eps, double r) { return r < 2.0 * eps ? 0.5 : 1.0; }

BiLipschitzMap radial_shift_map(double eps, double beta) {
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("radial shift parameter must lie in (0, 1/2)");
  if (!(beta > 0.0 && beta < kTwoPi)) throw DomainError("sector angle must lie in (0, 2pi)");
  BiLipschitzMap m;
  m.forward = [eps](Vec2 p) {
    const double r = norm(p);
    if (r == 0.0) throw EvaluationError("radial shift undefined at the vertex", p);
    if (r >= 2.0 * eps) return p;
    return p * (radial_shift(eps, r) / r);
  };
  m.inverse = [eps](Vec2 q) {
    const double rho = norm(q);
    if (rho >= 2.0 * eps) return q;
    if (!(rho > eps)) throw EvaluationError("point lies outside the image of the radial shift", q);
    return q * (2.0 * (rho - eps) / rho);
  };
  m.jacobian = [eps](Vec2 p) {
    const double r = norm(p);
    if (r >= 2.0 * eps) return Mat2::identity();
    if (r == 0.0) throw EvaluationError("radial shift Jacobian undefined at the vertex", p);
    const Vec2 e = p * (1.0 / r);
    const Mat2 radial = outer(e, e);
    const Mat2 angular = Mat2::identity() - radial;
    return radial * radial_shift_derivative(eps, r) + angular * (radial_shift(eps, r) / r);
  };
  // The angular stretch s(r)/r = 1/2 + eps/r is unbounded as r -> 0, so ‖Dφ‖_∞ does not
  // exist; the inverse has radial factor 2 and angular factor r/s(r) <= 1.
  m.forward_lip = std::numeric_limits<double>::infinity();
  m.inverse_lip = 2.0;
  m.e_set_measure = 2.0 * beta * eps * eps;
  m.kink_radii = {2.0 * eps};
  m.radial = true;
  m.name = "radial_shift";
  return m;
}

std::vector<double> merged_breakpoints(const PiecewiseLinear& h, const PiecewiseLinear& h_tilde) {
  std::vector<double> xs = h.xs();
  xs.insert(xs.end(), h_tilde.xs().begin(), h_tilde.xs().end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    out.push_back(xs[i]);
    const double d0 = h(xs[i]) - h_tilde(xs[i]);
    const double d1 = h(xs[i + 1]) - h_tilde(xs[i + 1]);
    if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) out.push_back(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
  }
  out.push_back(xs.back());
  return out;
}

double symmetric_difference_measure(const GraphDomain& omega, const GraphDomain& omega_tilde) {
  if (!omega.same_cylinder(omega_tilde)) throw DomainError("domains must share the same cylinder");
  const auto xs = merged_breakpoints(omega.height(), omega_tilde.height());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    // |h - h̃| is linear on each piece once sign changes are split off.
    const double d0 = std::abs(omega.height()(xs[i]) - omega_tilde.height()(xs[i]));
    const double d1 = std::abs(omega.height()(xs[i + 1]) - omega_tilde.height()(xs[i + 1]));
    total += 0.5 * (d0 + d1) * (xs[i + 1] - xs[i]);
  }
  return total;
}

namespace {

// Geometry shared by the forward and inverse graph maps: the fixed line ℓ(x) and
// the two heights, evaluated pointwise.
struct GraphStretch {
  PiecewiseLinear h;
  PiecewiseLinear ht;
  double margin;
  std::optional<double> band;

  double diff(double x) const { return h(x) - ht(x); }

  double lower(double x) const {
    if (!band) return margin;
    const double d = diff(x);
    return std::max(margin, std::min(h(x), ht(x)) - *band * std::abs(d));
  }

  double lower_slope(double x) const {
    if (!band) return 0.0;
    const double d = diff(x);
    const double cand = std::min(h(x), ht(x)) - *band * std::abs(d);
    if (cand <= margin) return 0.0;
    const double dmin = d < 0.0 ? h.slope(x) : ht.slope(x);
    const double dd = h.slope(x) - ht.slope(x);
    return dmin - *band * (d < 0.0 ? -dd : dd);
  }

  // Jacobian of y ↦ ℓ + (y - ℓ)·ρ(x), ρ = (h̃ - ℓ)/(h - ℓ), written for the map from the
  // subgraph of `from` to the subgraph of `to`.
  static Mat2 jacobian(double x, double y, const PiecewiseLinear& from, const PiecewiseLinear& to, double l,
                       double dl) {
    const double den = from(x) - l;
    const double num = to(x) - l;
    const double rho = num / den;
    const double drho = ((to.slope(x) - dl) * den - num * (from.slope(x) - dl)) / (den * den);
    return {1.0, 0.0, dl * (1.0 - rho) + (y - l) * drho, rho};
  }
};

}  // namespace

BiLipschitzMap build_graph_map(const GraphDomain& omega, const GraphDomain& omega_tilde, const GraphMapOptions& opt) {
  if (!omega.same_cylinder(omega_tilde)) throw DomainError("domains must share the same cylinder");
  const double m = omega.margin();
  if (omega.height().min_value() <= m || omega_tilde.height().min_value() <= m)
    throw DomainError("heights must stay strictly above the margin line");
  if (opt.band_factor && !(*opt.band_factor > 0.0)) throw DomainError("band factor must be positive");

  const GraphStretch g{omega.height(), omega_tilde.height(), m, opt.band_factor};
  const double w_lo = omega.w_lo();
  const double w_hi = omega.w_hi();

  BiLipschitzMap map;
  map.name = "graph_stretch";
  map.forward = [g, w_lo, w_hi](Vec2 p) {
    if (p.x < w_lo || p.x > w_hi) return p;
    const double l = g.lower(p.x);
    if (p.y <= l || g.diff(p.x) == 0.0) return p;
    const double rho = (g.ht(p.x) - l) / (g.h(p.x) - l);
    return Vec2{p.x, l + (p.y - l) * rho};
  };
  map.inverse = [g, w_lo, w_hi](Vec2 q) {
    if (q.x < w_lo || q.x > w_hi) return q;
    const double l = g.lower(q.x);
    if (q.y <= l || g.diff(q.x) == 0.0) return q;
    const double rho = (g.h(q.x) - l) / (g.ht(q.x) - l);
    return Vec2{q.x, l + (q.y - l) * rho};
  };
  map.jacobian = [g, w_lo, w_hi](Vec2 p) {
    if (p.x < w_lo || p.x > w_hi) return Mat2::identity();
    const double l = g.lower(p.x);
    if (p.y <= l || g.diff(p.x) == 0.0) return Mat2::identity();
    return GraphStretch::jacobian(p.x, p.y, g.h, g.ht, l, g.lower_slope(p.x));
  };

  // Final breakpoints: merged grids, sign changes of h - h̃ and, in band mode, the points where
  // the band's lower edge meets the margin line. Everything is linear between them.
  std::vector<double> xs = merged_breakpoints(g.h, g.ht);
  if (g.band) {
    std::vector<double> refined;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      refined.push_back(xs[i]);
      const double xm = 0.5 * (xs[i] + xs[i + 1]);
      const double sign = g.diff(xm) < 0.0 ? -1.0 : 1.0;
      auto cand = [&](double x) { return std::min(g.h(x), g.ht(x)) - *g.band * sign * g.diff(x) - m; };
      const double c0 = cand(xs[i]);
      const double c1 = cand(xs[i + 1]);
      if ((c0 < 0.0 && c1 > 0.0) || (c0 > 0.0 && c1 < 0.0)) refined.push_back(xs[i] + (xs[i + 1] - xs[i]) * c0 / (c0 - c1));
    }
    refined.push_back(xs.back());
    xs = std::move(refined);
  }

  double e_measure = 0.0;
  double fwd = 1.0;
  double inv = 1.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x0 = xs[i];
    const double x1 = xs[i + 1];
    if (g.diff(x0) == 0.0 && g.diff(x1) == 0.0) continue;
    e_measure += 0.5 * ((g.h(x0) - g.lower(x0)) + (g.h(x1) - g.lower(x1))) * (x1 - x0);
    // Dφ is affine in y, so its norm peaks at y = ℓ or y = h; sample x inside the piece.
    for (int k = 0; k < opt.samples_per_piece; ++k) {
      const double x = x0 + (x1 - x0) * (k + 0.5) / opt.samples_per_piece;
      if (g.diff(x) == 0.0) continue;
      const double l = g.lower(x);
      const double dl = g.lower_slope(x);
      for (const double y : {l, g.h(x)}) {
        const Mat2 j = GraphStretch::jacobian(x, y, g.h, g.ht, l, dl);
        fwd = std::max(fwd, spectral_norm(j));
        inv = std::max(inv, spectral_norm(j.inverse()));
      }
    }
  }
  map.forward_lip = fwd;
  map.inverse_lip = inv;
  map.e_set_measure = e_measure;
  const double sd = symmetric_difference_measure(omega, omega_tilde);
  if (g.band)
    map.measure_constant = *g.band + 1.0;
  else
    map.measure_constant = sd > 0.0 ? e_measure / sd : 0.0;
  return map;
}

}  // namespace elstab
