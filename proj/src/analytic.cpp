#include "elstab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "elstab/errors.hpp"

namespace elstab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_reentrant(double beta) {
  if (!(beta > kPi && beta < 2.0 * kPi)) throw DomainError("sector angle must lie in (pi, 2pi)");
}

}  // namespace

SeparableSolution::SeparableSolution(SectorDomain domain, double wavenumber, std::vector<RadialBranch> branches)
    : domain_(domain), k_(wavenumber), branches_(std::move(branches)) {
  if (branches_.empty()) throw DomainError("separable solution needs at least one branch");
  std::sort(branches_.begin(), branches_.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
}

std::vector<double> SeparableSolution::breakpoints() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < branches_.size(); ++i) out.push_back(branches_[i].lo);
  return out;
}

std::vector<double> SeparableSolution::radial_breaks() const {
  std::vector<double> out{domain_.r_inner()};
  for (const double b : breakpoints()) out.push_back(b);
  out.push_back(domain_.r_outer());
  return out;
}

const RadialBranch* SeparableSolution::find(double r) const {
  if (r < domain_.r_inner() || r > domain_.r_outer()) return nullptr;
  for (auto it = branches_.rbegin(); it != branches_.rend(); ++it)
    if (r >= it->lo) return &*it;
  return &branches_.front();
}

double SeparableSolution::profile(double r) const {
  const auto* b = find(r);
  return b ? b->w(r) : 0.0;
}

double SeparableSolution::profile_derivative(double r) const {
  const auto* b = find(r);
  return b ? b->dw(r) : 0.0;
}

double SeparableSolution::left_limit(double r) const {
  for (const auto& b : branches_)
    if (b.hi == r) return b.w(r);
  return profile(r);
}

double SeparableSolution::right_limit(double r) const {
  for (const auto& b : branches_)
    if (b.lo == r) return b.w(r);
  return profile(r);
}

double SeparableSolution::left_derivative(double r) const {
  for (const auto& b : branches_)
    if (b.hi == r) return b.dw(r);
  return profile_derivative(r);
}

double SeparableSolution::right_derivative(double r) const {
  for (const auto& b : branches_)
    if (b.lo == r) return b.dw(r);
  return profile_derivative(r);
}

double SeparableSolution::value(Vec2 p) const {
  const double t = polar_angle(p);
  if (t > domain_.beta()) return 0.0;
  return profile(norm(p)) * std::sin(k_ * t);
}

Vec2 SeparableSolution::gradient(Vec2 p) const {
  const double r = norm(p);
  const double t = polar_angle(p);
  if (r == 0.0 || t > domain_.beta()) return {};
  const auto* b = find(r);
  if (!b) return {};
  const double s = std::sin(k_ * t);
  const double c = std::cos(k_ * t);
  const double ur = b->dw(r) * s;
  const double ut = k_ * b->w(r) / r * c;
  const double ct = std::cos(t);
  const double st = std::sin(t);
  return {ur * ct - ut * st, ur * st + ut * ct};
}

double SourceTerm::operator()(Vec2 p) const {
  const double t = polar_angle(p);
  return amplitude * std::sin(wavenumber * t);
}

SourceTerm sharpness_source(double beta) {
  require_reentrant(beta);
  return {(4.0 * beta * beta - kPi * kPi) / (beta * beta), kPi / beta};
}

double gradient_integrability_threshold(double beta) {
  require_reentrant(beta);
  return 2.0 * beta / (beta - kPi);
}

SeparableSolution limit_solution(double beta) {
  require_reentrant(beta);
  const double k = kPi / beta;
  RadialBranch b{0.0, 1.0, [k](double r) { return std::pow(r, k) - r * r; },
                 [k](double r) { return k * std::pow(r, k - 1.0) - 2.0 * r; }};
  return SeparableSolution(SectorDomain(beta), k, {b});
}

SeparableSolution jump_solution(double beta, double alpha, double eps) {
  require_reentrant(beta);
  if (!(alpha > 0.0)) throw DomainError("conductivity alpha must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("jump radius must lie in (0, 1)");
  const double k = kPi / beta;
  const double ek = std::pow(eps, k);
  const double emk = std::pow(eps, -k);
  const double den = (1.0 - alpha) * ek + (1.0 + alpha) * emk;
  const double c_in = ((1.0 / alpha - 1.0) * (eps * eps + std::pow(eps, 2.0 - 2.0 * k)) + 2.0 * emk) / den;
  const double c_plus = ((1.0 - alpha) * eps * eps + (1.0 + alpha) * emk) / den;
  const double c_minus = (1.0 - alpha) * (ek - eps * eps) / den;

  RadialBranch inner{0.0, eps, [=](double r) { return c_in * std::pow(r, k) - r * r / alpha; },
                     [=](double r) { return c_in * k * std::pow(r, k - 1.0) - 2.0 * r / alpha; }};
  RadialBranch outer{eps, 1.0,
                     [=](double r) { return c_plus * std::pow(r, k) + c_minus * std::pow(r, -k) - r * r; },
                     [=](double r) {
                       return c_plus * k * std::pow(r, k - 1.0) - c_minus * k * std::pow(r, -k - 1.0) - 2.0 * r;
                     }};
  return SeparableSolution(SectorDomain(beta), k, {inner, outer});
}

SeparableSolution annulus_solution(double beta, double eps) {
  require_reentrant(beta);
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("inner radius must lie in (0, 1)");
  const double k = kPi / beta;
  const double ek = std::pow(eps, k);
  const double emk = std::pow(eps, -k);
  const double den = emk - ek;
  const double c_plus = (emk - eps * eps) / den;
  const double c_minus = (eps * eps - ek) / den;
  RadialBranch b{eps, 1.0, [=](double r) { return c_plus * std::pow(r, k) + c_minus * std::pow(r, -k) - r * r; },
                 [=](double r) {
                   return c_plus * k * std::pow(r, k - 1.0) - c_minus * k * std::pow(r, -k - 1.0) - 2.0 * r;
                 }};
  return SeparableSolution(SectorDomain(beta, eps, 1.0), k, {b});
}

SeparableSolution difference(const SeparableSolution& a, const SeparableSolution& b) {
  if (a.wavenumber() != b.wavenumber() || a.domain().r_outer() != b.domain().r_outer())
    throw DomainError("separable difference needs matching wavenumber and outer radius");
  std::vector<double> cuts = a.radial_breaks();
  const auto bb = b.radial_breaks();
  cuts.insert(cuts.end(), bb.begin(), bb.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<RadialBranch> branches;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const double mid = 0.5 * (lo + hi);
    // Bind the branch each operand uses inside (lo, hi) so endpoint evaluation stays one-sided.
    const RadialBranch* ba = nullptr;
    const RadialBranch* bb2 = nullptr;
    for (const auto& br : a.branches())
      if (mid > br.lo && mid < br.hi) ba = &br;
    for (const auto& br : b.branches())
      if (mid > br.lo && mid < br.hi) bb2 = &br;
    auto zero = [](double) { return 0.0; };
    std::function<double(double)> wa = ba ? ba->w : zero;
    std::function<double(double)> da = ba ? ba->dw : zero;
    std::function<double(double)> wb = bb2 ? bb2->w : zero;
    std::function<double(double)> db = bb2 ? bb2->dw : zero;
    branches.push_back({lo, hi, [wa, wb](double r) { return wa(r) - wb(r); },
                        [da, db](double r) { return da(r) - db(r); }});
  }
  const double r_in = std::min(a.domain().r_inner(), b.domain().r_inner());
  return SeparableSolution(SectorDomain(a.domain().beta(), r_in, a.domain().r_outer()), a.wavenumber(),
                           std::move(branches));
}

double h1_seminorm_separable(const SeparableSolution& sol, const quad::RadialOptions& opt) {
  const double k = sol.wavenumber();
  double total = 0.0;
  for (const auto& br : sol.branches()) {
    const double lo = br.lo;
    const double hi = br.hi;
    const std::vector<double> breaks{lo, hi};
    auto integrand = [&](double r) {
      const double w = br.w(r);
      const double dw = br.dw(r);
      return (dw * dw + k * k * w * w / (r * r)) * r;
    };
    const auto res = quad::integrate_radial(integrand, breaks, opt);
    if (res.touches_origin && res.innermost > 1e-14 * std::abs(res.value) &&
        res.innermost >= 0.99 * res.next_innermost)
      throw NumericalError("H1 integrand is not integrable at the vertex");
    total += res.value;
  }
  return std::sqrt(0.5 * sol.domain().beta() * total);
}

ResidualReport residual_check(const SeparableSolution& sol, const SourceTerm& src, const CoefficientField& field,
                              const ResidualOptions& opt) {
  ResidualReport rep;
  const auto& dom = sol.domain();
  std::vector<double> circles = sol.breakpoints();
  for (const double r : field.interface_radii()) circles.push_back(r);
  const double h = opt.step;

  auto u = [&](Vec2 p) { return sol.value(p); };
  auto grad = [&](Vec2 p) {
    return Vec2{(u({p.x + h, p.y}) - u({p.x - h, p.y})) / (2.0 * h), (u({p.x, p.y + h}) - u({p.x, p.y - h})) / (2.0 * h)};
  };
  auto flux = [&](Vec2 p) { return field(p) * grad(p); };

  for (const Vec2& p : sample_sector(dom, opt.samples)) {
    const double r = norm(p);
    bool skip = r < opt.corner_exclusion || dom.boundary_distance(p) < opt.exclusion;
    for (const double c : circles) skip = skip || std::abs(r - c) < opt.exclusion;
    if (skip) {
      ++rep.skipped;
      continue;
    }
    const double div = (flux({p.x + h, p.y}).x - flux({p.x - h, p.y}).x) / (2.0 * h) +
                       (flux({p.x, p.y + h}).y - flux({p.x, p.y - h}).y) / (2.0 * h);
    rep.max_residual = std::max(rep.max_residual, std::abs(-div - src(p)));
    ++rep.evaluated;
  }
  return rep;
}

std::vector<InterfaceDefect> interface_defects(const SeparableSolution& sol, const CoefficientField& field) {
  std::vector<InterfaceDefect> out;
  const double t = 0.5 * sol.domain().beta();
  for (const double r : sol.breakpoints()) {
    const double a_in = field(from_polar(r * (1.0 - 1e-9), t)).a;
    const double a_out = field(from_polar(r, t)).a;
    out.push_back({r, std::abs(sol.left_limit(r) - sol.right_limit(r)),
                   std::abs(a_in * sol.left_derivative(r) - a_out * sol.right_derivative(r))});
  }
  return out;
}

}  // namespace elstab
