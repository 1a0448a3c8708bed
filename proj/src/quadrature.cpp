#include "elstab/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace elstab::quad {

std::span<const Node1D> gauss_legendre16() {
  static const std::vector<Node1D> rule = [] {
    using Rule = boost::math::quadrature::gauss<double, 16>;
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    std::vector<Node1D> nodes;
    // Boost stores the nonnegative half; 16 is even so there is no zero node.
    for (std::size_t i = 0; i < xs.size(); ++i) {
      nodes.push_back({-xs[i], ws[i]});
      nodes.push_back({xs[i], ws[i]});
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node1D& a, const Node1D& b) { return a.x < b.x; });
    return nodes;
  }();
  return rule;
}

const std::array<TriNode, 6>& triangle_degree4() {
  static constexpr double a1 = 0.44594849091596488632;
  static constexpr double w1 = 0.22338158967801146570;
  static constexpr double a2 = 0.09157621350977074346;
  static constexpr double w2 = 0.10995174365532186764;
  static const std::array<TriNode, 6> rule{{
      {1.0 - 2.0 * a1, a1, a1, w1},
      {a1, 1.0 - 2.0 * a1, a1, w1},
      {a1, a1, 1.0 - 2.0 * a1, w1},
      {1.0 - 2.0 * a2, a2, a2, w2},
      {a2, 1.0 - 2.0 * a2, a2, w2},
      {a2, a2, 1.0 - 2.0 * a2, w2},
  }};
  return rule;
}

std::vector<Interval> radial_pieces(std::span<const double> breaks, const RadialOptions& opt) {
  std::vector<Interval> pieces;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i];
    const double hi = breaks[i + 1];
    if (!(hi > lo)) continue;
    if (lo <= 0.0) {
      // Innermost pieces come last so callers can read them off the tail.
      std::vector<Interval> geo;
      double top = hi;
      while (top > opt.r_floor) {
        const double bottom = std::max(top * opt.ratio, opt.r_floor);
        geo.push_back({bottom, top});
        top = bottom;
      }
      std::reverse(geo.begin(), geo.end());
      pieces.insert(pieces.end(), geo.begin(), geo.end());
    } else if (hi / lo > opt.max_span) {
      const int n = static_cast<int>(std::ceil(std::log(hi / lo) / std::log(opt.max_span)));
      const double q = std::pow(hi / lo, 1.0 / n);
      double a = lo;
      for (int k = 0; k < n; ++k) {
        const double b = (k + 1 == n) ? hi : a * q;
        pieces.push_back({a, b});
        a = b;
      }
    } else {
      pieces.push_back({lo, hi});
    }
  }
  return pieces;
}

namespace {

double gauss_on(const std::function<double(double)>& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double s = 0.0;
  for (const auto& n : gauss_legendre16()) s += n.w * f(mid + half * n.x);
  return s * half;
}

}  // namespace

RadialIntegral integrate_radial(const std::function<double(double)>& f, std::span<const double> breaks,
                                const RadialOptions& opt) {
  RadialIntegral out;
  const auto pieces = radial_pieces(breaks, opt);
  std::vector<double> parts;
  parts.reserve(pieces.size());
  for (const auto& p : pieces) parts.push_back(gauss_on(f, p.lo, p.hi));
  for (const double v : parts) out.value += v;
  if (!breaks.empty() && breaks.front() <= 0.0 && parts.size() >= 2) {
    out.touches_origin = true;
    // The first geometric block was reversed so the innermost piece is at the front.
    out.innermost = parts[0];
    out.next_innermost = parts[1];
  }
  return out;
}

double integrate_polar(const std::function<double(double, double)>& f, std::span<const double> breaks,
                       double beta, int theta_panels, const RadialOptions& opt) {
  const auto pieces = radial_pieces(breaks, opt);
  const auto& gl = gauss_legendre16();
  const double dtheta = beta / theta_panels;
  double total = 0.0;
  for (const auto& p : pieces) {
    const double rm = 0.5 * (p.lo + p.hi);
    const double rh = 0.5 * (p.hi - p.lo);
    double piece = 0.0;
    for (const auto& nr : gl) {
      const double r = rm + rh * nr.x;
      double ang = 0.0;
      for (int k = 0; k < theta_panels; ++k) {
        const double tm = (k + 0.5) * dtheta;
        for (const auto& nt : gl) ang += nt.w * f(r, tm + 0.5 * dtheta * nt.x);
      }
      piece += nr.w * ang * 0.5 * dtheta * r;
    }
    total += piece * rh;
  }
  return total;
}

double radical_inverse(std::size_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

Vec2 halton2(std::size_t index) { return {radical_inverse(index, 2), radical_inverse(index, 3)}; }

}  // namespace elstab::quad
