#include "elstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "elstab/error_norms.hpp"
#include "elstab/errors.hpp"
#include "elstab/meshing.hpp"
#include "elstab/quadrature.hpp"

namespace elstab {

namespace {

void require_q(double beta, double q) {
  if (!(q > 2.0)) throw DomainError("integrability exponent q must exceed 2");
  const double qstar = gradient_integrability_threshold(beta);
  if (q >= qstar) {
    std::ostringstream msg;
    msg << "q = " << q << " violates the integrability hypothesis: grad u0 lies in L^q only for q < q* = 2*beta/(beta - pi) = "
        << qstar;
    throw HypothesisViolation(msg.str(), qstar);
  }
}

// Sorted by decreasing ε, rejecting duplicates and nonpositive ε.
std::vector<double> checked_grid(std::vector<double> grid) {
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw DomainError("eps grid entries must be positive");
    if (i > 0 && grid[i] == grid[i - 1]) throw DomainError("eps grid entries must be distinct");
  }
  return grid;
}

FitWindow full_window(std::size_t n) { return {0, n == 0 ? 0 : n - 1}; }

std::vector<RateSample> to_samples(const std::vector<StudyRow>& rows) {
  std::vector<RateSample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.eps, r.error, 0.0});
  return out;
}

double lq_or_throw(const SeparableSolution& sol, double q) {
  const LqNormReport rep = lq_gradient_norm(sol, q);
  if (!rep.value) throw NumericalError("gradient L^q norm diverges");
  return *rep.value;
}

FemSolution solve_sector(const std::shared_ptr<const TriMesh>& mesh, const CoefficientField& field,
                         const SourceTerm& src, double rel_tol) {
  AssemblyInput in;
  in.field = &field;
  in.source = [src](Vec2 p) { return src(p); };
  const SparseSystem sys = assemble(mesh, in);
  return solve_cg(sys, rel_tol);
}

// ∫ over r ∈ (floor, 1) of an integrand that may blow up at the vertex.
double polar_with_floor(const std::function<double(double, double)>& f, std::vector<double> breaks, double beta,
                        double floor) {
  quad::RadialOptions opt;
  opt.r_floor = floor;
  return quad::integrate_polar(f, breaks, beta, 8, opt);
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> geometric_grid(double eps_max, double eps_min, int points) {
  if (points < 2) throw DomainError("a geometric grid needs at least two points");
  if (!(eps_max > eps_min) || !(eps_min > 0.0)) throw DomainError("need 0 < eps_min < eps_max");
  std::vector<double> out(static_cast<std::size_t>(points));
  const double lmax = std::log10(eps_max);
  const double lmin = std::log10(eps_min);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    out[static_cast<std::size_t>(i)] = std::pow(10.0, lmax + t * (lmin - lmax));
  }
  out.front() = eps_max;
  out.back() = eps_min;
  return out;
}

std::vector<double> default_eps_grid() { return geometric_grid(1e-1, 1e-4, 7); }

FitWindow default_window(const std::vector<RateSample>& samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw DomainError("a rate fit needs at least 4 samples");
  auto noisy = [&](std::size_t i) { return samples[i].uncertainty > 0.01 * std::abs(samples[i].error); };
  std::size_t last = n - 1;
  while (last > 3 && noisy(last)) --last;
  std::size_t first = std::min<std::size_t>(2, last - 3);
  while (first < last - 3 && noisy(first)) ++first;
  return {first, last};
}

RateFit fit_loglog(std::vector<RateSample> samples, std::optional<FitWindow> window) {
  std::sort(samples.begin(), samples.end(), [](const RateSample& a, const RateSample& b) { return a.eps > b.eps; });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].eps > 0.0) || !(samples[i].error > 0.0))
      throw DomainError("log-log fit needs positive eps and error values");
    if (i > 0 && samples[i].eps == samples[i - 1].eps) throw DomainError("fit samples must have distinct eps");
  }
  const FitWindow w = window ? *window : default_window(samples);
  if (w.last >= samples.size() || w.first > w.last || w.size() < 4)
    throw DomainError("fit window must select at least 4 samples");

  const double n = static_cast<double>(w.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = w.first; i <= w.last; ++i) {
    mx += std::log(samples[i].eps);
    my += std::log(samples[i].error);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = w.first; i <= w.last; ++i) {
    const double dx = std::log(samples[i].eps) - mx;
    const double dy = std::log(samples[i].error) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double ss_res = 0.0;
  for (std::size_t i = w.first; i <= w.last; ++i) {
    const double e = std::log(samples[i].error) - (intercept + fit.exponent * std::log(samples[i].eps));
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.samples = std::move(samples);
  fit.window = w;
  return fit;
}

const char* to_string(Verdict v) { return v == Verdict::bounded ? "bounded" : "violated"; }

BoundCheck evaluate_bound(std::vector<double> lhs, std::vector<double> rhs, FitWindow window, double q, double M) {
  if (lhs.size() != rhs.size() || lhs.empty()) throw DomainError("bound series must be non-empty and paired");
  if (window.last >= lhs.size() || window.first > window.last) throw DomainError("bound window out of range");
  BoundCheck bc;
  bc.q = q;
  bc.M = M;
  bc.window = window;
  bc.ratios.resize(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    bc.ratios[i] = rhs[i] > 0.0 ? lhs[i] / rhs[i] : (lhs[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  bc.ratio_max = *std::max_element(bc.ratios.begin(), bc.ratios.end());

  bool non_increasing = true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = window.first; i <= window.last; ++i) {
    lo = std::min(lo, bc.ratios[i]);
    hi = std::max(hi, bc.ratios[i]);
    if (i > window.first && bc.ratios[i] > bc.ratios[i - 1] * (1.0 + 1e-9)) non_increasing = false;
  }
  const bool stable = std::isfinite(hi) && (hi == 0.0 || (hi - lo) / hi < 0.2);
  bc.verdict = (std::isfinite(hi) && (non_increasing || stable)) ? Verdict::bounded : Verdict::violated;
  bc.lhs = std::move(lhs);
  bc.rhs = std::move(rhs);
  return bc;
}

// ---------------------------------------------------------------------------

CoefficientStudy coefficient_rate_study(double beta, double alpha, const std::vector<double>& eps_grid, double q) {
  require_q(beta, q);
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  const std::vector<double> grid = checked_grid(eps_grid);
  if (grid.size() < 4) throw DomainError("coefficient study needs at least 4 grid points");

  const SeparableSolution u0 = limit_solution(beta);
  const SectorDomain sector(beta);
  const CoefficientField one = constant_field(Mat2::identity());
  const double p = 2.0 * q / (q - 2.0);

  CoefficientStudy st;
  st.gradient_lq_norm = lq_or_throw(u0, q);
  st.lower_bound_constant =
      std::numbers::pi * (1.0 - alpha) * (1.0 - alpha) / (2.0 * beta * (1.0 + alpha) * (1.0 + alpha));

  std::vector<double> lhs, rhs;
  for (double eps : grid) {
    const double err = h1_seminorm_separable(difference(jump_solution(beta, alpha, eps), u0));
    const double coeff_dist = lp_distance(radial_jump_field(alpha, eps), one, p, sector);
    const double bound = coeff_dist * st.gradient_lq_norm;
    st.rows.push_back({eps, err, bound, bound > 0.0 ? err / bound : 0.0});
    st.lower_bound_ratios.push_back(err * err / std::pow(eps, 2.0 * std::numbers::pi / beta));
    lhs.push_back(err);
    rhs.push_back(bound);
  }

  st.degenerate = std::all_of(st.rows.begin(), st.rows.end(), [](const StudyRow& r) { return r.error == 0.0; });
  const auto samples = to_samples(st.rows);
  const FitWindow w = default_window(samples);
  if (!st.degenerate) st.fit = fit_loglog(samples, w);
  const double M = std::max(radial_jump_field(alpha, grid.front()).bounds().constant_M(), st.gradient_lq_norm);
  st.bound = evaluate_bound(std::move(lhs), std::move(rhs), w, q, M);
  return st;
}

// ---------------------------------------------------------------------------

double annulus_error_semi_analytic(double beta, double eps) {
  if (eps == 0.0) return 0.0;
  return h1_seminorm_separable(difference(annulus_solution(beta, eps), limit_solution(beta)));
}

DomainStudy domain_rate_study(double beta, const std::vector<double>& eps_grid, double q,
                              const DomainStudyOptions& opt) {
  require_q(beta, q);
  const std::vector<double> grid = checked_grid(eps_grid);
  if (grid.size() < 4) throw DomainError("domain study needs at least 4 grid points");
  if (grid.front() >= 0.5) throw DomainError("domain study needs eps < 1/2");

  const SeparableSolution u0 = limit_solution(beta);
  double M = lq_or_throw(u0, q);

  DomainStudy st;
  for (double eps : grid) {
    st.semi_analytic_errors.push_back(annulus_error_semi_analytic(beta, eps));
    M = std::max(M, lq_or_throw(annulus_solution(beta, eps), q));
  }

  std::vector<double> errors = st.semi_analytic_errors;
  if (opt.mode == StudyMode::fem) {
    const FemStudyOptions& fo = opt.fem;
    std::vector<double> aligned;
    for (double eps : grid) {
      aligned.push_back(eps);
      aligned.push_back(2.0 * eps);
    }
    const SectorDomain omega0(beta);
    const std::vector<double> radii = graded_radii(omega0, fo.n_radial, fo.grading, aligned);
    const auto mesh0 = std::make_shared<const TriMesh>(mesh_sector_radii(omega0, radii, fo.n_angular, fo.grading, aligned));
    const CoefficientField one = constant_field(Mat2::identity());
    const SourceTerm src = sharpness_source(beta);
    const FemSolution sol0 = solve_sector(mesh0, one, src, fo.rel_tol);
    st.max_unknowns = static_cast<int>(std::count(mesh0->dirichlet.begin(), mesh0->dirichlet.end(), 0));

    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double eps = grid[i];
      const SectorDomain omega_eps(beta, eps, 1.0);
      std::vector<double> sub;
      for (double r : radii)
        if (r >= eps) sub.push_back(r);
      if (sub.front() != eps) throw NumericalError("radial grid is not aligned with eps");
      std::vector<double> sub_aligned;
      for (double a : aligned)
        if (a > eps) sub_aligned.push_back(a);
      const auto mesh_eps =
          std::make_shared<const TriMesh>(mesh_sector_radii(omega_eps, sub, fo.n_angular, fo.grading, sub_aligned));
      const FemSolution sol_eps = solve_sector(mesh_eps, one, src, fo.rel_tol);
      errors[i] = cross_domain_gradient_error(sol_eps, sol0, *mesh0);
      if (std::abs(errors[i] - st.semi_analytic_errors[i]) > 0.1 * st.semi_analytic_errors[i])
        st.under_resolved.push_back(i);
    }
  }

  std::vector<double> lhs, rhs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double eps = grid[i];
    double bound;
    if (opt.rhs_eps_exponent) {
      bound = std::pow(eps, *opt.rhs_eps_exponent);
    } else {
      const double e_measure = radial_shift_map(eps, beta).e_set_measure;
      bound = std::pow(e_measure, (q - 2.0) / (2.0 * q));
    }
    st.rows.push_back({eps, errors[i], bound, errors[i] / bound});
    lhs.push_back(errors[i]);
    rhs.push_back(bound);
  }
  const auto samples = to_samples(st.rows);
  const FitWindow w = default_window(samples);
  st.fit = fit_loglog(samples, w);
  st.bound = evaluate_bound(std::move(lhs), std::move(rhs), w, q, M);
  return st;
}

// ---------------------------------------------------------------------------

double composition_defect(const PointFn& f, const BiLipschitzMap& map, double beta) {
  std::vector<double> breaks{0.0};
  for (double k : map.kink_radii)
    if (k > 0.0 && k < 1.0) breaks.push_back(k);
  breaks.push_back(1.0);
  const double v = quad::integrate_polar(
      [&](double r, double t) {
        const Vec2 x = from_polar(r, t);
        const double d = f(map.forward(x)) - f(x);
        return d * d;
      },
      breaks, beta);
  return std::sqrt(v);
}

CompositionCheck composition_inequality_check(const PointFn& f, double beta, const std::vector<double>& eps_grid,
                                              double q) {
  if (!(q > 2.0)) throw DomainError("q must exceed 2");
  const std::vector<double> grid = checked_grid(eps_grid);
  const double p = 2.0 * q / (q - 2.0);
  const double e_exp = (q - 2.0) / (2.0 * q);

  CompositionCheck out;
  const std::vector<double> unit{0.0, 1.0};
  out.f_lq_norm = std::pow(
      quad::integrate_polar([&](double r, double t) { return std::pow(std::abs(f(from_polar(r, t))), q); }, unit, beta),
      1.0 / q);

  std::vector<double> f_lhs, f_rhs, j_lhs, j_rhs;
  for (double eps : grid) {
    const BiLipschitzMap map = radial_shift_map(eps, beta);
    const double e_pow = std::pow(map.e_set_measure, e_exp);
    out.e_measures.push_back(map.e_set_measure);
    f_lhs.push_back(composition_defect(f, map, beta));
    f_rhs.push_back(out.f_lq_norm * e_pow);

    const std::vector<double> breaks{0.0, 2.0 * eps, 1.0};
    const double inv_dev = quad::integrate_polar(
        [&](double r, double t) {
          const Mat2 j = map.jacobian(from_polar(r, t));
          return std::pow(spectral_norm(j.inverse() - Mat2::identity()), p);
        },
        breaks, beta);
    j_lhs.push_back(std::pow(inv_dev, 1.0 / p));
    j_rhs.push_back(e_pow);

    // Forward deviation on nested vertex cut-offs.
    std::vector<double> levels;
    for (int l = 1; l <= 5; ++l) {
      levels.push_back(polar_with_floor(
          [&](double r, double t) {
            const Mat2 j = map.jacobian(from_polar(r, t));
            return std::pow(spectral_norm(j - Mat2::identity()), p);
          },
          breaks, beta, eps * std::pow(10.0, -2.0 * l)));
    }
    bool growing = true;
    for (std::size_t l = levels.size() - 3; l < levels.size(); ++l)
      if (!(levels[l] > 1.05 * levels[l - 1])) growing = false;
    if (growing) out.forward_jacobian_unbounded = true;
  }
  const FitWindow w = full_window(grid.size());
  out.function_bound = evaluate_bound(std::move(f_lhs), std::move(f_rhs), w, q, out.f_lq_norm);
  out.inverse_jacobian_bound = evaluate_bound(std::move(j_lhs), std::move(j_rhs), w, q, 2.0);
  return out;
}

// ---------------------------------------------------------------------------

ConvergenceTable qualitative_convergence_study(const std::function<CoefficientField(double)>& family,
                                               const CoefficientField& reference, const std::vector<double>& eps_grid,
                                               ConvergenceCondition mode, const QualitativeOptions& opt) {
  const std::vector<double> grid = checked_grid(eps_grid);
  const SectorDomain omega(opt.beta);
  const std::vector<Vec2> pts = sample_sector(omega, opt.condition_samples);

  std::vector<CoefficientField> fields;
  std::vector<double> aligned = reference.interface_radii();
  for (double eps : grid) {
    fields.push_back(family(eps));
    for (double r : fields.back().interface_radii()) aligned.push_back(r);
  }
  std::erase_if(aligned, [](double r) { return !(r > 0.0 && r < 1.0); });
  std::sort(aligned.begin(), aligned.end());
  aligned.erase(std::unique(aligned.begin(), aligned.end()), aligned.end());

  // Condition measure per ε and the sample attaining it.
  std::vector<double> measure(grid.size(), 0.0);
  std::vector<Vec2> worst(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const Vec2& x : pts) {
      const Mat2 a0 = reference(x);
      const Mat2 ae = fields[i](x);
      double m = 0.0;
      if (mode == ConvergenceCondition::condition_3) {
        if (norm(x) <= opt.k_radius) continue;
        m = (ae - a0).max_abs();
      } else {
        m = spectral_norm(matrix_positive_part(a0 - ae));
      }
      if (m > measure[i]) {
        measure[i] = m;
        worst[i] = x;
      }
    }
  }
  const char* cname = mode == ConvergenceCondition::condition_3 ? "(3)" : "(4)";
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (measure[i] > measure[i - 1] * (1.0 + 1e-9) + 1e-14) {
      std::ostringstream msg;
      msg << "condition " << cname << " fails: measure grows to " << measure[i] << " at eps=" << grid[i]
          << ", sample (" << worst[i].x << ", " << worst[i].y << ")";
      throw DomainError(msg.str());
    }
  }
  if (measure.back() > std::max(1e-12, 0.5 * measure.front())) {
    std::ostringstream msg;
    msg << "condition " << cname << " fails: measure " << measure.back() << " does not tend to 0 at eps=" << grid.back()
        << ", sample (" << worst.back().x << ", " << worst.back().y << ")";
    throw DomainError(msg.str());
  }

  const FemStudyOptions& fo = opt.fem;
  const auto mesh = std::make_shared<const TriMesh>(mesh_sector(omega, fo.n_radial, fo.n_angular, fo.grading, aligned));
  const SourceTerm src = sharpness_source(opt.beta);
  const FemSolution sol0 = solve_sector(mesh, reference, src, fo.rel_tol);

  ConvergenceTable table;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FemSolution sol = solve_sector(mesh, fields[i], src, fo.rel_tol);
    double e2 = 0.0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const Vec2 d = sol.triangle_gradient(t) - sol0.triangle_gradient(t);
      e2 += dot(d, d) * mesh->signed_area(t);
    }
    table.rows.push_back({grid[i], std::sqrt(e2), measure[i]});
  }
  table.monotone = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].error > table.rows[i - 1].error * (1.0 + 1e-9) + 1e-14) table.monotone = false;
  return table;
}

// ---------------------------------------------------------------------------

GraphStudy graph_domain_study(const GraphDomain& omega, const std::function<GraphDomain(double)>& perturbed,
                              const std::vector<double>& deltas, double q, int n, double band_factor) {
  if (!(q > 2.0)) throw DomainError("q must exceed 2");
  const std::vector<double> grid = checked_grid(deltas);
  const CoefficientField one = constant_field(Mat2::identity());
  AssemblyInput in;
  in.field = &one;
  in.source = [](Vec2) { return 1.0; };

  auto solve_on = [&](const GraphDomain& d) {
    const auto mesh = std::make_shared<const TriMesh>(mesh_graph_domain(d, n, n));
    return solve_cg(assemble(mesh, in), 1e-11);
  };
  const FemSolution sol = solve_on(omega);

  GraphStudy st;
  std::vector<double> lhs, rhs;
  for (double delta : grid) {
    const GraphDomain tilde = perturbed(delta);
    if (!tilde.same_cylinder(omega)) throw DomainError("perturbed domain must share the cylinder");
    const BiLipschitzMap map = build_graph_map(omega, tilde, GraphMapOptions{band_factor, 32});
    const double sym = symmetric_difference_measure(omega, tilde);

    const std::vector<double> xs = merged_breakpoints(omega.height(), tilde.height());
    std::vector<double> ys;
    for (double x : xs) ys.push_back(std::max(omega.height()(x), tilde.height()(x)));
    const GraphDomain uni(PiecewiseLinear(xs, ys), omega.floor(), omega.ceiling(),
                          std::max(omega.lip_bound(), tilde.lip_bound()));
    const TriMesh evaluator = refine_uniform(mesh_graph_domain(uni, n, n));

    const FemSolution sol_t = solve_on(tilde);
    const double err = cross_domain_gradient_error(sol_t, sol, evaluator);
    st.rows.push_back({delta, sym, map.e_set_measure, err});
    lhs.push_back(err);
    rhs.push_back(std::pow(sym, (q - 2.0) / (2.0 * q)));
    if (map.measure_constant) st.measure_constant = std::max(st.measure_constant, *map.measure_constant);
    st.max_forward_lip = std::max(st.max_forward_lip, map.forward_lip);
    st.max_inverse_lip = std::max(st.max_inverse_lip, map.inverse_lip);
  }
  st.bound = evaluate_bound(std::move(lhs), std::move(rhs), full_window(grid.size()), q,
                            std::max(st.max_forward_lip, st.max_inverse_lip));
  return st;
}

}  // namespace elstab
