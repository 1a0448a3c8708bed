#include "elstab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "elstab/analytic.hpp"
#include "elstab/errors.hpp"
#include "elstab/experiments.hpp"
#include "elstab/fem.hpp"
#include "elstab/meshing.hpp"

namespace elstab {

namespace {

std::string g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_reentrant_flag(double beta) {
  if (!(beta > std::numbers::pi && beta < 2.0 * std::numbers::pi))
    throw UsageError("--beta must lie in (pi, 2*pi), got " + g12(beta));
}

// ---------------------------------------------------------------------------

struct VerifyFlags {
  std::string example = "limit";
  double beta = 1.5 * std::numbers::pi;
  double alpha = 2.0;
  double eps = 0.1;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out) {
  require_reentrant_flag(f.beta);
  if (!(f.alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (f.example != "limit" && !(f.eps > 0.0 && f.eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");

  const SourceTerm src = sharpness_source(f.beta);
  const CoefficientField one = constant_field(Mat2::identity());
  std::optional<SeparableSolution> sol;
  std::optional<CoefficientField> field;
  if (f.example == "limit") {
    sol = limit_solution(f.beta);
    field = one;
  } else if (f.example == "jump") {
    sol = jump_solution(f.beta, f.alpha, f.eps);
    field = radial_jump_field(f.alpha, f.eps);
  } else {
    sol = annulus_solution(f.beta, f.eps);
    field = one;
  }

  const ResidualReport rep = residual_check(*sol, src, *field);
  out << "example=" << f.example << " beta=" << g12(f.beta) << " alpha=" << g12(f.alpha) << " eps=" << g12(f.eps)
      << "\n";
  out << "residual max=" << g12(rep.max_residual) << " evaluated=" << rep.evaluated << " skipped=" << rep.skipped
      << "\n";
  bool pass = rep.max_residual < 1e-4;
  for (const InterfaceDefect& d : interface_defects(*sol, *field)) {
    out << "interface r=" << g12(d.radius) << " value_jump=" << g12(d.value_jump) << " flux_jump=" << g12(d.flux_jump)
        << "\n";
    pass = pass && d.value_jump < 1e-4 && d.flux_jump < 1e-4;
  }
  out << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? exit_ok : exit_failure;
}

// ---------------------------------------------------------------------------

struct RateFlags {
  std::string study = "coeff";
  double beta = 1.5 * std::numbers::pi;
  double alpha = 2.0;
  double q = 5.0;
  double eps_min = 1e-4;
  double eps_max = 1e-1;
  int points = 7;
  std::string mode = "semi";
  int condition = 3;
  int n_radial = 96;
  int n_angular = 96;
  double grading = 3.0;
  std::string out_file;
};

std::string rate_provenance(const RateFlags& f) {
  std::ostringstream s;
  s << "# cmd: rate-study --study " << f.study << " --beta " << g12(f.beta) << " --alpha " << g12(f.alpha) << " --q "
    << g12(f.q) << " --eps-min " << g12(f.eps_min) << " --eps-max " << g12(f.eps_max) << " --points " << f.points
    << " --mode " << f.mode;
  if (f.study == "qualitative") s << " --condition " << f.condition;
  if (f.mode == "fem" || f.study == "qualitative")
    s << " --n-radial " << f.n_radial << " --n-angular " << f.n_angular << " --grading " << g12(f.grading);
  return s.str();
}

void write_rows(std::ostream& os, const std::vector<StudyRow>& rows) {
  os << "eps,error,bound,ratio\n";
  for (const auto& r : rows) os << g12(r.eps) << "," << g12(r.error) << "," << g12(r.bound) << "," << g12(r.ratio) << "\n";
}

void write_fit(std::ostream& os, const RateFit& fit) {
  os << "# exponent=" << g12(fit.exponent) << " constant=" << g12(fit.constant) << " r2=" << g12(fit.r_squared)
     << " window=" << fit.window.first << ".." << fit.window.last << "\n";
}

void write_bound(std::ostream& os, const BoundCheck& b) {
  os << "# verdict=" << to_string(b.verdict) << " ratio_max=" << g12(b.ratio_max) << " q=" << g12(b.q)
     << " M=" << g12(b.M) << "\n";
}

int cmd_rate(const RateFlags& f, std::ostream& out, std::ostream& err) {
  require_reentrant_flag(f.beta);
  if (f.points < 4) throw UsageError("--points must be at least 4 (the fit needs 4 samples)");
  if (!(f.eps_min > 0.0 && f.eps_min < f.eps_max && f.eps_max < 0.5))
    throw UsageError("need 0 < --eps-min < --eps-max < 0.5");
  if (!(f.q > 2.0)) throw UsageError("--q must exceed 2");
  if (f.n_radial < 2 || f.n_angular < 2 || !(f.grading >= 1.0)) throw UsageError("bad mesh parameters");

  const std::vector<double> grid = geometric_grid(f.eps_max, f.eps_min, f.points);
  std::ostringstream csv;
  csv << rate_provenance(f) << "\n";
  std::optional<RateFit> fit;

  if (f.study == "coeff") {
    if (!(f.alpha > 0.0)) throw UsageError("--alpha must be positive");
    const CoefficientStudy st = coefficient_rate_study(f.beta, f.alpha, grid, f.q);
    write_rows(csv, st.rows);
    fit = st.fit;
    if (fit) write_fit(csv, *fit);
    write_bound(csv, st.bound);
    csv << "# lower_bound_constant=" << g12(st.lower_bound_constant)
        << " lower_bound_ratio_last=" << g12(st.lower_bound_ratios.back()) << "\n";
  } else if (f.study == "domain") {
    DomainStudyOptions opt;
    opt.mode = f.mode == "fem" ? StudyMode::fem : StudyMode::semi_analytic;
    opt.fem = {f.n_radial, f.n_angular, f.grading, 1e-10};
    const DomainStudy st = domain_rate_study(f.beta, grid, f.q, opt);
    write_rows(csv, st.rows);
    fit = st.fit;
    write_fit(csv, st.fit);
    write_bound(csv, st.bound);
    if (opt.mode == StudyMode::fem) {
      csv << "# under_resolved=";
      for (std::size_t i = 0; i < st.under_resolved.size(); ++i) csv << (i ? "," : "") << st.under_resolved[i];
      csv << " unknowns=" << st.max_unknowns << "\n";
    }
  } else if (f.study == "wwww") {
    const SeparableSolution u0 = limit_solution(f.beta);
    const CompositionCheck cc =
        composition_inequality_check([&](Vec2 p) { return u0.value(p); }, f.beta, grid, f.q);
    std::vector<StudyRow> rows;
    std::vector<RateSample> samples;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const BoundCheck& b = cc.function_bound;
      rows.push_back({grid[i], b.lhs[i], b.rhs[i], b.ratios[i]});
      samples.push_back({grid[i], b.lhs[i], 0.0});
    }
    write_rows(csv, rows);
    fit = fit_loglog(samples);
    write_fit(csv, *fit);
    write_bound(csv, cc.function_bound);
    csv << "# jacobian_inverse verdict=" << to_string(cc.inverse_jacobian_bound.verdict)
        << " ratio_max=" << g12(cc.inverse_jacobian_bound.ratio_max)
        << " jacobian_forward=" << (cc.forward_jacobian_unbounded ? "unbounded" : "bounded") << "\n";
  } else {
    if (f.condition != 3 && f.condition != 4) throw UsageError("--condition must be 3 or 4");
    if (!(f.alpha > 0.0)) throw UsageError("--alpha must be positive");
    QualitativeOptions opt;
    opt.beta = f.beta;
    opt.fem = {f.n_radial, f.n_angular, f.grading, 1e-10};
    const CoefficientField reference = constant_field(Mat2::identity());
    const double alpha = f.alpha;
    std::function<CoefficientField(double)> family;
    if (f.condition == 3)
      family = [alpha](double eps) { return radial_jump_field(alpha, eps); };
    else
      family = [](double eps) { return constant_field(Mat2::identity() * (1.0 + eps)); };
    const ConvergenceTable t =
        qualitative_convergence_study(family, reference, grid, f.condition == 3 ? ConvergenceCondition::condition_3
                                                                               : ConvergenceCondition::condition_4,
                                      opt);
    std::vector<StudyRow> rows;
    std::vector<RateSample> samples;
    for (const auto& r : t.rows) {
      rows.push_back({r.eps, r.error, r.condition_measure, r.condition_measure > 0.0 ? r.error / r.condition_measure : 0.0});
      samples.push_back({r.eps, r.error, 0.0});
    }
    write_rows(csv, rows);
    fit = fit_loglog(samples);
    write_fit(csv, *fit);
    csv << "# monotone=" << (t.monotone ? "yes" : "no") << "\n";
  }

  if (f.out_file.empty()) {
    out << csv.str();
  } else {
    std::ofstream os(f.out_file, std::ios::binary);
    if (!os) {
      err << "cannot open " << f.out_file << " for writing\n";
      return exit_failure;
    }
    os << csv.str();
  }
  if (!fit) {
    err << "degenerate series: every error is zero, no rate can be fitted\n";
    return exit_failure;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct SolveFlags {
  std::string domain = "sector";
  double beta = 1.5 * std::numbers::pi;
  double eps = 0.05;
  int n_radial = 8;
  int n_angular = 12;
  double grading = 1.0;
  std::vector<double> heights{0.8, 0.9, 0.85, 0.8};
  double floor = 0.0;
  double ceiling = 1.0;
  double lip = 10.0;
  int nx = 16;
  int ny = 16;
  int refine = 0;
  std::string coeff = "identity";
  double alpha = 2.0;
  double jump_radius = 0.1;
  double tol = 1e-10;
  int max_iter = 100000;
  std::string prefix;
};

int cmd_solve(const SolveFlags& f, std::ostream& out, std::ostream& err) {
  if (f.refine < 0 || f.refine > 8) throw UsageError("--refine must lie in [0, 8]");
  if (!(f.alpha > 0.0)) throw UsageError("--alpha must be positive");

  TriMesh mesh = [&]() -> TriMesh {
    if (f.domain == "graph") {
      if (f.heights.size() < 2) throw UsageError("--heights needs at least two values");
      std::vector<double> xs(f.heights.size());
      for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i) / (xs.size() - 1);
      const GraphDomain d(PiecewiseLinear(xs, f.heights), f.floor, f.ceiling, f.lip);
      return mesh_graph_domain(d, f.nx, f.ny);
    }
    if (!(f.beta > 0.0 && f.beta < 2.0 * std::numbers::pi)) throw UsageError("--beta must lie in (0, 2*pi)");
    std::vector<double> aligned;
    if (f.coeff == "jump") aligned.push_back(f.jump_radius);
    const SectorDomain d(f.beta, f.domain == "annulus" ? f.eps : 0.0, 1.0);
    std::erase_if(aligned, [&](double r) { return !(r > d.r_inner() && r < d.r_outer()); });
    return mesh_sector(d, f.n_radial, f.n_angular, f.grading, aligned);
  }();
  for (int l = 0; l < f.refine; ++l) mesh = refine_uniform(mesh);
  const auto mesh_ptr = std::make_shared<const TriMesh>(std::move(mesh));

  const CoefficientField field =
      f.coeff == "jump" ? radial_jump_field(f.alpha, f.jump_radius) : constant_field(Mat2::identity());
  AssemblyInput in;
  in.field = &field;
  if (f.domain == "graph") {
    in.source = [](Vec2) { return 1.0; };
  } else {
    const SourceTerm src = sharpness_source(f.beta);
    in.source = [src](Vec2 p) { return src(p); };
  }
  const SparseSystem sys = assemble(mesh_ptr, in);
  const FemSolution sol = solve_cg(sys, f.tol, f.max_iter);

  std::ofstream mesh_os(f.prefix + ".mesh", std::ios::binary);
  std::ofstream sol_os(f.prefix + ".sol", std::ios::binary);
  if (!mesh_os || !sol_os) {
    err << "cannot write output files with prefix " << f.prefix << "\n";
    return exit_failure;
  }
  write_mesh(mesh_os, *mesh_ptr);
  write_solution(sol_os, sol);
  out << "vertices=" << mesh_ptr->num_vertices() << " triangles=" << mesh_ptr->num_triangles()
      << " unknowns=" << sys.unknown_vertex.size() << " iterations=" << sol.report().iterations
      << " relative_residual=" << g12(sol.report().relative_residual) << "\n";
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability of elliptic problems under coefficient and domain perturbations", "elstab"};
  app.require_subcommand(1);

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify-analytic", "Check the closed-form solutions against the PDE");
  verify->add_option("--example", vf.example)->check(CLI::IsMember({"limit", "jump", "annulus"}));
  verify->add_option("--beta", vf.beta);
  verify->add_option("--alpha", vf.alpha);
  verify->add_option("--eps", vf.eps);

  RateFlags rf;
  auto* rate = app.add_subcommand("rate-study", "Tabulate errors over an eps grid and fit the rate");
  rate->add_option("--study", rf.study)->check(CLI::IsMember({"coeff", "domain", "wwww", "qualitative"}));
  rate->add_option("--beta", rf.beta);
  rate->add_option("--alpha", rf.alpha);
  rate->add_option("--q", rf.q);
  rate->add_option("--eps-min", rf.eps_min);
  rate->add_option("--eps-max", rf.eps_max);
  rate->add_option("--points", rf.points);
  rate->add_option("--mode", rf.mode)->check(CLI::IsMember({"semi", "fem"}));
  rate->add_option("--condition", rf.condition);
  rate->add_option("--n-radial", rf.n_radial);
  rate->add_option("--n-angular", rf.n_angular);
  rate->add_option("--grading", rf.grading);
  rate->add_option("--out", rf.out_file);

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "Solve one problem and export mesh and solution");
  solve->add_option("--domain", sf.domain)->check(CLI::IsMember({"sector", "annulus", "graph"}));
  solve->add_option("--beta", sf.beta);
  solve->add_option("--eps", sf.eps, "inner radius of the annular sector");
  solve->add_option("--n-radial", sf.n_radial);
  solve->add_option("--n-angular", sf.n_angular);
  solve->add_option("--grading", sf.grading);
  solve->add_option("--heights", sf.heights, "graph heights on a uniform grid of [0, 1]")->delimiter(',');
  solve->add_option("--floor", sf.floor);
  solve->add_option("--ceiling", sf.ceiling);
  solve->add_option("--lip", sf.lip);
  solve->add_option("--nx", sf.nx);
  solve->add_option("--ny", sf.ny);
  solve->add_option("--refine", sf.refine);
  solve->add_option("--coeff", sf.coeff)->check(CLI::IsMember({"identity", "jump"}));
  solve->add_option("--alpha", sf.alpha);
  solve->add_option("--jump-radius", sf.jump_radius);
  solve->add_option("--tol", sf.tol);
  solve->add_option("--max-iter", sf.max_iter);
  solve->add_option("--out-prefix", sf.prefix)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run with --help for usage\n";
    return exit_usage;
  }

  try {
    if (verify->parsed()) return cmd_verify(vf, out);
    if (rate->parsed()) return cmd_rate(rf, out, err);
    return cmd_solve(sf, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const HypothesisViolation& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return exit_hypothesis;
  } catch (const ConvergenceFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace elstab
