#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elstab/analytic.hpp"
#include "elstab/coefficients.hpp"
#include "elstab/fem.hpp"
#include "elstab/geometry.hpp"

namespace elstab {

/// One point of an error series.
struct RateSample {
  double eps;
  double error;
  /// Estimated quadrature/solver error of `error`; points above 1% of `error` leave the default window.
  double uncertainty = 0.0;
};

/// Inclusive index range into a sample list.
struct FitWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first + 1; }
};

/// Least-squares line through (log ε, log error).
struct RateFit {
  double exponent = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  std::vector<RateSample> samples;  // ordered by decreasing ε
  FitWindow window;
};

/// Geometric grid from eps_max down to eps_min with `points` entries (ratio constant).
std::vector<double> geometric_grid(double eps_max, double eps_min, int points);

/// 10^{-1} … 10^{-4} with ratio 10^{-1/2}.
std::vector<double> default_eps_grid();

/// Drops the two largest ε and any noisy point, keeping at least four samples.
FitWindow default_window(const std::vector<RateSample>& samples);

/// Throws DomainError on fewer than four samples in the window or a nonpositive value.
RateFit fit_loglog(std::vector<RateSample> samples, std::optional<FitWindow> window = std::nullopt);

enum class Verdict { bounded, violated };

const char* to_string(Verdict v);

/// lhs ≤ c·rhs tracked along a parameter grid.
struct BoundCheck {
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> ratios;
  double ratio_max = 0.0;
  double q = 0.0;
  double M = 0.0;
  FitWindow window;
  Verdict verdict = Verdict::bounded;
};

/// bounded iff the ratios over the window never increase (relative slack 1e-9) or vary by
/// less than 20% of their maximum.
BoundCheck evaluate_bound(std::vector<double> lhs, std::vector<double> rhs, FitWindow window, double q = 0.0,
                          double M = 0.0);

/// Row of a study table.
struct StudyRow {
  double eps;
  double error;
  double bound;
  double ratio;
};

// ---------------------------------------------------------------------------
// Coefficient perturbation on the sector

struct CoefficientStudy {
  std::vector<StudyRow> rows;
  std::optional<RateFit> fit;  // unset for a degenerate (all-zero) series
  BoundCheck bound;
  /// error²/ε^{2π/β} per row, and the asymptotic lower-bound constant π(1−α)²/(2β(1+α)²).
  std::vector<double> lower_bound_ratios;
  double lower_bound_constant = 0.0;
  double gradient_lq_norm = 0.0;
  bool degenerate = false;
};

/// Jump-coefficient family: errors from the closed-form solutions, bound against
/// ‖a_ε − 1‖_{L^{2q/(q−2)}}·‖∇u₀‖_{L^q}. Throws HypothesisViolation for q ≥ 2β/(β−π).
CoefficientStudy coefficient_rate_study(double beta, double alpha, const std::vector<double>& eps_grid, double q);

// ---------------------------------------------------------------------------
// Domain perturbation: the annular sector

enum class StudyMode { semi_analytic, fem };

struct FemStudyOptions {
  int n_radial = 96;
  int n_angular = 96;
  double grading = 3.0;
  double rel_tol = 1e-10;
};

struct DomainStudyOptions {
  StudyMode mode = StudyMode::semi_analytic;
  /// Replace the rhs by ε^{exponent} (instead of |E|^{(q−2)/(2q)}).
  std::optional<double> rhs_eps_exponent;
  FemStudyOptions fem{};
};

struct DomainStudy {
  std::vector<StudyRow> rows;
  RateFit fit;
  BoundCheck bound;
  /// Semi-analytic reference errors (both modes) and, in FEM mode, rows whose FEM error is
  /// more than 10% away from it.
  std::vector<double> semi_analytic_errors;
  std::vector<std::size_t> under_resolved;
  int max_unknowns = 0;
};

/// ‖∇u_ε − ∇u₀‖_{L²(Ω₀)} with u_ε extended by zero to r < ε; zero for eps = 0.
double annulus_error_semi_analytic(double beta, double eps);

DomainStudy domain_rate_study(double beta, const std::vector<double>& eps_grid, double q,
                              const DomainStudyOptions& opt = {});

// ---------------------------------------------------------------------------
// Composition and Jacobian deviation inequalities for radial shifts

struct CompositionCheck {
  /// ‖F∘φ_ε − F‖_{L²} against ‖F‖_{L^q}·|E|^{(q−2)/(2q)}.
  BoundCheck function_bound;
  /// ‖(Dφ_ε)⁻¹ − I‖_{L^{2q/(q−2)}} against |E|^{(q−2)/(2q)}.
  BoundCheck inverse_jacobian_bound;
  /// ‖Dφ_ε − I‖_{L^{2q/(q−2)}} diverges at the vertex (angular stretch ~ ε/r).
  bool forward_jacobian_unbounded = false;
  double f_lq_norm = 0.0;
  std::vector<double> e_measures;
};

using PointFn = std::function<double(Vec2)>;

/// ‖F∘φ − F‖_{L²(Ω_β)}.
double composition_defect(const PointFn& f, const BiLipschitzMap& map, double beta);

CompositionCheck composition_inequality_check(const PointFn& f, double beta, const std::vector<double>& eps_grid,
                                              double q);

// ---------------------------------------------------------------------------
// Qualitative strong convergence (no rate)

enum class ConvergenceCondition { condition_3, condition_4 };

struct ConvergenceRow {
  double eps;
  double error;
  double condition_measure;  // sup off K of |A_ε − A₀| (3) or sup |(A₀ − A_ε)₊| (4)
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool monotone = false;
};

struct QualitativeOptions {
  double beta = 1.5 * 3.14159265358979323846;
  double k_radius = 0.5;
  std::size_t condition_samples = 10000;
  FemStudyOptions fem{48, 48, 3.0, 1e-10};
};

/// FEM errors ‖∇u_ε − ∇u₀‖ for a field family on the sector; throws DomainError naming the
/// violating sample when the selected condition fails.
ConvergenceTable qualitative_convergence_study(const std::function<CoefficientField(double)>& family,
                                               const CoefficientField& reference, const std::vector<double>& eps_grid,
                                               ConvergenceCondition mode, const QualitativeOptions& opt = {});

// ---------------------------------------------------------------------------
// Graph-domain perturbation

struct GraphStudyRow {
  double delta;
  double symmetric_difference;
  double e_measure;
  double error;
};

struct GraphStudy {
  std::vector<GraphStudyRow> rows;
  BoundCheck bound;  // error against |Ω̃ △ Ω|^{(q−2)/(2q)}
  double measure_constant = 0.0;
  double max_forward_lip = 0.0;
  double max_inverse_lip = 0.0;
};

/// Solves −Δu = 1 on Ω and on each Ω̃_δ, measures the error over Ω ∪ Ω̃ on a mesh of the union.
GraphStudy graph_domain_study(const GraphDomain& omega, const std::function<GraphDomain(double)>& perturbed,
                              const std::vector<double>& deltas, double q, int n = 64, double band_factor = 4.0);

}  // namespace elstab
