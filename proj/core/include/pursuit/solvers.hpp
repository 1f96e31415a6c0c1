#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pursuit/atoms.hpp"
#include "pursuit/lmo.hpp"
#include "pursuit/objectives.hpp"

namespace pursuit {

// ---------------------------------------------------------------------------
// State and trace records
// ---------------------------------------------------------------------------

/// Ordered list of selected atoms; member 0 is the initial point x0 (atom
/// index -1). Grows by at most one member per iteration; duplicates are
/// permitted and never removed.
struct ActiveSet {
  std::vector<std::pair<int, Vector>> members;

  static ActiveSet start(const Vector& x0);
  void add(int atom_index, Vector atom);
  /// Members as columns, in order.
  Matrix matrix() const;
  int size() const { return static_cast<int>(members.size()); }
};

/// Per-iterate run record. Quantities are measured at iterate x_t; gamma and
/// atom_index describe the step taken from x_t (the final record of a trace
/// has no step: atom_index = -1, gamma = NaN). NaN marks fields that do not
/// apply (dual_gap outside the FW family, subopt when x* is unknown).
struct StepRecord {
  int t = 0;
  double gamma = 0.0;
  int atom_index = -1;
  double f_value = 0.0;
  double subopt = 0.0;
  double dual_gap = 0.0;        // <-grad f(x_t), z_t - x_t>, FW family
  double grad_norm = 0.0;
  double width_neg_grad = 0.0;  // W_A(-grad f(x_t)), exact-LMO directional width
  double atom_norm = 0.0;       // ||z_t||
  double iterate_atomic_norm_bound = 0.0;  // running rho-candidate
  double feasibility = 0.0;     // simplex-weight reconstruction / span residual
};

struct Trace {
  std::string config_json;  // snapshot of the resolved run configuration
  Vector x0;
  std::vector<StepRecord> steps;  // T+1 records
  Vector final;
  double rho_posthoc = std::numeric_limits<double>::quiet_NaN();
  bool rho_violation = false;  // a-priori rho (if any) exceeded post hoc
  bool subopt_approximate = false;
  std::vector<std::string> notes;

  const StepRecord& record(int t) const { return steps.at(static_cast<std::size_t>(t)); }
  int horizon() const { return static_cast<int>(steps.size()) - 1; }
};

std::string trace_to_json_text(const Trace& trace, int indent = -1);
Trace trace_from_json_text(const std::string& text);
/// Per-step CSV with header t,f,subopt,gamma,atom,dual_gap.
std::string trace_to_csv_text(const Trace& trace);

// ---------------------------------------------------------------------------
// Quadratic subproblems
// ---------------------------------------------------------------------------

struct HullProjection {
  Vector point;
  Vector weights;  // on the simplex: w >= 0, sum w = 1
  double residual = 0.0;
  int iterations = 0;
};

/// argmin over convex combinations w of ||sum_i w_i m_i - b||^2, by
/// accelerated projected gradient on the weights with sort-based simplex
/// projection. Stops when the gradient-mapping norm is <= tol; throws after
/// max_iter iterations, carrying the best residual.
HullProjection project_onto_convex_hull(const Matrix& members, const Vector& b,
                                        double tol = 1e-10, int max_iter = 100000,
                                        const Vector* warm_start = nullptr);

/// Orthogonal projection of b onto span(members) via a rank-revealing
/// orthogonal factorization (rank tolerance 1e-12); minimum-norm
/// coefficients on rank deficiency. Residual is orthogonal to every member.
Vector least_squares_over_span(const Matrix& members, const Vector& b,
                               Vector* coefficients = nullptr);

// ---------------------------------------------------------------------------
// Single steps (pure functions from state to state)
// ---------------------------------------------------------------------------

/// One matching-pursuit step on f(x) = 1/2||y - x||^2: exact LMO over the
/// symmetrized set at query x_t - y, then the closed-form line step
/// gamma = <y - x_t, z>/||z||^2. The new residual is orthogonal to z.
std::pair<Vector, StepRecord> mp_step(const LeastSquaresObjective& ls, const Vector& x_t,
                                      const AtomSet& set);

/// One orthogonal-matching-pursuit step: adds the selected atom to the
/// active set and projects y onto span(S).
std::pair<Vector, StepRecord> omp_step(const LeastSquaresObjective& ls, const Vector& x_t,
                                       ActiveSet& active, const AtomSet& set,
                                       Vector* member_coefficients = nullptr);

/// One Frank-Wolfe step. Variants: 0 fixed gamma = 2/(t+2); 1 line search on
/// f over [0,1] (golden section, tol 1e-12); 2 clip[<-g, z-x>/(diam^2 L)];
/// 3 clip[<-g, z-x>/(||z-x||^2 L)]. z = x with variant 3 records gamma = 0.
std::pair<Vector, StepRecord> fw_step(const SmoothObjective& obj, const Vector& x_t,
                                      const AtomSet& set, int variant, int t,
                                      const LmoConfig& cfg);

/// One norm-corrective Frank-Wolfe step on b = x_t - grad f(x_t)/L.
/// Variant 0: closed-form segment step toward z_t; variant 1: projection of
/// b onto conv(S u {z_t}) (member weights optionally exposed).
std::pair<Vector, StepRecord> ncfw_step(const SmoothObjective& obj, const Vector& x_t,
                                        ActiveSet& active, const AtomSet& set, int variant,
                                        const LmoConfig& cfg,
                                        Vector* member_weights = nullptr);

/// One norm-corrective generalized matching-pursuit step on the same b.
/// Variant 0: gamma = -<x_t - b, z>/||z||^2 along z_t alone; variant 1:
/// least-squares solve for b over span(S u {z_t}).
std::pair<Vector, StepRecord> gmp_step(const SmoothObjective& obj, const Vector& x_t,
                                       ActiveSet& active, const AtomSet& set, int variant,
                                       const LmoConfig& cfg,
                                       Vector* member_coefficients = nullptr);

/// One curvature-constant Frank-Wolfe step: gamma = clip[<-g, z-x>/Cf].
std::pair<Vector, StepRecord> affine_fw_step(const SmoothObjective& obj, const Vector& x_t,
                                             const AtomSet& set, double Cf,
                                             const LmoConfig& cfg);

/// One curvature-constant generalized MP step over the rho-scaled hull.
/// Variant 1: gamma = <-g, z> rho^2 / CfMP_rho along z_t; variant 2:
/// x_{t+1} minimizes f over span(S u {z_t}) (exact solve for quadratics,
/// 1/L gradient descent to projected-gradient norm <= 1e-10 otherwise).
std::pair<Vector, StepRecord> affine_gmp_step(const SmoothObjective& obj, const Vector& x_t,
                                              ActiveSet& active, const AtomSet& set,
                                              double rho, double CfMP_rho, int variant,
                                              const LmoConfig& cfg,
                                              Vector* member_coefficients = nullptr);

/// Re-runs the variant-1 update of the respective algorithm over the current
/// active set without adding an atom. f does not increase.
enum class CorrectionFlavor { fw, mp };
Vector atom_correction(const SmoothObjective& obj, const Vector& x_t,
                       const ActiveSet& active, CorrectionFlavor flavor);

// ---------------------------------------------------------------------------
// Full runs
// ---------------------------------------------------------------------------

enum class Algorithm { mp, omp, fw, ncfw, gmp, affine_fw, affine_gmp };

bool is_fw_family(Algorithm alg);

struct SolverSpec {
  Algorithm algorithm = Algorithm::fw;
  int variant = 0;
  LmoConfig lmo;
  int T = 100;
  std::uint64_t seed = 0;
  std::optional<double> rho;    // a-priori atomic-norm bound (affine-gmp)
  std::optional<double> Cf;     // affine-fw constant
  std::optional<double> CfMP;   // affine-gmp constant (over rho * conv(A))
};

std::string solver_spec_to_json_text(const SolverSpec& spec, int indent = -1);
SolverSpec solver_spec_from_json_text(const std::string& text);

struct RunOptions {
  /// Simplex weights of x0 over the atom set (FW family); derived by
  /// projection when absent (residual must be <= 1e-8).
  std::optional<Vector> x0_weights;
  /// Known minimizer, overriding the objective's hint for suboptimality.
  std::optional<Vector> minimizer_override;
  /// Compute rho_posthoc = max atomic norm over {x*, x0..x_T} (symmetric
  /// working sets only).
  bool compute_rho_posthoc = true;
  /// Record W_A(-grad f(x_t)) per step (one extra exact LMO pass).
  bool record_width = true;
  /// For objectives with no minimizer hint, derive an approximate f* from a
  /// reference run with 10x the iteration budget.
  bool reference_subopt_if_needed = false;
  /// Snapshot stored into Trace::config_json (solver spec alone if empty).
  std::string config_json;
};

/// Executes spec.T steps of the named algorithm/variant from x0, recording a
/// StepRecord per iterate (T+1 records). Preconditions: x0 in conv(A) for
/// the FW family (projection residual <= 1e-8), x0 in lin(A) for the MP
/// family (span residual <= 1e-8).
Trace run(const SolverSpec& spec, const SmoothObjective& obj, const AtomSet& set,
          const Vector& x0, const RunOptions& opts = {});

}  // namespace pursuit
