#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pursuit/atoms.hpp"
#include "pursuit/objectives.hpp"

namespace pursuit {

// ---------------------------------------------------------------------------
// Widths and inradius
// ---------------------------------------------------------------------------

/// W_A(d) = max over atoms z of <d/||d||, z>. Throws on zero d.
double directional_width(const AtomSet& set, const Vector& d);

/// Minimal intrinsic directional width estimate. The value is always an
/// upper bound on the true minimum (it is the best probed direction).
/// method: "1d-exact" (span dimension 1), "2d-sweep" (dense angular sweep
/// plus golden-section refinement, exact to 1e-9), or "multi-start"
/// (projected subgradient descent from seeded random starts and all atom
/// directions, followed by a min-norm-point polish of the active set).
struct MdwEstimate {
  double value = 0.0;
  std::string method;
  int restarts = 0;
  double dispersion = 0.0;   // spread of per-start results (multi-start path)
  double bracket_lo = 0.0;   // trivial lower bound
  double bracket_hi = 0.0;   // the estimate itself (certified upper bound)
};

MdwEstimate mdw(const AtomSet& set, int restarts = 200, std::uint64_t seed = 0);

/// Radius of the largest ball inscribed in conv(A) within lin(A), for
/// symmetric sets (equals mdw there). Throws
/// "unsupported: non-symmetric inradius" otherwise.
double effective_inradius(const AtomSet& set, int restarts = 200, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

/// mu(B, m) = max over m-subsets I of B, max over s_i in B \ I, of
/// sum_{s_j in I} |<s_i, s_j>|. Exact (for each i the inner maximum is the
/// sum of the m largest |<s_i, s_j>|, j != i). Atoms must be unit norm
/// (tolerance 1e-10) and 1 <= m < n.
double cumulative_coherence(const HalfDictionary& half, int m);

// ---------------------------------------------------------------------------
// Curvature and strong-convexity constants
// ---------------------------------------------------------------------------

struct CurvatureEstimate {
  double value = 0.0;
  bool exact = false;   // true for quadratics (vertex enumeration)
  double ceiling = 0.0; // smoothness cross-check: L diam^2, resp. L rho^2 radius^2
  long samples = 0;     // evaluation count on the sampled path
};

/// C_f over conv(A) (sup of (2/gamma^2) D(x + gamma (s - x), x)). Exact for
/// quadratics via max over atom pairs of (s - v)' Q (s - v); otherwise a
/// sampled supremum (atoms x random hull points x dyadic gamma grid).
CurvatureEstimate curvature_Cf(const SmoothObjective& obj, const AtomSet& set,
                               int hull_samples = 64, std::uint64_t seed = 0);

/// C_f^MP over rho conv(A) (rays y = x + gamma s). Exact for quadratics:
/// rho^2 max over atoms of s' Q s.
CurvatureEstimate curvature_CfMP(const SmoothObjective& obj, const AtomSet& set, double rho,
                                 int hull_samples = 64, std::uint64_t seed = 0);

struct MuFmpEstimate {
  double sampled = 0.0;     // minimum over admissible sampled pairs (upper estimate)
  double floor = 0.0;       // guaranteed lower bound mu rho^2 mdw^2
  long admissible = 0;      // number of pairs passing the zero-gap filter
};

/// Sampled version of the affine-invariant strong-convexity constant over
/// rho conv(A), together with its analytic floor. Requires mu > 0; throws
/// when no sampled pair is admissible.
MuFmpEstimate strong_convexity_muFMP(const SmoothObjective& obj, const AtomSet& set, double rho,
                                     int samples = 10000, std::uint64_t seed = 0,
                                     std::optional<double> mdw_hint = std::nullopt);

// ---------------------------------------------------------------------------
// Atomic norm
// ---------------------------------------------------------------------------

/// True if x lies in c * conv(A) (hull-projection distance <= dist_tol).
bool in_scaled_hull(const AtomSet& set, const Vector& x, double c, double dist_tol = 1e-9);

/// ||x||_A: smallest c >= 0 with x in c conv(A), by bisection on c with
/// hull-projection membership tests. Requires a symmetric set with 0 in the
/// relative interior of conv(A). Returns +infinity when x is outside lin(A).
double atomic_norm(const AtomSet& set, const Vector& x,
                   std::optional<double> mdw_hint = std::nullopt);

// ---------------------------------------------------------------------------
// Theorem rate bounds
// ---------------------------------------------------------------------------

enum class RateKind {
  sublinear_fw,   // 2((1/d)C + eps0)/(d t + 2), C = Cf or L diam^2
  sublinear_mp,   // 2((2/d)C + eps0)/((d/2) t + 2), C = CfMP or L rho^2 radius^2
  linear_mp,      // factor 1 - d^2 mu mdw^2 / (L radius^2)
  linear_affine,  // factor 1 - d^2 muFMP / CfMP
  lower_bound     // per-step floor 1 - (W^2/||z||^2)(2L - mu)/mu
};

/// Evaluator for the theorem envelopes. Parameters are looked up by name;
/// a missing parameter raises a domain error naming it.
class RateBound {
 public:
  RateBound(RateKind kind, std::map<std::string, double> params);

  RateKind kind() const { return kind_; }
  /// Envelope value at iteration t (sublinear kinds).
  double sublinear(int t) const;
  /// Constant per-step factor (linear kinds); lies in (0,1) under the
  /// theorems' hypotheses.
  double linear_factor() const;
  /// Per-step floor factor recomputed from trace data (lower_bound kind).
  double lower_floor(double width, double atom_norm) const;

  double param(const std::string& name) const;
  bool has(const std::string& name) const;

 private:
  RateKind kind_;
  std::map<std::string, double> params_;
  double effective_constant() const;  // C for the sublinear kinds
};

RateBound rate_bound(RateKind kind, std::map<std::string, double> params);

// ---------------------------------------------------------------------------
// Geometry report (CLI surface)
// ---------------------------------------------------------------------------

struct GeometryReport {
  int dimension = 0;
  int atom_count = 0;
  bool symmetric = false;
  double radius = 0.0;
  double diameter = 0.0;
  MdwEstimate mdw;
  std::optional<double> effective_inradius;
  std::optional<int> coherence_m;
  std::optional<double> coherence_value;
  std::optional<CurvatureEstimate> Cf;
  std::optional<CurvatureEstimate> CfMP;
  std::optional<MuFmpEstimate> muFMP;
  std::vector<std::string> notes;
};

struct GeometryOptions {
  int mdw_restarts = 200;
  std::uint64_t seed = 0;
  std::optional<int> coherence_m;  // requires unit-norm symmetric set
  bool inradius = false;
  double rho = 1.0;  // scaling for CfMP / muFMP when an objective is given
};

GeometryReport build_geometry_report(const AtomSet& set, const SmoothObjective* obj,
                                     const GeometryOptions& opts);
std::string geometry_report_to_json_text(const GeometryReport& report, int indent = 2);

}  // namespace pursuit
