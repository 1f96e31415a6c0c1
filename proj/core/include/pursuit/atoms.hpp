#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace pursuit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coordinate tolerance for set-membership comparisons between atoms.
inline constexpr double kAtomMatchTol = 1e-12;

/// A finite, ordered dictionary of vectors. Atoms are stored as the columns
/// of a dense d x n matrix together with a uniform positive scale factor;
/// the effective i-th atom is scale() * raw().col(i). Atom order is stable
/// and significant: all tie-breaking elsewhere refers to the stored index.
/// Immutable after construction.
class AtomSet {
 public:
  /// `atoms` holds one atom per column. If `symmetric` is claimed, every
  /// atom's negation must be present (within kAtomMatchTol) or the
  /// constructor throws. All coordinates must be finite.
  AtomSet(Matrix atoms, bool symmetric = false, double scale = 1.0);

  int dimension() const { return static_cast<int>(atoms_.rows()); }
  int size() const { return static_cast<int>(atoms_.cols()); }

  /// Effective atom, scale applied.
  Vector atom(int i) const { return scale_ * atoms_.col(i); }
  /// Unscaled atom columns.
  const Matrix& raw() const { return atoms_; }
  /// scale * raw(), materialized.
  Matrix scaled() const { return scale_ * atoms_; }

  bool symmetric() const { return symmetric_; }
  double scale_factor() const { return scale_; }

  /// True if some atom equals v within kAtomMatchTol (effective coordinates).
  bool contains(const Vector& v) const;

 private:
  Matrix atoms_;
  bool symmetric_ = false;
  double scale_ = 1.0;
};

/// Returns a set containing every input atom and its negation exactly once,
/// input atoms first in their original order. Idempotent; output carries
/// symmetric = true.
AtomSet symmetrize(const AtomSet& set);

/// Multiplies the uniform scale by alpha. Throws std::invalid_argument for
/// alpha <= 0.
AtomSet scale(const AtomSet& set, double alpha);

/// Largest Euclidean norm over atoms.
double radius(const AtomSet& set);

/// Largest pairwise Euclidean distance over atoms (attained at atoms).
double diameter(const AtomSet& set);

/// One half of a symmetric dictionary: a list B such that B and -B are
/// disjoint and B u -B is symmetric. Used for cumulative coherence.
class HalfDictionary {
 public:
  /// Throws if any atom equals the negation of another (within tolerance).
  explicit HalfDictionary(Matrix atoms);

  /// Splits a symmetric set, keeping the lower-indexed member of each
  /// +/- pair. Throws if `set` is not symmetric.
  static HalfDictionary from_symmetric(const AtomSet& set);

  int dimension() const { return static_cast<int>(atoms_.rows()); }
  int size() const { return static_cast<int>(atoms_.cols()); }
  const Matrix& atoms() const { return atoms_; }
  Vector atom(int i) const { return atoms_.col(i); }

  /// The symmetric set B u -B, in order [B, -B].
  AtomSet symmetrized() const;

 private:
  Matrix atoms_;
};

// ---------------------------------------------------------------------------
// Generators addressable by name in configs.
// ---------------------------------------------------------------------------

/// {+e_1..+e_d, -e_1..-e_d}: vertices of the L1 ball.
AtomSet make_l1_vertices(int d);

/// {(1,0), (cos t, sin t)} and negations, in that order.
AtomSet make_theta_pair(double theta);

/// n seeded unit vectors in R^d (Gaussian directions, normalized);
/// optionally closed under negation (appended as in symmetrize()).
AtomSet make_random_unit_sphere(int d, int n, std::uint64_t seed,
                                bool symmetrized = false);

/// {e_1..e_d}: vertices of the standard simplex.
AtomSet make_simplex_vertices(int d);

// ---------------------------------------------------------------------------
// JSON document I/O.
// { "dimension": d, "symmetric": bool, "scale": a, "atoms": [[..], ..] }
// Generator documents: { "generator": "l1-vertices", ... }.
// ---------------------------------------------------------------------------

std::string atom_set_to_json_text(const AtomSet& set, int indent = -1);
AtomSet atom_set_from_json_text(const std::string& text);

}  // namespace pursuit
