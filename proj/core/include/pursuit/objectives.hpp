#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pursuit/atoms.hpp"

namespace pursuit {

/// Smooth convex objective with a declared smoothness upper bound L and an
/// optional strong-convexity modulus mu. Declared constants are trusted:
/// the library never infers L for black-box objectives (an over-declared L
/// is legal). Implementations are immutable; value/gradient are pure.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;

  virtual int dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  /// Upper bound on the smoothness constant.
  virtual double smoothness() const = 0;
  /// Strong-convexity modulus, if declared. Must satisfy mu <= L.
  virtual std::optional<double> strong_convexity() const { return std::nullopt; }
  /// Known unconstrained minimizer, if available.
  virtual std::optional<Vector> minimizer_hint() const { return std::nullopt; }

  /// f(x) - f(x*) when the minimizer is known; implementations override
  /// with cancellation-free forms where possible.
  virtual std::optional<double> suboptimality(const Vector& x) const;
};

/// f(x) = 1/2 x'Qx - b'x + c with Q symmetric positive semidefinite.
/// L and mu are the extreme eigenvalues of Q, computed exactly.
class QuadraticObjective : public SmoothObjective {
 public:
  QuadraticObjective(Matrix Q, Vector b, double c = 0.0);

  int dimension() const override { return static_cast<int>(b_.size()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double smoothness() const override { return L_; }
  std::optional<double> strong_convexity() const override { return mu_; }
  std::optional<Vector> minimizer_hint() const override;
  std::optional<double> suboptimality(const Vector& x) const override;

  const Matrix& Q() const { return Q_; }
  const Vector& b() const { return b_; }
  double c() const { return c_; }

 protected:
  Matrix Q_;
  Vector b_;
  double c_ = 0.0;
  double L_ = 0.0;
  double mu_ = 0.0;
  std::optional<Vector> minimizer_;
};

/// f(x) = 1/2 ||y - x||^2, the least-squares objective with target y.
/// L = mu = 1 exactly.
class LeastSquaresObjective : public QuadraticObjective {
 public:
  explicit LeastSquaresObjective(Vector y);

  const Vector& target() const { return y_; }
  std::optional<double> suboptimality(const Vector& x) const override;

 private:
  Vector y_;
};

/// f(x) = log sum_i exp(<a_i, x>) + mu0/2 ||x||^2 with declared
/// L = max_i ||a_i||^2 + mu0 and mu = mu0. Exercises iteration-varying
/// curvature; no closed-form minimizer.
class LogSumExpObjective : public SmoothObjective {
 public:
  /// `rows` holds one a_i per row.
  LogSumExpObjective(Matrix rows, double mu0);

  int dimension() const override { return static_cast<int>(rows_.cols()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double smoothness() const override { return L_; }
  std::optional<double> strong_convexity() const override;

  const Matrix& rows() const { return rows_; }
  double mu0() const { return mu0_; }

 private:
  Matrix rows_;
  double mu0_ = 0.0;
  double L_ = 0.0;
};

/// Quadratic upper bound of f at x_t evaluated at x:
/// g_{x_t}(x) = f(x_t) + <grad f(x_t), x - x_t> + L/2 ||x - x_t||^2.
double surrogate(const SmoothObjective& obj, const Vector& x_t, const Vector& x);

/// D(y, x) = f(y) - f(x) - <y - x, grad f(x)>. Nonnegative for convex f.
/// Note the argument order: x is the linearization anchor.
double linearization_gap(const SmoothObjective& obj, const Vector& x, const Vector& y);

/// Max relative error between the analytic gradient and central finite
/// differences at x (step h per coordinate). Used by validation tests.
double gradient_check(const SmoothObjective& obj, const Vector& x, double h = 1e-5);

/// JSON objective document:
/// { "kind": "least-squares", "target": [..] }
/// { "kind": "quadratic", "Q": [[..],..], "b": [..], "c": 0.0 }
/// { "kind": "log-sum-exp", "rows": [[..],..], "mu0": 0.1 }
std::unique_ptr<SmoothObjective> objective_from_json_text(const std::string& text);
std::string objective_to_json_text(const SmoothObjective& obj, int indent = -1);

}  // namespace pursuit
