#include "pursuit/objectives.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace pursuit {

std::optional<double> SmoothObjective::suboptimality(const Vector& x) const {
  auto hint = minimizer_hint();
  if (!hint) return std::nullopt;
  return value(x) - value(*hint);
}

QuadraticObjective::QuadraticObjective(Matrix Q, Vector b, double c)
    : Q_(std::move(Q)), b_(std::move(b)), c_(c) {
  if (Q_.rows() != Q_.cols() || Q_.rows() != b_.size()) {
    throw std::invalid_argument("QuadraticObjective: dimension mismatch");
  }
  if (!((Q_ - Q_.transpose()).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + Q_.lpNorm<Eigen::Infinity>()))) {
    throw std::invalid_argument("QuadraticObjective: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q_, Eigen::EigenvaluesOnly);
  L_ = eig.eigenvalues().maxCoeff();
  mu_ = eig.eigenvalues().minCoeff();
  if (mu_ < -1e-10 * std::max(1.0, L_)) {
    throw std::invalid_argument("QuadraticObjective: Q must be positive semidefinite");
  }
  mu_ = std::max(mu_, 0.0);
  if (mu_ > 0.0) {
    minimizer_ = Q_.ldlt().solve(b_);
  }
}

double QuadraticObjective::value(const Vector& x) const {
  return 0.5 * x.dot(Q_ * x) - b_.dot(x) + c_;
}

Vector QuadraticObjective::gradient(const Vector& x) const { return Q_ * x - b_; }

std::optional<Vector> QuadraticObjective::minimizer_hint() const { return minimizer_; }

std::optional<double> QuadraticObjective::suboptimality(const Vector& x) const {
  if (!minimizer_) return std::nullopt;
  Vector d = x - *minimizer_;
  return 0.5 * d.dot(Q_ * d);
}

LeastSquaresObjective::LeastSquaresObjective(Vector y)
    : QuadraticObjective(Matrix::Identity(y.size(), y.size()), y, 0.5 * y.squaredNorm()),
      y_(std::move(y)) {
  L_ = 1.0;
  mu_ = 1.0;
  minimizer_ = y_;
}

std::optional<double> LeastSquaresObjective::suboptimality(const Vector& x) const {
  return 0.5 * (y_ - x).squaredNorm();
}

LogSumExpObjective::LogSumExpObjective(Matrix rows, double mu0)
    : rows_(std::move(rows)), mu0_(mu0) {
  if (rows_.rows() < 1) throw std::invalid_argument("LogSumExpObjective: need >= 1 row");
  if (!(mu0_ >= 0.0)) throw std::invalid_argument("LogSumExpObjective: mu0 >= 0 required");
  L_ = rows_.rowwise().squaredNorm().maxCoeff() + mu0_;
}

double LogSumExpObjective::value(const Vector& x) const {
  Vector t = rows_ * x;
  double m = t.maxCoeff();
  return m + std::log((t.array() - m).exp().sum()) + 0.5 * mu0_ * x.squaredNorm();
}

Vector LogSumExpObjective::gradient(const Vector& x) const {
  Vector t = rows_ * x;
  double m = t.maxCoeff();
  Vector w = (t.array() - m).exp();
  w /= w.sum();
  return rows_.transpose() * w + mu0_ * x;
}

std::optional<double> LogSumExpObjective::strong_convexity() const {
  if (mu0_ > 0.0) return mu0_;
  return std::nullopt;
}

double surrogate(const SmoothObjective& obj, const Vector& x_t, const Vector& x) {
  Vector d = x - x_t;
  return obj.value(x_t) + obj.gradient(x_t).dot(d) + 0.5 * obj.smoothness() * d.squaredNorm();
}

double linearization_gap(const SmoothObjective& obj, const Vector& x, const Vector& y) {
  return obj.value(y) - obj.value(x) - (y - x).dot(obj.gradient(x));
}

double gradient_check(const SmoothObjective& obj, const Vector& x, double h) {
  Vector g = obj.gradient(x);
  double scale = std::max(1.0, g.norm());
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    double fd = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(i)) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using nlohmann::ordered_json;

namespace {

Vector vector_from_json(const ordered_json& j) {
  Vector v(static_cast<int>(j.size()));
  int i = 0;
  for (const auto& e : j) v(i++) = e.get<double>();
  return v;
}

Matrix matrix_from_json(const ordered_json& j) {
  const int r = static_cast<int>(j.size());
  if (r == 0) throw std::invalid_argument("objective document: empty matrix");
  const int c = static_cast<int>(j.at(0).size());
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    const auto& row = j.at(i);
    if (static_cast<int>(row.size()) != c) {
      throw std::invalid_argument("objective document: ragged matrix");
    }
    for (int k = 0; k < c; ++k) m(i, k) = row.at(k).get<double>();
  }
  return m;
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::unique_ptr<SmoothObjective> objective_from_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "least-squares") {
    return std::make_unique<LeastSquaresObjective>(vector_from_json(j.at("target")));
  }
  if (kind == "quadratic") {
    return std::make_unique<QuadraticObjective>(matrix_from_json(j.at("Q")),
                                                vector_from_json(j.at("b")),
                                                j.value("c", 0.0));
  }
  if (kind == "log-sum-exp") {
    return std::make_unique<LogSumExpObjective>(matrix_from_json(j.at("rows")),
                                                j.at("mu0").get<double>());
  }
  throw std::invalid_argument("unknown objective kind: " + kind);
}

std::string objective_to_json_text(const SmoothObjective& obj, int indent) {
  ordered_json j;
  if (const auto* ls = dynamic_cast<const LeastSquaresObjective*>(&obj)) {
    j["kind"] = "least-squares";
    j["target"] = vector_to_json(ls->target());
  } else if (const auto* q = dynamic_cast<const QuadraticObjective*>(&obj)) {
    j["kind"] = "quadratic";
    j["Q"] = matrix_to_json(q->Q());
    j["b"] = vector_to_json(q->b());
    j["c"] = q->c();
  } else if (const auto* lse = dynamic_cast<const LogSumExpObjective*>(&obj)) {
    j["kind"] = "log-sum-exp";
    j["rows"] = matrix_to_json(lse->rows());
    j["mu0"] = lse->mu0();
  } else {
    throw std::invalid_argument("objective_to_json_text: unsupported objective type");
  }
  return j.dump(indent);
}

}  // namespace pursuit
