#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pursuit::detail {

double golden_section_minimize(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_iter) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, tau = 0.0;
  int rho = 0;
  double running = 0.0;
  for (int i = 0; i < n; ++i) {
    running += u[i];
    double t = (running - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      cssv = running;
    }
  }
  tau = (cssv - 1.0) / rho;
  Eigen::VectorXd w = (v.array() - tau).max(0.0);
  return w;
}

double psd_lambda_max(const Eigen::MatrixXd& g, int iters) {
  const int n = static_cast<int>(g.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lam = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd w = g * v;
    double norm = w.norm();
    if (norm <= 0.0) return 0.0;
    lam = v.dot(w);
    v = w / norm;
  }
  return std::max(lam, v.dot(g * v));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace pursuit::detail
