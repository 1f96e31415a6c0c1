#pragma once

// Internal numeric helpers shared by the solver and geometry translation
// units. Not installed.

#include <Eigen/Core>
#include <cstdint>
#include <functional>

namespace pursuit::detail {

/// Golden-section minimization of a unimodal scalar function on [a, b].
/// Returns the argmin located to within `tol`.
double golden_section_minimize(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12, int max_iter = 200);

/// Exact Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double psd_lambda_max(const Eigen::MatrixXd& g, int iters = 64);

/// SplitMix64 step, used to derive per-iteration oracle seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace pursuit::detail
