#include "pursuit/solvers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "internal.hpp"
#include "pursuit/geometry.hpp"

namespace pursuit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clip01(double s) { return std::max(0.0, std::min(1.0, s)); }

LmoResult select_atom(const AtomSet& set, const Vector& grad, const Vector& x_t,
                      const LmoConfig& cfg, bool mp_contract) {
  switch (cfg.mode) {
    case LmoMode::exact:
      return lmo_exact(set, grad);
    case LmoMode::approx_fw:
      if (mp_contract) {
        throw std::invalid_argument("approx-fw oracle is not valid for MP-family steps");
      }
      return lmo_approx_fw(set, grad, x_t, cfg);
    case LmoMode::approx_mp:
      if (!mp_contract) {
        throw std::invalid_argument("approx-mp oracle is not valid for FW-family steps");
      }
      return lmo_approx_mp(set, grad, cfg);
  }
  throw std::logic_error("select_atom: bad mode");
}

const AtomSet& symmetrized_view(const AtomSet& set, std::optional<AtomSet>& storage) {
  if (set.symmetric()) return set;
  storage.emplace(symmetrize(set));
  return *storage;
}

}  // namespace

// ---------------------------------------------------------------------------
// ActiveSet
// ---------------------------------------------------------------------------

ActiveSet ActiveSet::start(const Vector& x0) {
  ActiveSet s;
  s.members.emplace_back(-1, x0);
  return s;
}

void ActiveSet::add(int atom_index, Vector atom) {
  members.emplace_back(atom_index, std::move(atom));
}

Matrix ActiveSet::matrix() const {
  if (members.empty()) throw std::invalid_argument("ActiveSet: empty");
  Matrix m(members.front().second.size(), static_cast<int>(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) m.col(static_cast<int>(j)) = members[j].second;
  return m;
}

// ---------------------------------------------------------------------------
// Quadratic subproblems
// ---------------------------------------------------------------------------

HullProjection project_onto_convex_hull(const Matrix& members, const Vector& b, double tol,
                                        int max_iter, const Vector* warm_start) {
  const int k = static_cast<int>(members.cols());
  if (k == 0) throw std::invalid_argument("project_onto_convex_hull: no members");
  HullProjection out;
  if (k == 1) {
    out.weights = Vector::Ones(1);
    out.point = members.col(0);
    out.residual = (out.point - b).norm();
    return out;
  }

  const Matrix gram = members.transpose() * members;
  const Vector q = members.transpose() * b;
  double lip = detail::psd_lambda_max(gram) * 1.02 + 1e-30;

  Vector w = (warm_start != nullptr && warm_start->size() == k)
                 ? detail::project_to_simplex(*warm_start)
                 : Vector::Constant(k, 1.0 / k);
  auto fval = [&](const Vector& u) { return 0.5 * u.dot(gram * u) - q.dot(u); };

  Vector y = w;
  double theta = 1.0;
  Vector w_best = w;
  double f_best = fval(w);
  int it = 0;
  for (; it < max_iter; ++it) {
    Vector g = gram * y - q;
    Vector w_next = detail::project_to_simplex(y - g / lip);
    // fixed-point residual of the projected step
    double fp = (w_next - y).norm();
    double fn = fval(w_next);
    if (fn < f_best) {
      f_best = fn;
      w_best = w_next;
    }
    // gradient-mapping stop, measured at w_next
    if (fp <= tol || it % 4 == 3) {
      Vector gn = gram * w_next - q;
      double mapping = (w_next - detail::project_to_simplex(w_next - gn / lip)).norm();
      if (mapping <= tol) {
        w_best = fn <= f_best ? w_next : w_best;
        out.weights = w_best;
        out.point = members * w_best;
        out.residual = (out.point - b).norm();
        out.iterations = it + 1;
        return out;
      }
    }
    // adaptive restart
    if (g.dot(w_next - w) > 0.0) {
      theta = 1.0;
      y = w_next;
    } else {
      double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = w_next + ((theta - 1.0) / theta_next) * (w_next - w);
      theta = theta_next;
    }
    w = w_next;
  }
  std::ostringstream msg;
  msg << "project_onto_convex_hull: iteration cap " << max_iter
      << " reached; best residual " << (members * w_best - b).norm();
  throw std::runtime_error(msg.str());
}

Vector least_squares_over_span(const Matrix& members, const Vector& b, Vector* coefficients) {
  if (members.cols() == 0) throw std::invalid_argument("least_squares_over_span: no members");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-12);
  cod.compute(members);
  Vector c = cod.solve(b);
  if (coefficients != nullptr) *coefficients = c;
  return members * c;
}

// ---------------------------------------------------------------------------
// Single steps
// ---------------------------------------------------------------------------

std::pair<Vector, StepRecord> mp_step(const LeastSquaresObjective& ls, const Vector& x_t,
                                      const AtomSet& set) {
  std::optional<AtomSet> storage;
  const AtomSet& sym = symmetrized_view(set, storage);
  const Vector& y = ls.target();
  Vector query = x_t - y;  // gradient of 1/2||y - x||^2
  LmoResult z = lmo_exact(sym, query);
  double zn = z.atom.squaredNorm();
  if (zn <= 0.0) throw std::runtime_error("mp_step: degenerate-atom (zero norm) selected");
  double gamma = (y - x_t).dot(z.atom) / zn;
  StepRecord rec;
  rec.gamma = gamma;
  rec.atom_index = z.index;
  rec.atom_norm = std::sqrt(zn);
  rec.dual_gap = kNaN;
  return {x_t + gamma * z.atom, rec};
}

std::pair<Vector, StepRecord> omp_step(const LeastSquaresObjective& ls, const Vector& x_t,
                                       ActiveSet& active, const AtomSet& set,
                                       Vector* member_coefficients) {
  std::optional<AtomSet> storage;
  const AtomSet& sym = symmetrized_view(set, storage);
  const Vector& y = ls.target();
  LmoResult z = lmo_exact(sym, x_t - y);
  active.add(z.index, z.atom);
  Vector x_next = least_squares_over_span(active.matrix(), y, member_coefficients);
  StepRecord rec;
  rec.gamma = kNaN;
  rec.atom_index = z.index;
  rec.atom_norm = z.atom.norm();
  rec.dual_gap = kNaN;
  return {x_next, rec};
}

std::pair<Vector, StepRecord> fw_step(const SmoothObjective& obj, const Vector& x_t,
                                      const AtomSet& set, int variant, int t,
                                      const LmoConfig& cfg) {
  if (variant < 0 || variant > 3) throw std::invalid_argument("fw_step: variant must be 0..3");
  Vector grad = obj.gradient(x_t);
  LmoResult z = select_atom(set, grad, x_t, cfg, /*mp_contract=*/false);
  Vector dir = z.atom - x_t;
  double gap = -grad.dot(dir);
  double gamma = 0.0;
  switch (variant) {
    case 0:
      gamma = 2.0 / (t + 2.0);
      break;
    case 1: {
      auto phi = [&](double g) { return obj.value(x_t + g * dir); };
      double g_star = detail::golden_section_minimize(phi, 0.0, 1.0, 1e-12);
      gamma = g_star;
      // keep the better of the bracket endpoints (stationary steps stay put)
      if (phi(0.0) <= phi(gamma)) gamma = 0.0;
      if (phi(1.0) < phi(gamma)) gamma = 1.0;
      break;
    }
    case 2: {
      double dsq = diameter(set);
      gamma = clip01(gap / (dsq * dsq * obj.smoothness()));
      break;
    }
    case 3: {
      double dn = dir.squaredNorm();
      gamma = dn > 0.0 ? clip01(gap / (dn * obj.smoothness())) : 0.0;
      break;
    }
  }
  StepRecord rec;
  rec.gamma = gamma;
  rec.atom_index = z.index;
  rec.atom_norm = z.atom.norm();
  rec.dual_gap = gap;
  return {x_t + gamma * dir, rec};
}

std::pair<Vector, StepRecord> ncfw_step(const SmoothObjective& obj, const Vector& x_t,
                                        ActiveSet& active, const AtomSet& set, int variant,
                                        const LmoConfig& cfg, Vector* member_weights) {
  if (variant < 0 || variant > 1) throw std::invalid_argument("ncfw_step: variant must be 0 or 1");
  Vector grad = obj.gradient(x_t);
  LmoResult z = select_atom(set, grad, x_t, cfg, /*mp_contract=*/false);
  active.add(z.index, z.atom);
  Vector b = x_t - grad / obj.smoothness();
  StepRecord rec;
  rec.atom_index = z.index;
  rec.atom_norm = z.atom.norm();
  rec.dual_gap = -grad.dot(z.atom - x_t);
  Vector x_next;
  if (variant == 0) {
    Vector dir = z.atom - x_t;
    double dn = dir.squaredNorm();
    double gamma = dn > 0.0 ? clip01((b - x_t).dot(dir) / dn) : 0.0;
    x_next = x_t + gamma * dir;
    rec.gamma = gamma;
  } else {
    HullProjection proj = project_onto_convex_hull(active.matrix(), b);
    x_next = proj.point;
    rec.gamma = kNaN;
    if (member_weights != nullptr) *member_weights = proj.weights;
  }
  return {x_next, rec};
}

std::pair<Vector, StepRecord> gmp_step(const SmoothObjective& obj, const Vector& x_t,
                                       ActiveSet& active, const AtomSet& set, int variant,
                                       const LmoConfig& cfg, Vector* member_coefficients) {
  if (variant < 0 || variant > 1) throw std::invalid_argument("gmp_step: variant must be 0 or 1");
  Vector grad = obj.gradient(x_t);
  LmoResult z = select_atom(set, grad, x_t, cfg, /*mp_contract=*/true);
  active.add(z.index, z.atom);
  Vector b = x_t - grad / obj.smoothness();
  StepRecord rec;
  rec.atom_index = z.index;
  rec.atom_norm = z.atom.norm();
  rec.dual_gap = kNaN;
  Vector x_next;
  if (variant == 0) {
    double zn = z.atom.squaredNorm();
    if (zn <= 0.0) throw std::runtime_error("gmp_step: degenerate-atom (zero norm) selected");
    double gamma = -(x_t - b).dot(z.atom) / zn;
    x_next = x_t + gamma * z.atom;
    rec.gamma = gamma;
  } else {
    x_next = least_squares_over_span(active.matrix(), b, member_coefficients);
    rec.gamma = kNaN;
  }
  return {x_next, rec};
}

std::pair<Vector, StepRecord> affine_fw_step(const SmoothObjective& obj, const Vector& x_t,
                                             const AtomSet& set, double Cf,
                                             const LmoConfig& cfg) {
  if (!(Cf > 0.0)) throw std::invalid_argument("affine_fw_step: Cf must be positive");
  Vector grad = obj.gradient(x_t);
  LmoResult z = select_atom(set, grad, x_t, cfg, /*mp_contract=*/false);
  Vector dir = z.atom - x_t;
  double gap = -grad.dot(dir);
  double gamma = clip01(gap / Cf);
  StepRecord rec;
  rec.gamma = gamma;
  rec.atom_index = z.index;
  rec.atom_norm = z.atom.norm();
  rec.dual_gap = gap;
  return {x_t + gamma * dir, rec};
}

namespace {

/// Minimizes f over span(members): exact normal-equations solve for
/// quadratics, 1/L projected gradient descent otherwise.
Vector minimize_over_span(const SmoothObjective& obj, const Matrix& members, const Vector& x_warm,
                          Vector* coefficients) {
  Eigen::ColPivHouseholderQR<Matrix> qr(members);
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  if (rank == 0) {
    if (coefficients != nullptr) *coefficients = Vector::Zero(members.cols());
    return Vector::Zero(members.rows());
  }
  Matrix basis = Matrix(qr.householderQ()).leftCols(rank);  // orthonormal span basis
  Vector c;
  if (const auto* quad = dynamic_cast<const QuadraticObjective*>(&obj)) {
    Matrix h = basis.transpose() * quad->Q() * basis;
    Vector rhs = basis.transpose() * quad->b();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(1e-12);
    cod.compute(h);
    c = cod.solve(rhs);
  } else {
    c = basis.transpose() * x_warm;
    const double step = 1.0 / obj.smoothness();
    const int cap = 1000000;
    double pg = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cap; ++i) {
      Vector g = basis.transpose() * obj.gradient(basis * c);
      pg = g.norm();
      if (pg <= 1e-10) break;
      c -= step * g;
    }
    if (pg > 1e-10) {
      std::ostringstream msg;
      msg << "minimize_over_span: inner gradient descent stalled; projected gradient norm "
          << pg;
      throw std::runtime_error(msg.str());
    }
  }
  Vector point = basis * c;
  if (coefficients != nullptr) {
    // report coefficients in member coordinates (minimum-norm)
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(1e-12);
    cod.compute(members);
    *coefficients = cod.solve(point);
  }
  return point;
}

}  // namespace

std::pair<Vector, StepRecord> affine_gmp_step(const SmoothObjective& obj, const Vector& x_t,
                                              ActiveSet& active, const AtomSet& set,
                                              double rho, double CfMP_rho, int variant,
                                              const LmoConfig& cfg,
                                              Vector* member_coefficients) {
  if (variant < 1 || variant > 2) {
    throw std::invalid_argument("affine_gmp_step: variant must be 1 or 2");
  }
  if (!(CfMP_rho > 0.0)) throw std::invalid_argument("affine_gmp_step: CfMP must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("affine_gmp_step: rho must be positive");
  Vector grad = obj.gradient(x_t);
  LmoResult z = select_atom(set, grad, x_t, cfg, /*mp_contract=*/true);
  active.add(z.index, z.atom);
  StepRecord rec;
  rec.atom_index = z.index;
  rec.atom_norm = z.atom.norm();
  rec.dual_gap = kNaN;
  Vector x_next;
  if (variant == 1) {
    double gamma = (-grad).dot(z.atom) * rho * rho / CfMP_rho;
    x_next = x_t + gamma * z.atom;
    rec.gamma = gamma;
  } else {
    x_next = minimize_over_span(obj, active.matrix(), x_t, member_coefficients);
    rec.gamma = kNaN;
  }
  return {x_next, rec};
}

Vector atom_correction(const SmoothObjective& obj, const Vector& x_t, const ActiveSet& active,
                       CorrectionFlavor flavor) {
  if (active.members.empty()) throw std::invalid_argument("atom_correction: active set empty");
  Vector b = x_t - obj.gradient(x_t) / obj.smoothness();
  if (flavor == CorrectionFlavor::fw) {
    return project_onto_convex_hull(active.matrix(), b).point;
  }
  return least_squares_over_span(active.matrix(), b);
}

// ---------------------------------------------------------------------------
// Full runs
// ---------------------------------------------------------------------------

bool is_fw_family(Algorithm alg) {
  return alg == Algorithm::fw || alg == Algorithm::ncfw || alg == Algorithm::affine_fw;
}

namespace {

struct SuboptEvaluator {
  const SmoothObjective* obj = nullptr;
  std::optional<Vector> override_xstar;
  std::optional<double> f_reference;

  bool available() const {
    return override_xstar.has_value() || f_reference.has_value() ||
           (obj != nullptr && obj->minimizer_hint().has_value());
  }
  double eval(const Vector& x) const {
    if (override_xstar) return obj->value(x) - obj->value(*override_xstar);
    if (f_reference) return obj->value(x) - *f_reference;
    auto s = obj->suboptimality(x);
    return s ? *s : kNaN;
  }
};

Matrix span_basis(const Matrix& atoms) {
  Eigen::ColPivHouseholderQR<Matrix> qr(atoms);
  qr.setThreshold(1e-12);
  const int rank = std::max<int>(1, static_cast<int>(qr.rank()));
  return Matrix(qr.householderQ()).leftCols(rank);
}

}  // namespace

Trace run(const SolverSpec& spec, const SmoothObjective& obj, const AtomSet& set,
          const Vector& x0, const RunOptions& opts) {
  spec.lmo.check();
  if (spec.T < 0) throw std::invalid_argument("run: T must be >= 0");
  if (x0.size() != set.dimension() || obj.dimension() != set.dimension()) {
    throw std::invalid_argument("run: dimension mismatch");
  }
  const Algorithm alg = spec.algorithm;
  const bool fw_fam = is_fw_family(alg);
  const auto* ls = dynamic_cast<const LeastSquaresObjective*>(&obj);
  if ((alg == Algorithm::mp || alg == Algorithm::omp) && ls == nullptr) {
    throw std::invalid_argument("run: mp/omp require a least-squares objective");
  }
  if (alg == Algorithm::affine_fw && !spec.Cf) {
    throw std::invalid_argument("run: affine-fw requires constants.Cf");
  }
  if (alg == Algorithm::affine_gmp && (!spec.CfMP || !spec.rho)) {
    throw std::invalid_argument("run: affine-gmp requires rho and constants.CfMP");
  }

  // Working set: MP/OMP act on the symmetrized dictionary.
  std::optional<AtomSet> sym_storage;
  const AtomSet& working = (alg == Algorithm::mp || alg == Algorithm::omp)
                               ? symmetrized_view(set, sym_storage)
                               : set;
  const Matrix atoms = working.scaled();
  const int n_atoms = working.size();

  Trace trace;
  trace.config_json = opts.config_json.empty() ? solver_spec_to_json_text(spec)
                                               : opts.config_json;
  trace.x0 = x0;

  // Feasibility of x0 + simplex weights for the FW family.
  Vector w;            // atom weights of the current iterate (FW family)
  Vector w_x0;         // fixed atom weights of x0
  Matrix basis;        // orthonormal basis of lin(A) (MP family)
  if (fw_fam) {
    if (opts.x0_weights) {
      if (opts.x0_weights->size() != n_atoms) {
        throw std::invalid_argument("run: x0_weights size mismatch");
      }
      w = *opts.x0_weights;
      if ((atoms * w - x0).norm() > 1e-8 || std::abs(w.sum() - 1.0) > 1e-10 ||
          w.minCoeff() < -1e-12) {
        throw std::invalid_argument("run: x0_weights do not reconstruct x0 on the simplex");
      }
    } else {
      int match = -1;
      for (int i = 0; i < n_atoms && match < 0; ++i) {
        if ((atoms.col(i) - x0).lpNorm<Eigen::Infinity>() <= kAtomMatchTol) match = i;
      }
      if (match >= 0) {
        w = Vector::Zero(n_atoms);
        w(match) = 1.0;
      } else {
        HullProjection proj = project_onto_convex_hull(atoms, x0);
        if (proj.residual > 1e-8) {
          throw std::invalid_argument("run: x0 is not in conv(A) (projection residual " +
                                      std::to_string(proj.residual) + ")");
        }
        w = proj.weights;
      }
    }
    w_x0 = w;
  } else {
    basis = span_basis(atoms);
    double span_res = (x0 - basis * (basis.transpose() * x0)).norm();
    if (span_res > 1e-8) {
      throw std::invalid_argument("run: x0 is not in lin(A) (span residual " +
                                  std::to_string(span_res) + ")");
    }
  }

  // Suboptimality source.
  SuboptEvaluator subopt;
  subopt.obj = &obj;
  subopt.override_xstar = opts.minimizer_override;
  std::optional<Vector> xstar = opts.minimizer_override;
  if (!xstar) xstar = obj.minimizer_hint();
  if (!subopt.available() && opts.reference_subopt_if_needed && spec.T > 0) {
    SolverSpec ref_spec = spec;
    ref_spec.T = spec.T * 10;
    RunOptions ref_opts;
    ref_opts.x0_weights = opts.x0_weights;
    ref_opts.compute_rho_posthoc = false;
    ref_opts.record_width = false;
    Trace ref = run(ref_spec, obj, set, x0, ref_opts);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : ref.steps) best = std::min(best, r.f_value);
    subopt.f_reference = best;
    trace.subopt_approximate = true;
    trace.notes.push_back("suboptimality measured against a 10x reference run");
    if (!xstar) xstar = ref.final;
  }

  // Atomic-norm bookkeeping (running rho-candidate).
  double x0_anorm = kNaN;
  if (x0.norm() == 0.0) {
    x0_anorm = 0.0;
  } else {
    for (int i = 0; i < n_atoms; ++i) {
      if ((atoms.col(i) - x0).lpNorm<Eigen::Infinity>() <= kAtomMatchTol) {
        x0_anorm = 1.0;
        break;
      }
    }
    if (std::isnan(x0_anorm) && working.symmetric() && opts.compute_rho_posthoc) {
      try {
        x0_anorm = atomic_norm(working, x0);
      } catch (const std::exception&) {
        x0_anorm = kNaN;
      }
    }
  }
  double anorm_bound = x0_anorm;
  std::vector<double> member_anorm{x0_anorm};  // parallel to ActiveSet members

  ActiveSet active = ActiveSet::start(x0);
  std::vector<Vector> iterates{x0};
  Vector x = x0;

  auto feasibility = [&](const Vector& xt) {
    if (fw_fam) {
      double recon = (atoms * w - xt).norm();
      double simplex_defect = std::abs(w.sum() - 1.0) + std::max(0.0, -w.minCoeff());
      return std::max(recon, simplex_defect);
    }
    return (xt - basis * (basis.transpose() * xt)).norm();
  };

  auto fill_iterate_fields = [&](StepRecord& rec, int t, const Vector& xt) {
    rec.t = t;
    rec.f_value = obj.value(xt);
    rec.subopt = subopt.available() ? subopt.eval(xt) : kNaN;
    Vector grad = obj.gradient(xt);
    rec.grad_norm = grad.norm();
    if (opts.record_width && rec.grad_norm > 0.0) {
      rec.width_neg_grad = -lmo_exact(working, grad).inner / rec.grad_norm;
    } else {
      rec.width_neg_grad = kNaN;
    }
    rec.iterate_atomic_norm_bound = anorm_bound;
    rec.feasibility = feasibility(xt);
  };

  trace.steps.reserve(spec.T + 1);
  for (int t = 0; t < spec.T; ++t) {
    LmoConfig cfg = spec.lmo;
    if (cfg.impl.kind == LmoImpl::Kind::subsample) {
      cfg.impl.seed = detail::mix_seed(detail::mix_seed(spec.seed, cfg.impl.seed),
                                       static_cast<std::uint64_t>(t));
    }
    Vector x_next;
    StepRecord rec;
    Vector mw, mc;
    switch (alg) {
      case Algorithm::mp:
        std::tie(x_next, rec) = mp_step(*ls, x, working);
        break;
      case Algorithm::omp:
        std::tie(x_next, rec) = omp_step(*ls, x, active, working, &mc);
        break;
      case Algorithm::fw:
        std::tie(x_next, rec) = fw_step(obj, x, working, spec.variant, t, cfg);
        break;
      case Algorithm::ncfw:
        std::tie(x_next, rec) = ncfw_step(obj, x, active, working, spec.variant, cfg, &mw);
        break;
      case Algorithm::gmp:
        std::tie(x_next, rec) = gmp_step(obj, x, active, working, spec.variant, cfg, &mc);
        break;
      case Algorithm::affine_fw:
        std::tie(x_next, rec) = affine_fw_step(obj, x, working, *spec.Cf, cfg);
        break;
      case Algorithm::affine_gmp:
        std::tie(x_next, rec) = affine_gmp_step(obj, x, active, working, *spec.rho, *spec.CfMP,
                                                spec.variant, cfg, &mc);
        break;
    }
    fill_iterate_fields(rec, t, x);
    if (!std::isfinite(rec.f_value)) {
      throw std::runtime_error("run: objective value not finite at iteration " +
                               std::to_string(t));
    }

    // Bookkeeping toward x_{t+1}.
    const bool added_member = active.size() == static_cast<int>(member_anorm.size()) + 1;
    if (added_member) member_anorm.push_back(1.0);
    switch (alg) {
      case Algorithm::mp:
        anorm_bound += std::abs(rec.gamma);
        break;
      case Algorithm::gmp:
        if (spec.variant == 0) {
          anorm_bound += std::abs(rec.gamma);
        } else {
          anorm_bound = 0.0;
          for (int j = 0; j < mc.size(); ++j) anorm_bound += std::abs(mc(j)) * member_anorm[j];
        }
        break;
      case Algorithm::affine_gmp:
        if (spec.variant == 1) {
          anorm_bound += std::abs(rec.gamma);
        } else {
          anorm_bound = 0.0;
          for (int j = 0; j < mc.size(); ++j) anorm_bound += std::abs(mc(j)) * member_anorm[j];
        }
        break;
      case Algorithm::omp: {
        anorm_bound = 0.0;
        for (int j = 0; j < mc.size(); ++j) anorm_bound += std::abs(mc(j)) * member_anorm[j];
        break;
      }
      case Algorithm::fw:
      case Algorithm::affine_fw:
        w = (1.0 - rec.gamma) * w;
        w(rec.atom_index) += rec.gamma;
        anorm_bound = (1.0 - rec.gamma) * anorm_bound + rec.gamma;
        break;
      case Algorithm::ncfw:
        if (spec.variant == 0) {
          w = (1.0 - rec.gamma) * w;
          w(rec.atom_index) += rec.gamma;
          anorm_bound = (1.0 - rec.gamma) * anorm_bound + rec.gamma;
        } else {
          Vector w_new = mw(0) * w_x0;
          for (int j = 1; j < mw.size(); ++j) w_new(active.members[j].first) += mw(j);
          w = w_new;
          anorm_bound = 0.0;
          for (int j = 0; j < mw.size(); ++j) anorm_bound += mw(j) * member_anorm[j];
        }
        break;
    }

    trace.steps.push_back(rec);
    x = x_next;
    iterates.push_back(x);
  }

  // Final record (no step taken).
  {
    StepRecord rec;
    fill_iterate_fields(rec, spec.T, x);
    rec.gamma = kNaN;
    rec.atom_index = -1;
    rec.atom_norm = kNaN;
    if (fw_fam && rec.grad_norm > 0.0) {
      LmoResult z = lmo_exact(working, obj.gradient(x));
      rec.dual_gap = -obj.gradient(x).dot(z.atom - x);
    } else {
      rec.dual_gap = kNaN;
    }
    trace.steps.push_back(rec);
  }
  trace.final = x;

  // Post-hoc rho: max atomic norm over {x*, x0, ..., x_T}.
  if (opts.compute_rho_posthoc) {
    if (working.symmetric()) {
      MdwEstimate width = mdw(working, 64, spec.seed);
      std::vector<const Vector*> points;
      if (xstar) points.push_back(&*xstar);
      for (auto it = iterates.rbegin(); it != iterates.rend(); ++it) points.push_back(&*it);
      double rho_max = 0.0;
      for (const Vector* p : points) {
        if (rho_max > 0.0 && in_scaled_hull(working, *p, rho_max)) continue;
        double norm = atomic_norm(working, *p, width.value);
        rho_max = std::max(rho_max, norm);
        if (std::isinf(rho_max)) break;
      }
      trace.rho_posthoc = rho_max;
      if (spec.rho && rho_max > *spec.rho * (1.0 + 1e-9)) {
        trace.rho_violation = true;
        trace.notes.push_back("a-priori rho " + std::to_string(*spec.rho) +
                              " violated post hoc (rho_posthoc " + std::to_string(rho_max) + ")");
      }
    } else {
      trace.notes.push_back("rho_posthoc unavailable: working set is not symmetric");
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

using nlohmann::ordered_json;

namespace {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::mp: return "mp";
    case Algorithm::omp: return "omp";
    case Algorithm::fw: return "fw";
    case Algorithm::ncfw: return "ncfw";
    case Algorithm::gmp: return "gmp";
    case Algorithm::affine_fw: return "affine-fw";
    case Algorithm::affine_gmp: return "affine-gmp";
  }
  return "fw";
}

Algorithm algorithm_from_name(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "mp") return Algorithm::mp;
  if (s == "omp") return Algorithm::omp;
  if (s == "fw") return Algorithm::fw;
  if (s == "ncfw") return Algorithm::ncfw;
  if (s == "gmp") return Algorithm::gmp;
  if (s == "affine-fw") return Algorithm::affine_fw;
  if (s == "affine-gmp") return Algorithm::affine_gmp;
  throw std::invalid_argument("unknown algorithm: " + s);
}

double json_double(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kNaN;
  return j.at(key).get<double>();
}

ordered_json vec_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vec_from_json(const ordered_json& a) {
  Vector v(static_cast<int>(a.size()));
  int i = 0;
  for (const auto& e : a) v(i++) = e.is_null() ? kNaN : e.get<double>();
  return v;
}

}  // namespace

std::string solver_spec_to_json_text(const SolverSpec& spec, int indent) {
  ordered_json j;
  j["algorithm"] = algorithm_name(spec.algorithm);
  j["variant"] = spec.variant;
  j["lmo"] = ordered_json::parse(lmo_config_to_json_text(spec.lmo));
  j["T"] = spec.T;
  j["seed"] = spec.seed;
  if (spec.rho) j["rho"] = *spec.rho;
  ordered_json constants = ordered_json::object();
  if (spec.Cf) constants["Cf"] = *spec.Cf;
  if (spec.CfMP) constants["CfMP"] = *spec.CfMP;
  if (!constants.empty()) j["constants"] = constants;
  return j.dump(indent);
}

SolverSpec solver_spec_from_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  SolverSpec spec;
  spec.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  spec.variant = j.value("variant", 0);
  if (j.contains("lmo")) spec.lmo = lmo_config_from_json_text(j.at("lmo").dump());
  spec.T = j.value("T", 100);
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("rho") && !j.at("rho").is_null()) spec.rho = j.at("rho").get<double>();
  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    if (c.contains("Cf") && !c.at("Cf").is_null()) spec.Cf = c.at("Cf").get<double>();
    if (c.contains("CfMP") && !c.at("CfMP").is_null()) spec.CfMP = c.at("CfMP").get<double>();
  }
  return spec;
}

std::string trace_to_json_text(const Trace& trace, int indent) {
  ordered_json j;
  j["config"] = trace.config_json.empty() ? ordered_json(nullptr)
                                          : ordered_json::parse(trace.config_json);
  j["x0"] = vec_json(trace.x0);
  ordered_json steps = ordered_json::array();
  for (const auto& r : trace.steps) {
    ordered_json s;
    s["t"] = r.t;
    s["f"] = r.f_value;
    s["subopt"] = r.subopt;
    s["gamma"] = r.gamma;
    s["atom"] = r.atom_index;
    s["dual_gap"] = r.dual_gap;
    s["grad_norm"] = r.grad_norm;
    s["width"] = r.width_neg_grad;
    s["atom_norm"] = r.atom_norm;
    s["anorm_bound"] = r.iterate_atomic_norm_bound;
    s["feasibility"] = r.feasibility;
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  j["final"] = vec_json(trace.final);
  j["rho_posthoc"] = trace.rho_posthoc;
  j["rho_violation"] = trace.rho_violation;
  j["subopt_approximate"] = trace.subopt_approximate;
  j["notes"] = trace.notes;
  return j.dump(indent);
}

Trace trace_from_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  Trace trace;
  if (j.contains("config") && !j.at("config").is_null()) {
    trace.config_json = j.at("config").dump();
  }
  trace.x0 = vec_from_json(j.at("x0"));
  for (const auto& s : j.at("steps")) {
    StepRecord r;
    r.t = s.at("t").get<int>();
    r.f_value = json_double(s, "f");
    r.subopt = json_double(s, "subopt");
    r.gamma = json_double(s, "gamma");
    r.atom_index = s.at("atom").get<int>();
    r.dual_gap = json_double(s, "dual_gap");
    r.grad_norm = json_double(s, "grad_norm");
    r.width_neg_grad = json_double(s, "width");
    r.atom_norm = json_double(s, "atom_norm");
    r.iterate_atomic_norm_bound = json_double(s, "anorm_bound");
    r.feasibility = json_double(s, "feasibility");
    trace.steps.push_back(r);
  }
  trace.final = vec_from_json(j.at("final"));
  trace.rho_posthoc = json_double(j, "rho_posthoc");
  trace.rho_violation = j.value("rho_violation", false);
  trace.subopt_approximate = j.value("subopt_approximate", false);
  if (j.contains("notes")) {
    for (const auto& n : j.at("notes")) trace.notes.push_back(n.get<std::string>());
  }
  return trace;
}

std::string trace_to_csv_text(const Trace& trace) {
  std::ostringstream out;
  out << "t,f,subopt,gamma,atom,dual_gap\n";
  out.precision(17);
  for (const auto& r : trace.steps) {
    out << r.t << ',' << r.f_value << ',' << r.subopt << ',' << r.gamma << ',' << r.atom_index
        << ',' << r.dual_gap << '\n';
  }
  return out.str();
}

}  // namespace pursuit
