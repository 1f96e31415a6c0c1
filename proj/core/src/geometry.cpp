#include "pursuit/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "internal.hpp"
#include "pursuit/solvers.hpp"

namespace pursuit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix orthonormal_span_basis(const Matrix& atoms) {
  Eigen::ColPivHouseholderQR<Matrix> qr(atoms);
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  if (rank == 0) throw std::domain_error("geometry: all atoms are zero");
  return Matrix(qr.householderQ()).leftCols(rank);
}

/// max_i <s_i, u> over atom columns s (span coordinates).
double width_in_span(const Matrix& s, const Vector& u) {
  return (s.transpose() * u).maxCoeff();
}

int width_argmax(const Matrix& s, const Vector& u) {
  int idx = 0;
  (s.transpose() * u).maxCoeff(&idx);
  return idx;
}

}  // namespace

double directional_width(const AtomSet& set, const Vector& d) {
  if (d.size() != set.dimension()) {
    throw std::invalid_argument("directional_width: dimension mismatch");
  }
  double norm = d.norm();
  if (!(norm > 0.0)) throw std::domain_error("directional_width: d must be nonzero");
  return (set.scaled().transpose() * (d / norm)).maxCoeff();
}

MdwEstimate mdw(const AtomSet& set, int restarts, std::uint64_t seed) {
  const Matrix atoms = set.scaled();
  const Matrix basis = orthonormal_span_basis(atoms);
  const int r = static_cast<int>(basis.cols());
  const Matrix s = basis.transpose() * atoms;  // atoms in span coordinates
  const int n = static_cast<int>(s.cols());

  MdwEstimate est;
  est.restarts = restarts;
  est.bracket_lo = set.symmetric() ? 0.0 : -radius(set);

  if (r == 1) {
    Vector u = Vector::Ones(1);
    est.value = std::min(width_in_span(s, u), width_in_span(s, -u));
    est.method = "1d-exact";
    est.bracket_hi = est.value;
    return est;
  }

  if (r == 2) {
    // dense angular sweep, then golden-section refinement of the best bracket
    const int sweeps = 10000;
    double best_phi = 0.0, best = kInf;
    for (int k = 0; k < sweeps; ++k) {
      double phi = 2.0 * M_PI * k / sweeps;
      Vector u(2);
      u << std::cos(phi), std::sin(phi);
      double wv = width_in_span(s, u);
      if (wv < best) {
        best = wv;
        best_phi = phi;
      }
    }
    double step = 2.0 * M_PI / sweeps;
    auto wphi = [&](double phi) {
      Vector u(2);
      u << std::cos(phi), std::sin(phi);
      return width_in_span(s, u);
    };
    double refined = detail::golden_section_minimize(wphi, best_phi - step, best_phi + step, 1e-13);
    est.value = std::min(best, wphi(refined));
    est.method = "2d-sweep";
    est.bracket_hi = est.value;
    est.bracket_lo = std::max(est.bracket_lo, est.value - 1e-9);
    return est;
  }

  // General path: projected subgradient descent from many starts, followed
  // by a min-norm-point polish of the near-active atoms.
  std::mt19937_64 rng(detail::mix_seed(seed, 0x6d647746u));
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto evaluate = [&](const Vector& u) { return width_in_span(s, u); };

  auto polish = [&](Vector u, double& best_val) {
    for (int round = 0; round < 3; ++round) {
      double w0 = evaluate(u);
      if (!(w0 > 0.0)) break;  // min-norm stationarity needs a positive width
      bool improved = false;
      for (double tol : {1e-2, 1e-5, 1e-8}) {
        std::vector<int> active;
        Vector inner = s.transpose() * u;
        for (int i = 0; i < n; ++i) {
          if (inner(i) >= w0 - tol * std::max(1.0, std::abs(w0))) active.push_back(i);
        }
        if (active.empty()) continue;
        Matrix m(r, static_cast<int>(active.size()));
        for (std::size_t j = 0; j < active.size(); ++j) {
          m.col(static_cast<int>(j)) = s.col(active[j]);
        }
        HullProjection proj = project_onto_convex_hull(m, Vector::Zero(r));
        double qn = proj.point.norm();
        if (qn <= 1e-14) continue;
        Vector cand = proj.point / qn;
        double wv = evaluate(cand);
        if (wv < best_val) {
          best_val = wv;
          u = cand;
          improved = true;
        }
      }
      if (!improved) break;
    }
    return best_val;
  };

  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(restarts) + 2 * n);
  for (int k = 0; k < restarts; ++k) {
    Vector u(r);
    for (int i = 0; i < r; ++i) u(i) = gauss(rng);
    double norm = u.norm();
    if (norm < 1e-12) {
      u.setZero();
      u(0) = 1.0;
      norm = 1.0;
    }
    starts.push_back(u / norm);
  }
  for (int i = 0; i < n; ++i) {
    double norm = s.col(i).norm();
    if (norm > 1e-12) {
      starts.push_back(s.col(i) / norm);
      starts.push_back(-s.col(i) / norm);
    }
  }

  double best = kInf, worst = -kInf;
  for (const Vector& start : starts) {
    Vector u = start;
    double local = evaluate(u);
    const int iters = 300;
    for (int k = 1; k <= iters; ++k) {
      int i = width_argmax(s, u);
      double eta = 0.25 / std::sqrt(static_cast<double>(k));
      Vector v = u - eta * s.col(i);
      double norm = v.norm();
      if (norm < 1e-14) continue;
      u = v / norm;
      local = std::min(local, evaluate(u));
    }
    polish(u, local);
    best = std::min(best, local);
    worst = std::max(worst, local);
  }
  est.value = best;
  est.method = "multi-start";
  est.dispersion = worst - best;
  est.bracket_hi = best;
  return est;
}

double effective_inradius(const AtomSet& set, int restarts, std::uint64_t seed) {
  if (!set.symmetric()) {
    throw std::invalid_argument("unsupported: non-symmetric inradius");
  }
  return mdw(set, restarts, seed).value;
}

double cumulative_coherence(const HalfDictionary& half, int m) {
  const int n = half.size();
  if (m < 1 || m >= n) {
    throw std::invalid_argument("cumulative_coherence: require 1 <= m < n");
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(half.atom(i).norm() - 1.0) > 1e-10) {
      throw std::invalid_argument("cumulative_coherence: atoms must be unit norm");
    }
  }
  const Matrix g = (half.atoms().transpose() * half.atoms()).cwiseAbs();
  double best = 0.0;
  std::vector<double> off;
  off.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    off.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) off.push_back(g(i, j));
    }
    // the worst m-subset for atom i is its m largest off-diagonal entries
    std::partial_sort(off.begin(), off.begin() + m, off.end(), std::greater<double>());
    best = std::max(best, std::accumulate(off.begin(), off.begin() + m, 0.0));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Curvature constants
// ---------------------------------------------------------------------------

namespace {

Vector random_hull_point(const Matrix& atoms, std::mt19937_64& rng) {
  // Dirichlet(1,...,1) weights over atoms
  std::exponential_distribution<double> expo(1.0);
  Vector w(atoms.cols());
  for (int i = 0; i < atoms.cols(); ++i) w(i) = expo(rng);
  w /= w.sum();
  return atoms * w;
}

}  // namespace

CurvatureEstimate curvature_Cf(const SmoothObjective& obj, const AtomSet& set,
                               int hull_samples, std::uint64_t seed) {
  CurvatureEstimate est;
  double diam = diameter(set);
  est.ceiling = obj.smoothness() * diam * diam;
  const Matrix atoms = set.scaled();
  const int n = static_cast<int>(atoms.cols());
  if (const auto* quad = dynamic_cast<const QuadraticObjective*>(&obj)) {
    // sup over x attained at vertices: value is convex in x
    Matrix qa = quad->Q() * atoms;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Vector d = atoms.col(i) - atoms.col(j);
        best = std::max(best, d.dot(qa.col(i) - qa.col(j)));
      }
    }
    est.value = best;
    est.exact = true;
    return est;
  }
  std::mt19937_64 rng(detail::mix_seed(seed, 0xcf00u));
  double best = 0.0;
  long count = 0;
  for (int xs = 0; xs < hull_samples; ++xs) {
    Vector x = random_hull_point(atoms, rng);
    double fx = obj.value(x);
    Vector gx = obj.gradient(x);
    for (int i = 0; i < n; ++i) {
      Vector dir = atoms.col(i) - x;
      for (int k = 0; k <= 12; ++k) {
        double gamma = std::ldexp(1.0, -k);  // 2^-k
        Vector y = x + gamma * dir;
        double d = obj.value(y) - fx - (y - x).dot(gx);
        best = std::max(best, 2.0 * d / (gamma * gamma));
        ++count;
      }
    }
  }
  est.value = best;
  est.exact = false;
  est.samples = count;
  return est;
}

CurvatureEstimate curvature_CfMP(const SmoothObjective& obj, const AtomSet& set, double rho,
                                 int hull_samples, std::uint64_t seed) {
  if (!(rho > 0.0)) throw std::invalid_argument("curvature_CfMP: rho must be positive");
  CurvatureEstimate est;
  double rad = radius(set);
  est.ceiling = obj.smoothness() * rho * rho * rad * rad;
  const Matrix atoms = set.scaled();
  const int n = static_cast<int>(atoms.cols());
  if (const auto* quad = dynamic_cast<const QuadraticObjective*>(&obj)) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      best = std::max(best, atoms.col(i).dot(quad->Q() * atoms.col(i)));
    }
    est.value = rho * rho * best;
    est.exact = true;
    return est;
  }
  std::mt19937_64 rng(detail::mix_seed(seed, 0xcf313370u));
  double best = 0.0;
  long count = 0;
  for (int xs = 0; xs < hull_samples; ++xs) {
    Vector x = rho * random_hull_point(atoms, rng);
    double fx = obj.value(x);
    Vector gx = obj.gradient(x);
    for (int i = 0; i < n; ++i) {
      Vector dir = rho * atoms.col(i);
      for (int k = 0; k <= 12; ++k) {
        double gamma = std::ldexp(1.0, -k);
        Vector y = x + gamma * dir;
        double d = obj.value(y) - fx - (y - x).dot(gx);
        best = std::max(best, 2.0 * d / (gamma * gamma));
        ++count;
      }
    }
  }
  est.value = best;
  est.exact = false;
  est.samples = count;
  return est;
}

MuFmpEstimate strong_convexity_muFMP(const SmoothObjective& obj, const AtomSet& set, double rho,
                                     int samples, std::uint64_t seed,
                                     std::optional<double> mdw_hint) {
  if (!(rho > 0.0)) throw std::invalid_argument("strong_convexity_muFMP: rho must be positive");
  auto mu = obj.strong_convexity();
  if (!mu || !(*mu > 0.0)) {
    throw std::invalid_argument("strong_convexity_muFMP: objective must declare mu > 0");
  }
  const Matrix atoms = set.scaled();
  std::mt19937_64 rng(detail::mix_seed(seed, 0x330fu));
  double best = kInf;
  long admissible = 0;
  for (int k = 0; k < samples; ++k) {
    Vector x = rho * random_hull_point(atoms, rng);
    Vector xs = rho * random_hull_point(atoms, rng);
    Vector g = obj.gradient(x);
    double gap = g.dot(xs - x);
    if (!(gap < -1e-14)) continue;  // zero-gap pairs are skipped
    // s(x) over the rho-scaled set
    LmoResult z = lmo_exact(set, g);
    double denom = -rho * z.inner;  // <-grad, rho z>
    if (!(denom > 0.0)) continue;
    double gamma = -gap / denom;
    double d = linearization_gap(obj, x, xs);
    best = std::min(best, 2.0 * d / (gamma * gamma));
    ++admissible;
  }
  if (admissible == 0) {
    throw std::runtime_error("strong_convexity_muFMP: no admissible sample pairs");
  }
  double width = mdw_hint ? *mdw_hint : mdw(set).value;
  MuFmpEstimate est;
  est.sampled = best;
  est.floor = *mu * rho * rho * width * width;
  est.admissible = admissible;
  return est;
}

// ---------------------------------------------------------------------------
// Atomic norm
// ---------------------------------------------------------------------------

bool in_scaled_hull(const AtomSet& set, const Vector& x, double c, double dist_tol) {
  if (!(c > 0.0)) return x.norm() == 0.0;
  HullProjection proj = project_onto_convex_hull(c * set.scaled(), x);
  return proj.residual <= dist_tol;
}

double atomic_norm(const AtomSet& set, const Vector& x, std::optional<double> mdw_hint) {
  if (!set.symmetric()) {
    throw std::invalid_argument("atomic_norm: set must be symmetric");
  }
  if (x.size() != set.dimension()) throw std::invalid_argument("atomic_norm: dimension mismatch");
  double xn = x.norm();
  if (xn == 0.0) return 0.0;

  const Matrix atoms = set.scaled();
  Matrix basis = orthonormal_span_basis(atoms);
  double span_res = (x - basis * (basis.transpose() * x)).norm();
  if (span_res > 1e-9 * std::max(1.0, xn)) return kInf;

  double width = mdw_hint ? *mdw_hint : mdw(set).value;
  if (!(width > 0.0)) {
    throw std::domain_error("atomic_norm: mdw must be positive (0 in relative interior)");
  }
  double hi = set.dimension() * xn / width;
  Vector warm;  // reused across membership tests
  auto member = [&](double c) {
    HullProjection proj = project_onto_convex_hull(c * atoms, x, 1e-10, 100000,
                                                   warm.size() ? &warm : nullptr);
    warm = proj.weights;
    return proj.residual <= 1e-9;
  };
  // the initial bracket is only estimator-backed; expand until it contains x
  int guard = 0;
  while (!member(hi)) {
    hi *= 2.0;
    if (++guard > 60) {
      throw std::runtime_error("atomic_norm: bracket expansion failed");
    }
  }
  double lo = 0.0;
  while (hi - lo > 1e-9 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (member(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Rate bounds
// ---------------------------------------------------------------------------

RateBound::RateBound(RateKind kind, std::map<std::string, double> params)
    : kind_(kind), params_(std::move(params)) {
  // validate eagerly so missing parameters surface at construction
  switch (kind_) {
    case RateKind::sublinear_fw:
    case RateKind::sublinear_mp:
      param("delta");
      param("eps0");
      effective_constant();
      break;
    case RateKind::linear_mp:
      param("delta");
      param("mu");
      param("mdw");
      param("L");
      param("radius");
      break;
    case RateKind::linear_affine:
      param("delta");
      param("muFMP");
      param("CfMP");
      break;
    case RateKind::lower_bound:
      param("L");
      param("mu");
      break;
  }
}

double RateBound::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw std::domain_error("RateBound: missing parameter \"" + name + "\"");
  }
  return it->second;
}

bool RateBound::has(const std::string& name) const { return params_.count(name) > 0; }

double RateBound::effective_constant() const {
  if (kind_ == RateKind::sublinear_fw) {
    if (has("Cf")) return param("Cf");
    double diam = param("diam");
    return param("L") * diam * diam;
  }
  if (kind_ == RateKind::sublinear_mp) {
    if (has("CfMP")) return param("CfMP");
    double rho = param("rho");
    double rad = param("radius");
    return param("L") * rho * rho * rad * rad;
  }
  throw std::domain_error("RateBound: no sublinear constant for this kind");
}

double RateBound::sublinear(int t) const {
  double delta = param("delta");
  double eps0 = param("eps0");
  double c = effective_constant();
  if (kind_ == RateKind::sublinear_fw) {
    return 2.0 * (c / delta + eps0) / (delta * t + 2.0);
  }
  if (kind_ == RateKind::sublinear_mp) {
    return 2.0 * ((2.0 / delta) * c + eps0) / ((delta / 2.0) * t + 2.0);
  }
  throw std::domain_error("RateBound::sublinear: not a sublinear kind");
}

double RateBound::linear_factor() const {
  double delta = param("delta");
  if (kind_ == RateKind::linear_mp) {
    double w = param("mdw");
    double rad = param("radius");
    return 1.0 - delta * delta * param("mu") * w * w / (param("L") * rad * rad);
  }
  if (kind_ == RateKind::linear_affine) {
    return 1.0 - delta * delta * param("muFMP") / param("CfMP");
  }
  throw std::domain_error("RateBound::linear_factor: not a linear kind");
}

double RateBound::lower_floor(double width, double atom_norm) const {
  if (kind_ != RateKind::lower_bound) {
    throw std::domain_error("RateBound::lower_floor: not a lower-bound kind");
  }
  double l = param("L");
  double mu = param("mu");
  return 1.0 - (width * width) / (atom_norm * atom_norm) * (2.0 * l - mu) / mu;
}

RateBound rate_bound(RateKind kind, std::map<std::string, double> params) {
  return RateBound(kind, std::move(params));
}

// ---------------------------------------------------------------------------
// Geometry report
// ---------------------------------------------------------------------------

GeometryReport build_geometry_report(const AtomSet& set, const SmoothObjective* obj,
                                     const GeometryOptions& opts) {
  GeometryReport rep;
  rep.dimension = set.dimension();
  rep.atom_count = set.size();
  rep.symmetric = set.symmetric();
  rep.radius = radius(set);
  rep.diameter = diameter(set);
  rep.mdw = mdw(set, opts.mdw_restarts, opts.seed);
  if (opts.inradius) {
    rep.effective_inradius = effective_inradius(set, opts.mdw_restarts, opts.seed);
  }
  if (opts.coherence_m) {
    HalfDictionary half = HalfDictionary::from_symmetric(set);
    rep.coherence_m = *opts.coherence_m;
    rep.coherence_value = cumulative_coherence(half, *opts.coherence_m);
  }
  if (obj != nullptr) {
    rep.Cf = curvature_Cf(*obj, set, 64, opts.seed);
    rep.CfMP = curvature_CfMP(*obj, set, opts.rho, 64, opts.seed);
    if (obj->strong_convexity().value_or(0.0) > 0.0) {
      rep.muFMP = strong_convexity_muFMP(*obj, set, opts.rho, 10000, opts.seed, rep.mdw.value);
    } else {
      rep.notes.push_back("muFMP skipped: objective declares no strong convexity");
    }
  }
  return rep;
}

std::string geometry_report_to_json_text(const GeometryReport& rep, int indent) {
  nlohmann::ordered_json j;
  j["dimension"] = rep.dimension;
  j["atom_count"] = rep.atom_count;
  j["symmetric"] = rep.symmetric;
  j["radius"] = rep.radius;
  j["diameter"] = rep.diameter;
  j["mdw"] = {{"value", rep.mdw.value},   {"method", rep.mdw.method},
              {"restarts", rep.mdw.restarts}, {"dispersion", rep.mdw.dispersion},
              {"bracket", {rep.mdw.bracket_lo, rep.mdw.bracket_hi}}};
  j["effective_inradius"] =
      rep.effective_inradius ? nlohmann::ordered_json(*rep.effective_inradius)
                             : nlohmann::ordered_json(nullptr);
  if (rep.coherence_m) {
    j["coherence"] = {{"m", *rep.coherence_m}, {"value", *rep.coherence_value}};
  } else {
    j["coherence"] = nullptr;
  }
  auto curv = [](const std::optional<CurvatureEstimate>& c) {
    if (!c) return nlohmann::ordered_json(nullptr);
    return nlohmann::ordered_json{{"value", c->value},
                                  {"exact", c->exact},
                                  {"ceiling", c->ceiling},
                                  {"samples", c->samples}};
  };
  j["Cf"] = curv(rep.Cf);
  j["CfMP"] = curv(rep.CfMP);
  if (rep.muFMP) {
    j["muFMP"] = {{"sampled", rep.muFMP->sampled},
                  {"floor", rep.muFMP->floor},
                  {"admissible", rep.muFMP->admissible}};
  } else {
    j["muFMP"] = nullptr;
  }
  j["notes"] = rep.notes;
  return j.dump(indent);
}

}  // namespace pursuit
