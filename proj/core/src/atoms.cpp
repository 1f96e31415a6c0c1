#include "pursuit/atoms.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace pursuit {

namespace {

bool matches(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return (a - b).lpNorm<Eigen::Infinity>() <= kAtomMatchTol;
}

int find_atom(const Matrix& cols, int upto, const Vector& v) {
  for (int i = 0; i < upto; ++i) {
    if (matches(cols.col(i), v)) return i;
  }
  return -1;
}

}  // namespace

AtomSet::AtomSet(Matrix atoms, bool symmetric, double scale)
    : atoms_(std::move(atoms)), symmetric_(symmetric), scale_(scale) {
  if (atoms_.cols() < 1) throw std::invalid_argument("AtomSet: need n >= 1 atoms");
  if (!(scale_ > 0.0)) throw std::invalid_argument("AtomSet: scale must be positive");
  if (!atoms_.allFinite()) throw std::invalid_argument("AtomSet: atoms must be finite");
  if (symmetric_) {
    const int n = size();
    for (int i = 0; i < n; ++i) {
      Vector neg = -atoms_.col(i);
      if (find_atom(atoms_, n, neg) < 0) {
        throw std::invalid_argument("AtomSet: symmetric claim violated at atom " +
                                    std::to_string(i));
      }
    }
  }
}

bool AtomSet::contains(const Vector& v) const {
  Vector unscaled = v / scale_;
  return find_atom(atoms_, size(), unscaled) >= 0;
}

AtomSet symmetrize(const AtomSet& set) {
  const Matrix& in = set.raw();
  const int n = set.size();
  Matrix out(in.rows(), 2 * n);
  out.leftCols(n) = in;
  int m = n;
  for (int i = 0; i < n; ++i) {
    Vector neg = -in.col(i);
    if (find_atom(out, m, neg) < 0) {
      out.col(m++) = neg;
    }
  }
  return AtomSet(out.leftCols(m), /*symmetric=*/true, set.scale_factor());
}

AtomSet scale(const AtomSet& set, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("scale: alpha must be positive");
  return AtomSet(set.raw(), set.symmetric(), set.scale_factor() * alpha);
}

double radius(const AtomSet& set) {
  return set.scale_factor() * set.raw().colwise().norm().maxCoeff();
}

double diameter(const AtomSet& set) {
  const Matrix& a = set.raw();
  const int n = set.size();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      best = std::max(best, (a.col(i) - a.col(j)).norm());
    }
  }
  return set.scale_factor() * best;
}

HalfDictionary::HalfDictionary(Matrix atoms) : atoms_(std::move(atoms)) {
  if (atoms_.cols() < 1) throw std::invalid_argument("HalfDictionary: need n >= 1");
  if (!atoms_.allFinite()) throw std::invalid_argument("HalfDictionary: atoms must be finite");
  const int n = size();
  for (int i = 0; i < n; ++i) {
    Vector neg = -atoms_.col(i);
    if (find_atom(atoms_, n, neg) >= 0) {
      throw std::invalid_argument(
          "HalfDictionary: atom " + std::to_string(i) +
          " equals the negation of another atom");
    }
  }
}

HalfDictionary HalfDictionary::from_symmetric(const AtomSet& set) {
  if (!set.symmetric()) {
    throw std::invalid_argument("HalfDictionary::from_symmetric: set not symmetric");
  }
  const Matrix cols = set.scaled();
  const int n = set.size();
  std::vector<int> keep;
  std::vector<bool> consumed(n, false);
  for (int i = 0; i < n; ++i) {
    if (consumed[i]) continue;
    keep.push_back(i);
    Vector neg = -cols.col(i);
    for (int j = i + 1; j < n; ++j) {
      if (!consumed[j] && matches(cols.col(j), neg)) {
        consumed[j] = true;
        break;
      }
    }
  }
  Matrix half(cols.rows(), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) half.col(static_cast<int>(k)) = cols.col(keep[k]);
  return HalfDictionary(half);
}

AtomSet HalfDictionary::symmetrized() const {
  Matrix out(atoms_.rows(), 2 * atoms_.cols());
  out.leftCols(atoms_.cols()) = atoms_;
  out.rightCols(atoms_.cols()) = -atoms_;
  return AtomSet(out, /*symmetric=*/true);
}

AtomSet make_l1_vertices(int d) {
  if (d < 1) throw std::invalid_argument("make_l1_vertices: d >= 1 required");
  Matrix a = Matrix::Zero(d, 2 * d);
  for (int i = 0; i < d; ++i) {
    a(i, i) = 1.0;
    a(i, d + i) = -1.0;
  }
  return AtomSet(a, /*symmetric=*/true);
}

AtomSet make_theta_pair(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("make_theta_pair: theta must be positive");
  Matrix a(2, 4);
  a.col(0) << 1.0, 0.0;
  a.col(1) << std::cos(theta), std::sin(theta);
  a.col(2) = -a.col(0);
  a.col(3) = -a.col(1);
  return AtomSet(a, /*symmetric=*/true);
}

AtomSet make_random_unit_sphere(int d, int n, std::uint64_t seed, bool symmetrized) {
  if (d < 1 || n < 1) throw std::invalid_argument("make_random_unit_sphere: d, n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(d, n);
  for (int j = 0; j < n; ++j) {
    Vector v(d);
    do {
      for (int i = 0; i < d; ++i) v(i) = gauss(rng);
    } while (v.norm() < 1e-8);
    a.col(j) = v / v.norm();
  }
  AtomSet set(a);
  return symmetrized ? symmetrize(set) : set;
}

AtomSet make_simplex_vertices(int d) {
  if (d < 1) throw std::invalid_argument("make_simplex_vertices: d >= 1 required");
  return AtomSet(Matrix::Identity(d, d));
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using nlohmann::ordered_json;

std::string atom_set_to_json_text(const AtomSet& set, int indent) {
  ordered_json j;
  j["dimension"] = set.dimension();
  j["symmetric"] = set.symmetric();
  j["scale"] = set.scale_factor();
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < set.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < set.dimension(); ++k) row.push_back(set.raw()(k, i));
    rows.push_back(std::move(row));
  }
  j["atoms"] = std::move(rows);
  return j.dump(indent);
}

namespace {

AtomSet atom_set_from_json(const ordered_json& j) {
  if (j.contains("generator")) {
    const std::string name = j.at("generator").get<std::string>();
    if (name == "l1-vertices") return make_l1_vertices(j.at("dimension").get<int>());
    if (name == "theta-pair") return make_theta_pair(j.at("theta").get<double>());
    if (name == "random-unit-sphere") {
      return make_random_unit_sphere(j.at("dimension").get<int>(), j.at("count").get<int>(),
                                     j.value("seed", std::uint64_t{0}),
                                     j.value("symmetrized", false));
    }
    if (name == "simplex-vertices") return make_simplex_vertices(j.at("dimension").get<int>());
    throw std::invalid_argument("unknown atom generator: " + name);
  }
  const int d = j.at("dimension").get<int>();
  const auto& rows = j.at("atoms");
  if (!rows.is_array() || rows.empty()) {
    throw std::invalid_argument("atom set document: \"atoms\" must be a nonempty array");
  }
  Matrix a(d, static_cast<int>(rows.size()));
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != d) {
      throw std::invalid_argument("atom set document: atom " + std::to_string(i) +
                                  " does not match dimension");
    }
    for (int k = 0; k < d; ++k) a(k, i) = row.at(k).get<double>();
    ++i;
  }
  return AtomSet(a, j.value("symmetric", false), j.value("scale", 1.0));
}

}  // namespace

AtomSet atom_set_from_json_text(const std::string& text) {
  return atom_set_from_json(ordered_json::parse(text));
}

}  // namespace pursuit
