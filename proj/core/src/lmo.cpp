#include "pursuit/lmo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace pursuit {

void LmoConfig::check() const {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("LmoConfig: delta must lie in (0, 1]");
  }
  if (impl.kind == LmoImpl::Kind::subsample &&
      !(impl.fraction > 0.0 && impl.fraction <= 1.0)) {
    throw std::invalid_argument("LmoConfig: subsample fraction must lie in (0, 1]");
  }
}

namespace {

LmoResult make_result(const AtomSet& set, int index, const Vector& query) {
  LmoResult r;
  r.index = index;
  r.atom = set.atom(index);
  r.inner = query.dot(r.atom);
  return r;
}

/// Exact argmin of <query, atom> over a subset of indices (all if empty).
int argmin_inner(const AtomSet& set, const Vector& query, const std::vector<int>* subset) {
  // scale > 0 does not affect the argmin; work on raw columns.
  Vector inners = set.raw().transpose() * query;
  int best = -1;
  double best_val = std::numeric_limits<double>::infinity();
  if (subset == nullptr) {
    for (int i = 0; i < set.size(); ++i) {
      if (inners(i) < best_val) {
        best_val = inners(i);
        best = i;
      }
    }
  } else {
    for (int i : *subset) {
      if (inners(i) < best_val) {
        best_val = inners(i);
        best = i;
      }
    }
  }
  return best;
}

std::vector<int> draw_subsample(int n, double fraction, std::uint64_t seed) {
  int k = std::max(1, static_cast<int>(std::ceil(fraction * n)));
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());  // lowest-index tie-break within the sample
  return idx;
}

}  // namespace

LmoResult lmo_exact(const AtomSet& set, const Vector& query) {
  if (query.size() != set.dimension()) {
    throw std::invalid_argument("lmo_exact: query dimension mismatch");
  }
  return make_result(set, argmin_inner(set, query, nullptr), query);
}

LmoResult lmo_approx_fw(const AtomSet& set, const Vector& query, const Vector& x_t,
                        const LmoConfig& cfg) {
  if (cfg.mode != LmoMode::approx_fw) {
    throw std::invalid_argument("lmo_approx_fw: cfg.mode must be approx_fw");
  }
  cfg.check();
  LmoResult exact = lmo_exact(set, query);
  const double anchor_inner = query.dot(x_t);
  const double exact_gap = exact.inner - anchor_inner;  // min_z <query, z - x_t>
  // Zero-gap degenerate case: any atom satisfies the contract; return exact.
  if (exact_gap >= 0.0 || cfg.impl.kind == LmoImpl::Kind::full_enumeration) {
    exact.certified_delta = 1.0;
    return exact;
  }
  std::vector<int> sample = draw_subsample(set.size(), cfg.impl.fraction, cfg.impl.seed);
  LmoResult cand = make_result(set, argmin_inner(set, query, &sample), query);
  if (!cfg.validate) return cand;
  const double cand_gap = cand.inner - anchor_inner;
  if (cand_gap <= cfg.delta * exact_gap) {
    cand.certified_delta = std::clamp(cand_gap / exact_gap, cfg.delta, 1.0);
    return cand;
  }
  exact.certified_delta = 1.0;
  return exact;
}

LmoResult lmo_approx_mp(const AtomSet& set, const Vector& query, const LmoConfig& cfg) {
  if (cfg.mode != LmoMode::approx_mp) {
    throw std::invalid_argument("lmo_approx_mp: cfg.mode must be approx_mp");
  }
  cfg.check();
  LmoResult exact = lmo_exact(set, query);
  // Sign-degenerate case (Eq. contract flips meaning): return exact.
  if (exact.inner >= 0.0 || cfg.impl.kind == LmoImpl::Kind::full_enumeration) {
    exact.certified_delta = 1.0;
    return exact;
  }
  std::vector<int> sample = draw_subsample(set.size(), cfg.impl.fraction, cfg.impl.seed);
  LmoResult cand = make_result(set, argmin_inner(set, query, &sample), query);
  if (!cfg.validate) return cand;
  if (cand.inner <= cfg.delta * exact.inner) {
    cand.certified_delta = std::clamp(cand.inner / exact.inner, cfg.delta, 1.0);
    return cand;
  }
  exact.certified_delta = 1.0;
  return exact;
}

double measure_delta(const AtomSet& set, const Vector& query, const Vector& candidate,
                     LmoMode mode, const std::optional<Vector>& anchor) {
  LmoResult exact = lmo_exact(set, query);
  double exact_val = 0.0, cand_val = 0.0;
  if (mode == LmoMode::approx_mp) {
    exact_val = exact.inner;
    cand_val = query.dot(candidate);
  } else if (mode == LmoMode::approx_fw) {
    if (!anchor) {
      throw std::invalid_argument("measure_delta: approx_fw mode requires an anchor x_t");
    }
    const double a = query.dot(*anchor);
    exact_val = exact.inner - a;
    cand_val = query.dot(candidate) - a;
  } else {
    throw std::invalid_argument("measure_delta: mode must be approx_fw or approx_mp");
  }
  if (exact_val >= 0.0) {
    throw std::domain_error("measure_delta: gap-sign degenerate (exact optimum >= 0)");
  }
  return std::clamp(cand_val / exact_val, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using nlohmann::ordered_json;

namespace {

std::string mode_name(LmoMode m) {
  switch (m) {
    case LmoMode::exact: return "exact";
    case LmoMode::approx_fw: return "approx-fw";
    case LmoMode::approx_mp: return "approx-mp";
  }
  return "exact";
}

LmoMode mode_from_name(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "exact") return LmoMode::exact;
  if (s == "approx-fw") return LmoMode::approx_fw;
  if (s == "approx-mp") return LmoMode::approx_mp;
  throw std::invalid_argument("unknown lmo mode: " + s);
}

}  // namespace

LmoConfig lmo_config_from_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  LmoConfig cfg;
  cfg.mode = mode_from_name(j.value("mode", std::string("exact")));
  cfg.delta = j.value("delta", 1.0);
  cfg.validate = j.value("validate", true);
  if (j.contains("impl")) {
    const auto& impl = j.at("impl");
    std::string type = impl.value("type", std::string("full-enumeration"));
    std::replace(type.begin(), type.end(), '_', '-');
    if (type == "subsample") {
      cfg.impl.kind = LmoImpl::Kind::subsample;
      cfg.impl.fraction = impl.value("fraction", 1.0);
      cfg.impl.seed = impl.value("seed", std::uint64_t{0});
    } else if (type != "full-enumeration") {
      throw std::invalid_argument("unknown lmo impl type: " + type);
    }
  }
  cfg.check();
  return cfg;
}

std::string lmo_config_to_json_text(const LmoConfig& cfg, int indent) {
  ordered_json j;
  j["mode"] = mode_name(cfg.mode);
  j["delta"] = cfg.delta;
  if (cfg.impl.kind == LmoImpl::Kind::subsample) {
    j["impl"] = {{"type", "subsample"}, {"fraction", cfg.impl.fraction}, {"seed", cfg.impl.seed}};
  } else {
    j["impl"] = {{"type", "full-enumeration"}};
  }
  if (!cfg.validate) j["validate"] = false;
  return j.dump(indent);
}

}  // namespace pursuit
