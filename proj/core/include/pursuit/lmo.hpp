#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pursuit/atoms.hpp"

namespace pursuit {

enum class LmoMode { exact, approx_fw, approx_mp };

/// Realization of the approximate oracles: subsampled enumeration with a
/// seeded RNG, validated post hoc against full enumeration. A sample that
/// fails its contract is replaced by the exact answer.
struct LmoImpl {
  enum class Kind { full_enumeration, subsample };
  Kind kind = Kind::full_enumeration;
  double fraction = 1.0;  // in (0, 1]
  std::uint64_t seed = 0;
};

struct LmoConfig {
  LmoMode mode = LmoMode::exact;
  double delta = 1.0;  // quality parameter, in (0, 1]; 1 for exact
  LmoImpl impl;
  /// When false, subsampled answers are passed through unvalidated and
  /// certified_delta is left absent.
  bool validate = true;

  void check() const;  // throws std::invalid_argument on bad fields
};

struct LmoResult {
  int index = -1;       // atom index into the queried set
  Vector atom;          // equals set.atom(index)
  double inner = 0.0;   // <query, atom>
  /// Post-hoc measured quality of the returned atom, absent when
  /// validation is disabled.
  std::optional<double> certified_delta;
};

/// argmin over atoms z of <query, z>; ties broken by lowest stored index.
LmoResult lmo_exact(const AtomSet& set, const Vector& query);

/// Approximate oracle with the anchored multiplicative contract
///   <query, z~ - x_t>  <=  delta * min_z <query, z - x_t>.
/// When the exact minimum of <query, z - x_t> is >= 0 (zero gap), the exact
/// atom is returned. On contract failure of a subsampled candidate the exact
/// atom is substituted with certified_delta = 1.
LmoResult lmo_approx_fw(const AtomSet& set, const Vector& query, const Vector& x_t,
                        const LmoConfig& cfg);

/// Approximate oracle with the unanchored multiplicative contract
///   <query, z~>  <=  delta * <query, z*>,   z* = lmo_exact(set, query).
/// When <query, z*> >= 0 the exact atom is returned (the contract is
/// sign-degenerate there); validate-or-substitute policy as above.
LmoResult lmo_approx_mp(const AtomSet& set, const Vector& query, const LmoConfig& cfg);

/// Largest delta in (0, 1] for which `candidate` satisfies the mode's
/// contract, clamped to [0, 1]; 0 means no admissible delta exists.
/// Mode approx_fw requires `anchor` (the x_t of the contract). Throws a
/// "gap-sign degenerate" error when the exact optimum is nonnegative.
double measure_delta(const AtomSet& set, const Vector& query, const Vector& candidate,
                     LmoMode mode, const std::optional<Vector>& anchor = std::nullopt);

/// Config fragment parsing for solver JSON specs:
/// { "mode": "exact"|"approx-fw"|"approx-mp", "delta": 0.8,
///   "impl": { "type": "full-enumeration" } |
///           { "type": "subsample", "fraction": 0.5, "seed": 1 } }
LmoConfig lmo_config_from_json_text(const std::string& text);
std::string lmo_config_to_json_text(const LmoConfig& cfg, int indent = -1);

}  // namespace pursuit
