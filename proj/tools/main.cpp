// Command-line front end: binds JSON configs to the solver, geometry, and
// experiment library calls. Exit codes: 0 success, 1 solver error or failed
// verdict, 2 configuration/schema error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pursuit/atoms.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/harness.hpp"
#include "pursuit/objectives.hpp"
#include "pursuit/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pursuit;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

ordered_json parse_json(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

/// Resolves an atoms entry: inline document, generator document, or
/// {"file": path} relative to base_dir.
AtomSet resolve_atoms(const ordered_json& node, const fs::path& base_dir) {
  if (node.is_object() && node.contains("file")) {
    fs::path p = base_dir / node.at("file").get<std::string>();
    return atom_set_from_json_text(read_file(p));
  }
  return atom_set_from_json_text(node.dump());
}

std::unique_ptr<SmoothObjective> resolve_objective(const ordered_json& node,
                                                   const fs::path& base_dir) {
  if (node.is_object() && node.contains("file")) {
    fs::path p = base_dir / node.at("file").get<std::string>();
    return objective_from_json_text(read_file(p));
  }
  return objective_from_json_text(node.dump());
}

Vector resolve_x0(const ordered_json& config, const AtomSet& set, Algorithm alg) {
  if (config.contains("x0")) {
    const auto& node = config.at("x0");
    if (node.is_string()) {
      if (node.get<std::string>() == "zero") return Vector::Zero(set.dimension());
      throw ConfigError("x0: unknown keyword \"" + node.get<std::string>() + "\"");
    }
    if (node.is_object() && node.contains("atom")) {
      int i = node.at("atom").get<int>();
      if (i < 0 || i >= set.size()) throw ConfigError("x0: atom index out of range");
      return set.atom(i);
    }
    if (node.is_array()) {
      Vector v(static_cast<int>(node.size()));
      int i = 0;
      for (const auto& e : node) v(i++) = e.get<double>();
      return v;
    }
    throw ConfigError("x0: expected array, \"zero\", or {\"atom\": i}");
  }
  return is_fw_family(alg) ? set.atom(0) : Vector::Zero(set.dimension());
}

int run_solve(const std::string& config_path, std::string out_dir,
              std::optional<std::uint64_t> seed_flag, bool reference_subopt) {
  fs::path cfg_path(config_path);
  ordered_json config = parse_json(read_file(cfg_path), "run config");
  fs::path base = cfg_path.has_parent_path() ? cfg_path.parent_path() : fs::path(".");

  if (!config.contains("atoms")) throw ConfigError("run config: missing \"atoms\"");
  if (!config.contains("objective")) throw ConfigError("run config: missing \"objective\"");
  if (!config.contains("solver")) throw ConfigError("run config: missing \"solver\"");

  AtomSet set = resolve_atoms(config.at("atoms"), base);
  auto obj = resolve_objective(config.at("objective"), base);
  SolverSpec spec;
  try {
    spec = solver_spec_from_json_text(config.at("solver").dump());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("solver spec: ") + e.what());
  }
  if (config.contains("seed")) spec.seed = config.at("seed").get<std::uint64_t>();
  if (seed_flag) spec.seed = *seed_flag;
  Vector x0 = resolve_x0(config, set, spec.algorithm);
  if (out_dir.empty()) out_dir = config.value("out", std::string("."));

  // Snapshot of the fully resolved configuration for the trace.
  ordered_json snapshot;
  snapshot["atoms"] = parse_json(atom_set_to_json_text(set), "atoms snapshot");
  snapshot["objective"] = parse_json(objective_to_json_text(*obj), "objective snapshot");
  snapshot["solver"] = parse_json(solver_spec_to_json_text(spec), "solver snapshot");
  ordered_json x0_json = ordered_json::array();
  for (int i = 0; i < x0.size(); ++i) x0_json.push_back(x0(i));
  snapshot["x0"] = std::move(x0_json);

  RunOptions opts;
  opts.config_json = snapshot.dump();
  opts.reference_subopt_if_needed = reference_subopt;
  Trace trace = run(spec, *obj, set, x0, opts);

  fs::path dir(out_dir);
  write_file(dir / "trace.json", trace_to_json_text(trace, 2) + "\n");
  write_file(dir / "trace.csv", trace_to_csv_text(trace));
  const auto& last = trace.steps.back();
  std::cout << "wrote " << (dir / "trace.json").string() << " (" << trace.steps.size()
            << " records); final f = " << last.f_value << ", subopt = " << last.subopt
            << ", rho_posthoc = " << trace.rho_posthoc << "\n";
  return 0;
}

int run_geometry(const std::string& atoms_path, const std::string& generator, int gen_d,
                 double gen_theta, int gen_count, bool gen_symmetrized,
                 const std::string& objective_path, const std::string& out_path,
                 int mdw_restarts, std::uint64_t seed, int coherence_m, bool inradius,
                 double rho) {
  std::optional<AtomSet> set;
  if (!atoms_path.empty()) {
    set = atom_set_from_json_text(read_file(atoms_path));
  } else if (!generator.empty()) {
    ordered_json g;
    g["generator"] = generator;
    g["dimension"] = gen_d;
    g["theta"] = gen_theta;
    g["count"] = gen_count;
    g["seed"] = seed;
    g["symmetrized"] = gen_symmetrized;
    set = atom_set_from_json_text(g.dump());
  } else {
    throw ConfigError("geometry: provide --atoms or --generator");
  }
  std::unique_ptr<SmoothObjective> obj;
  if (!objective_path.empty()) obj = objective_from_json_text(read_file(objective_path));

  GeometryOptions opts;
  opts.mdw_restarts = mdw_restarts;
  opts.seed = seed;
  opts.inradius = inradius;
  opts.rho = rho;
  if (coherence_m > 0) opts.coherence_m = coherence_m;
  GeometryReport rep = build_geometry_report(*set, obj.get(), opts);
  std::string text = geometry_report_to_json_text(rep) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

void write_experiment_outputs(const ExperimentReport& report, const std::string& out_dir) {
  for (const auto& v : report.verdicts) {
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << v.name << "  (" << v.detail << ")\n";
  }
  if (!out_dir.empty()) {
    fs::path dir(out_dir);
    write_file(dir / (report.name + "-report.json"),
               experiment_report_to_json_text(report) + "\n");
    for (const auto& [name, trace] : report.traces) {
      write_file(dir / (name + ".csv"), trace_to_csv_text(trace));
    }
    std::cout << "wrote " << (dir / (report.name + "-report.json")).string() << "\n";
  }
}

int run_experiment(const std::string& name, const std::string& out_dir, std::uint64_t seed,
                   int d, int T, int inits, int jobs, int dicts) {
  ExperimentReport report;
  if (name == "appendix-a") {
    report = run_appendix_a(appendix_a_default_theta_grid(), inits, seed, T, jobs);
  } else if (name == "corollary2") {
    report = run_corollary2(d, seed);
  } else if (name == "fw-to-mp") {
    report = run_fw_to_mp(dyadic_grid(4, 14), default_fw_to_mp_instance(), seed);
  } else if (name == "envelope") {
    report = run_envelope_suite(seed, jobs);
  } else if (name == "linear-rate") {
    report = run_linear_rate_suite(seed, jobs);
  } else if (name == "coherence-mdw") {
    report = run_coherence_mdw(dicts, seed, jobs);
  } else {
    throw ConfigError("unknown experiment name: " + name);
  }
  write_experiment_outputs(report, out_dir);
  return report.pass() ? 0 : 1;
}

int run_verify(const std::string& trace_path, const std::string& kind,
               std::optional<double> delta_flag, std::optional<double> rho_flag,
               int mdw_restarts, const std::string& out_path) {
  Trace trace = trace_from_json_text(read_file(trace_path));
  if (trace.config_json.empty()) throw ConfigError("verify: trace carries no config snapshot");
  ordered_json config = parse_json(trace.config_json, "trace config");
  if (!config.contains("atoms") || !config.contains("objective")) {
    throw ConfigError("verify: trace config lacks atoms/objective documents");
  }
  AtomSet set = atom_set_from_json_text(config.at("atoms").dump());
  auto obj = objective_from_json_text(config.at("objective").dump());
  SolverSpec spec = solver_spec_from_json_text(config.at("solver").dump());

  double delta = delta_flag.value_or(spec.lmo.delta);
  if (trace.steps.empty()) throw ConfigError("verify: empty trace");
  double eps0 = trace.record(0).subopt;
  double rho = rho_flag.value_or(trace.rho_posthoc);

  auto mdw_used = [&]() {
    MdwEstimate est = mdw(set, mdw_restarts, spec.seed);
    double w = est.value;
    for (const auto& r : trace.steps) {
      if (!std::isnan(r.width_neg_grad)) w = std::min(w, r.width_neg_grad);
    }
    return w;
  };
  auto need_mu = [&]() {
    auto mu = obj->strong_convexity();
    if (!mu || !(*mu > 0.0)) throw ConfigError("verify: objective declares no mu > 0");
    return *mu;
  };

  std::optional<RateBound> bound;
  if (kind == "thm1") {
    bound = rate_bound(RateKind::sublinear_fw, {{"delta", delta},
                                                {"eps0", eps0},
                                                {"L", obj->smoothness()},
                                                {"diam", diameter(set)}});
  } else if (kind == "thm6") {
    CurvatureEstimate cf = curvature_Cf(*obj, set);
    bound = rate_bound(RateKind::sublinear_fw,
                       {{"delta", delta}, {"eps0", eps0}, {"Cf", cf.value}});
  } else if (kind == "thm2") {
    if (std::isnan(rho)) throw ConfigError("verify: thm2 needs --rho or a trace rho_posthoc");
    bound = rate_bound(RateKind::sublinear_mp, {{"delta", delta},
                                                {"eps0", eps0},
                                                {"L", obj->smoothness()},
                                                {"rho", rho},
                                                {"radius", radius(set)}});
  } else if (kind == "thm7") {
    if (std::isnan(rho)) throw ConfigError("verify: thm7 needs --rho or a trace rho_posthoc");
    CurvatureEstimate cfmp = curvature_CfMP(*obj, set, rho);
    bound = rate_bound(RateKind::sublinear_mp,
                       {{"delta", delta}, {"eps0", eps0}, {"CfMP", cfmp.value}});
  } else if (kind == "thm3") {
    bound = rate_bound(RateKind::linear_mp, {{"delta", delta},
                                             {"mu", need_mu()},
                                             {"L", obj->smoothness()},
                                             {"mdw", mdw_used()},
                                             {"radius", radius(set)}});
  } else if (kind == "thm8") {
    if (std::isnan(rho)) throw ConfigError("verify: thm8 needs --rho or a trace rho_posthoc");
    CurvatureEstimate cfmp = curvature_CfMP(*obj, set, rho);
    double w = mdw_used();
    bound = rate_bound(RateKind::linear_affine, {{"delta", delta},
                                                 {"muFMP", need_mu() * rho * rho * w * w},
                                                 {"CfMP", cfmp.value}});
  } else if (kind == "thm4") {
    bound = rate_bound(RateKind::lower_bound, {{"L", obj->smoothness()}, {"mu", need_mu()}});
  } else {
    throw ConfigError("verify: unknown kind \"" + kind +
                      "\" (expected thm1|thm2|thm3|thm4|thm6|thm7|thm8)");
  }

  ExperimentReport report = check_envelope(trace, *bound);
  report.name = "verify-" + kind;
  for (const auto& v : report.verdicts) {
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << kind << " " << v.name << "  ("
              << v.detail << ")\n";
  }
  if (!out_path.empty()) {
    write_file(out_path, experiment_report_to_json_text(report) + "\n");
  }
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy optimization over finite atom dictionaries: solvers, dictionary "
               "geometry, and convergence-rate verification"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "run a solver from a JSON config");
  std::string solve_config, solve_out;
  std::optional<std::uint64_t> solve_seed;
  bool solve_reference = false;
  solve->add_option("--config", solve_config, "run config JSON")->required();
  solve->add_option("--out", solve_out, "output directory");
  solve->add_option("--seed", solve_seed, "override the run seed");
  solve->add_flag("--reference-subopt", solve_reference,
                  "derive suboptimality from a 10x reference run when no minimizer is known");

  // geometry
  auto* geom = app.add_subcommand("geometry", "analyze an atom set");
  std::string geom_atoms, geom_generator, geom_objective, geom_out;
  int geom_d = 2, geom_count = 8, geom_restarts = 200, geom_coherence_m = 0;
  double geom_theta = M_PI / 2.0, geom_rho = 1.0;
  bool geom_inradius = false, geom_symmetrized = false;
  std::uint64_t geom_seed = 0;
  geom->add_option("--atoms", geom_atoms, "atom set JSON document");
  geom->add_option("--generator", geom_generator,
                   "l1-vertices | theta-pair | random-unit-sphere | simplex-vertices");
  geom->add_option("--d", geom_d, "generator dimension");
  geom->add_option("--theta", geom_theta, "theta-pair angle");
  geom->add_option("--count", geom_count, "random generator atom count");
  geom->add_flag("--symmetrized", geom_symmetrized, "close the random generator under negation");
  geom->add_option("--objective", geom_objective, "objective JSON (enables Cf/CfMP/muFMP)");
  geom->add_option("--out", geom_out, "output JSON path (stdout when omitted)");
  geom->add_option("--mdw-restarts", geom_restarts, "multi-start restarts");
  geom->add_option("--seed", geom_seed, "estimator seed");
  geom->add_option("--coherence-m", geom_coherence_m, "cumulative coherence order m");
  geom->add_flag("--inradius", geom_inradius, "report the effective inradius");
  geom->add_option("--rho", geom_rho, "scale for CfMP / muFMP");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  std::string exp_name, exp_out;
  std::uint64_t exp_seed = 0;
  int exp_d = 10, exp_T = 200, exp_inits = 20, exp_jobs = 1, exp_dicts = 50;
  exp->add_option("name", exp_name,
                  "appendix-a | corollary2 | fw-to-mp | envelope | linear-rate | coherence-mdw")
      ->required();
  exp->add_option("--out", exp_out, "output directory for report + trace CSVs");
  exp->add_option("--seed", exp_seed, "experiment seed");
  exp->add_option("--d", exp_d, "dimension (corollary2)");
  exp->add_option("--T", exp_T, "iteration budget (appendix-a)");
  exp->add_option("--inits", exp_inits, "random initializations per theta (appendix-a)");
  exp->add_option("--jobs", exp_jobs, "concurrent independent runs");
  exp->add_option("--dicts", exp_dicts, "dictionary count (coherence-mdw)");

  // verify
  auto* verify = app.add_subcommand("verify", "check a trace against a theorem envelope");
  std::string verify_trace, verify_kind, verify_out;
  std::optional<double> verify_delta, verify_rho;
  int verify_restarts = 200;
  verify->add_option("--trace", verify_trace, "trace JSON produced by solve")->required();
  verify->add_option("--kind", verify_kind, "thm1|thm2|thm3|thm4|thm6|thm7|thm8")->required();
  verify->add_option("--delta", verify_delta, "oracle quality (defaults to the trace's)");
  verify->add_option("--rho", verify_rho, "atomic-norm bound (defaults to rho_posthoc)");
  verify->add_option("--mdw-restarts", verify_restarts, "width estimator restarts");
  verify->add_option("--out", verify_out, "report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return run_solve(solve_config, solve_out, solve_seed, solve_reference);
    if (*geom) {
      return run_geometry(geom_atoms, geom_generator, geom_d, geom_theta, geom_count,
                          geom_symmetrized, geom_objective, geom_out, geom_restarts, geom_seed,
                          geom_coherence_m, geom_inradius, geom_rho);
    }
    if (*exp) {
      return run_experiment(exp_name, exp_out, exp_seed, exp_d, exp_T, exp_inits, exp_jobs,
                            exp_dicts);
    }
    if (*verify) {
      return run_verify(verify_trace, verify_kind, verify_delta, verify_rho, verify_restarts,
                        verify_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
