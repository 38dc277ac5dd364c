#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sdae/problems.hpp"
#include "serialize.hpp"

namespace sdae::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "sdae 0.1.0";

int exit_code_for(const SdaeError& e) {
  switch (e.code()) {
    case ErrorCode::UnknownProblem:
    case ErrorCode::ConfigInvalid:
    case ErrorCode::SchemeMismatch:
      return 2;
    case ErrorCode::StiffnessCap:
      return 3;
    case ErrorCode::FallbackFailure:
    case ErrorCode::LocalMinimum:
      return 4;
    default:
      return 5;
  }
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "index1") return Algorithm::Index1;
  if (s == "alg1") return Algorithm::Alg1;
  if (s == "alg2") return Algorithm::Alg2;
  if (s == "closed-form") return Algorithm::ClosedForm;
  fail(ErrorCode::ConfigInvalid, "unknown algorithm '" + s + "'");
}

/// Shared run options assembled from config file and flags (flags win).
struct RunSpec {
  std::string problem;
  std::string algorithm = "alg1";
  SolverConfig config;
  std::string out;
};

struct SharedFlags {
  std::string config_path;
  std::string problem;
  std::string algorithm;
  std::string scheme;
  std::string retry_rng;
  std::string y_form;
  double dt = 0, t_final = 0, epsilon = 0, alpha = 0, b0 = 0, b_cap = 0;
  double gd_tol = 0, d2y_threshold = 0, denom_guard = 0;
  int inner_steps = 0, paths = 0, gd_max_iter = 0;
  std::uint64_t seed = 0;
  bool lambda_estimate = false;
  bool delegate_degenerate = false;
};

void add_shared_flags(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config_path,
                  "JSON config or manifest; flags given here override it");
  cmd->add_option("--problem", f.problem, "registered problem name");
  cmd->add_option("--algorithm", f.algorithm,
                  "index1 | alg1 | alg2 | closed-form");
  cmd->add_option("--dt", f.dt, "time step");
  cmd->add_option("--t-final", f.t_final, "horizon");
  cmd->add_option("--epsilon", f.epsilon, "constraint tolerance");
  cmd->add_option("--alpha", f.alpha, "probability bound");
  cmd->add_option("--b0", f.b0, "initial stiffness b");
  cmd->add_option("--b-cap", f.b_cap, "maximum b before a stiffness error");
  cmd->add_option("--inner-steps", f.inner_steps, "block size N");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--paths", f.paths, "number of paths");
  cmd->add_option("--retry-rng", f.retry_rng, "reuse | fresh");
  cmd->add_option("--scheme", f.scheme, "heun_stratonovich | euler_ito");
  cmd->add_option("--y-form", f.y_form, "squared_distance | linear");
  cmd->add_option("--gd-tol", f.gd_tol, "gradient-descent tolerance on |Y|");
  cmd->add_option("--gd-max-iter", f.gd_max_iter, "gradient-descent iteration cap");
  cmd->add_option("--d2y-threshold", f.d2y_threshold, "frozen-U branch cutoff");
  cmd->add_option("--denom-guard", f.denom_guard, "minimum |D2Y . a|");
  cmd->add_flag("--lambda-estimate", f.lambda_estimate,
                "include a Monte-Carlo lambda estimate in diagnostics");
  cmd->add_flag("--delegate-degenerate", f.delegate_degenerate,
                "alg1: fall back like alg2 on degenerate directions");
}

RunSpec build_spec(const CLI::App* cmd, const SharedFlags& f) {
  RunSpec spec;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) {
      fail(ErrorCode::ConfigInvalid, "cannot read config '" + f.config_path + "'");
    }
    Json j = Json::parse(in);
    const Json& cfg = j.contains("config") ? j["config"] : j;
    spec.config = solver_config_from_json(cfg, spec.config);
    if (j.contains("problem")) spec.problem = j["problem"].get<std::string>();
    if (j.contains("algorithm")) spec.algorithm = j["algorithm"].get<std::string>();
  }
  auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--problem")) spec.problem = f.problem;
  if (given("--algorithm")) spec.algorithm = f.algorithm;
  Json overrides;
  if (given("--dt")) overrides["dt"] = f.dt;
  if (given("--t-final")) overrides["t_final"] = f.t_final;
  if (given("--epsilon")) overrides["epsilon"] = f.epsilon;
  if (given("--alpha")) overrides["alpha"] = f.alpha;
  if (given("--b0")) overrides["b0"] = f.b0;
  if (given("--b-cap")) overrides["b_cap"] = f.b_cap;
  if (given("--inner-steps")) overrides["inner_steps"] = f.inner_steps;
  if (given("--seed")) overrides["seed"] = f.seed;
  if (given("--paths")) overrides["n_paths"] = f.paths;
  if (given("--retry-rng")) overrides["retry_rng"] = f.retry_rng;
  if (given("--scheme")) overrides["scheme"] = f.scheme;
  if (given("--y-form")) overrides["y_form"] = f.y_form;
  if (given("--gd-tol")) overrides["gd_tol"] = f.gd_tol;
  if (given("--gd-max-iter")) overrides["gd_max_iter"] = f.gd_max_iter;
  if (given("--d2y-threshold")) overrides["d2y_threshold"] = f.d2y_threshold;
  if (given("--denom-guard")) overrides["denom_guard"] = f.denom_guard;
  if (given("--lambda-estimate")) overrides["lambda_estimate"] = true;
  if (given("--delegate-degenerate")) overrides["delegate_degenerate"] = true;
  spec.config = solver_config_from_json(overrides, spec.config);
  if (spec.problem.empty()) {
    fail(ErrorCode::ConfigInvalid, "no problem selected (use --problem)");
  }
  return spec;
}

Json manifest_json(const std::string& command, const RunSpec& spec,
                   double seconds, const std::vector<std::string>& outputs) {
  Json j;
  j["command"] = command;
  j["problem"] = spec.problem;
  j["algorithm"] = spec.algorithm;
  j["config"] = solver_config_json(spec.config);
  j["code_version"] = kVersion;
  j["timing_seconds"] = seconds;
  Json outs = Json::array();
  for (const auto& o : outputs) outs.push_back(o);
  j["outputs"] = std::move(outs);
  return j;
}

std::string path_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "path_%03d.csv", index);
  return buf;
}

int cmd_classify(const RunSpec& spec, int samples) {
  const auto& entry = find_problem(spec.problem);
  const SDAEProblem problem = entry.builder();
  const IndexClass cls = classify(problem, samples, spec.config.seed);
  std::cout << "kind=" << index_kind_name(cls.kind)
            << " ill_posed=" << ill_posed_name(cls.ill_posed) << "\n";
  for (size_t i = 0; i < cls.witnesses.size() && i < 8; ++i) {
    const auto& w = cls.witnesses[i];
    std::cout << "  witness[" << i << "]";
    if (!w.diffusion_residuals.empty()) {
      std::cout << " |dh.sigma| =";
      for (double r : w.diffusion_residuals) std::cout << " " << format_double(r);
      std::cout << " |dh.drift| = " << format_double(w.drift_residual);
    } else {
      std::cout << " sv_min = " << format_double(w.sv_min)
                << " sv_max = " << format_double(w.sv_max);
    }
    std::cout << "\n";
  }
  if (!spec.out.empty()) {
    fs::create_directories(spec.out);
    write_file(spec.out + "/classify.json", index_class_json(cls).dump(2) + "\n");
  }
  return 0;
}

int cmd_solve(const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const auto& entry = find_problem(spec.problem);
  const SDAEProblem problem = entry.builder();
  const Algorithm algorithm = parse_algorithm(spec.algorithm);

  fs::create_directories(spec.out.empty() ? "." : spec.out);
  const std::string dir = spec.out.empty() ? "." : spec.out;
  std::vector<std::string> outputs;
  for (int i = 0; i < spec.config.n_paths; ++i) {
    const Trajectory traj = run_path(problem, spec.config, algorithm,
                                     entry.closed_form_u,
                                     static_cast<std::uint64_t>(i));
    const std::string name = path_file_name(i);
    write_file(dir + "/" + name, trajectory_csv(traj));
    outputs.push_back(name);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir + "/manifest.json",
             manifest_json("solve", spec, seconds, outputs).dump(2) + "\n");
  std::cout << "wrote " << outputs.size() << " path file(s) to " << dir << "\n";
  return 0;
}

int cmd_ensemble(const RunSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const auto& entry = find_problem(spec.problem);
  const SDAEProblem problem = entry.builder();
  const Algorithm algorithm = parse_algorithm(spec.algorithm);

  const EnsembleDiagnostics diag =
      run_ensemble(problem, spec.config, algorithm, entry.closed_form_u);
  const std::string dir = spec.out.empty() ? "." : spec.out;
  fs::create_directories(dir);
  write_file(dir + "/diagnostics.json", diagnostics_json(diag).dump(2) + "\n");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir + "/manifest.json",
             manifest_json("ensemble", spec, seconds, {"diagnostics.json"}).dump(2) +
                 "\n");
  std::cout << "violation_fraction = " << format_double(diag.violation_fraction)
            << "\n";
  return 0;
}

int cmd_example(const RunSpec& spec, int figure_paths) {
  const auto start = std::chrono::steady_clock::now();
  const auto& entry = find_problem(spec.problem);
  const SDAEProblem problem = entry.builder();
  const std::string dir = spec.out.empty() ? "." : spec.out;
  fs::create_directories(dir);
  std::vector<std::string> outputs;

  // Constrained realizations: closed-form u when the registry provides one,
  // the approximate algorithm otherwise.
  for (int i = 0; i < figure_paths; ++i) {
    const Trajectory traj =
        entry.closed_form_u
            ? run_closed_form(problem, spec.config, entry.closed_form_u,
                              static_cast<std::uint64_t>(i))
            : algorithm2(problem, spec.config, static_cast<std::uint64_t>(i));
    char buf[48];
    std::snprintf(buf, sizeof(buf), "constrained_%03d.csv", i);
    write_file(dir + "/" + buf, trajectory_csv(traj));
    outputs.push_back(buf);
  }
  // Unconstrained comparison: u frozen at zero.
  for (int i = 0; i < figure_paths; ++i) {
    const WienerPath path =
        wiener_path(spec.config.seed, 1000000 + static_cast<std::uint64_t>(i),
                    problem.driver_count(), spec.config.n_steps(), spec.config.dt);
    auto u_zero = [&problem](double, const Vec&) {
      return Vec(Vec::Zero(problem.algebraic_manifold->ambient_dim));
    };
    const Trajectory traj =
        integrate_intrinsic(problem, u_zero, path, spec.config.scheme);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "unconstrained_%03d.csv", i);
    write_file(dir + "/" + buf, trajectory_csv(traj));
    outputs.push_back(buf);
  }
  if (spec.problem == "sphere_example") {
    std::string csv = "x1,x2,x3\n";
    for (const Vec& p : sphere_constraint_curve()) {
      csv += format_double(p[0]) + "," + format_double(p[1]) + "," +
             format_double(p[2]) + "\n";
    }
    write_file(dir + "/constraint_curve.csv", csv);
    outputs.push_back("constraint_curve.csv");
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir + "/manifest.json",
             manifest_json("example", spec, seconds, outputs).dump(2) + "\n");
  std::cout << "wrote " << outputs.size() << " file(s) to " << dir << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Explicit SDAEs on embedded manifolds: classification and "
               "bounded m-solutions"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SharedFlags flags;
  int samples = 25;
  int figure_paths = 8;
  std::string out;

  CLI::App* classify_cmd =
      app.add_subcommand("classify", "classify the SDAE index and well-posedness");
  add_shared_flags(classify_cmd, flags);
  classify_cmd->add_option("--samples", samples, "number of classification samples");
  classify_cmd->add_option("--out", out, "output directory for classify.json");

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "integrate one or more solution paths");
  add_shared_flags(solve_cmd, flags);
  solve_cmd->add_option("--out", out, "output directory");

  CLI::App* ensemble_cmd =
      app.add_subcommand("ensemble", "run a path ensemble and report diagnostics");
  add_shared_flags(ensemble_cmd, flags);
  ensemble_cmd->add_option("--out", out, "output directory");

  CLI::App* example_cmd = app.add_subcommand(
      "example", "emit figure data: constrained / unconstrained paths and the "
                 "constraint curve");
  add_shared_flags(example_cmd, flags);
  example_cmd->add_option("--figure-paths", figure_paths,
                          "realizations per family");
  example_cmd->add_option("--out", out, "output directory");

  std::vector<std::string> argv_like(args.rbegin(), args.rend());
  try {
    app.parse(argv_like);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    RunSpec spec = build_spec(cmd, flags);
    spec.out = out;
    if (cmd == classify_cmd) return cmd_classify(spec, samples);
    if (cmd == solve_cmd) return cmd_solve(spec);
    if (cmd == ensemble_cmd) return cmd_ensemble(spec);
    if (cmd == example_cmd) {
      // Figure runs want a stiff default so the constrained family hugs the
      // band; explicit --b0 still wins.
      if (cmd->count("--b0") == 0 && spec.config.b0 == 1.0) spec.config.b0 = 256.0;
      return cmd_example(spec, figure_paths);
    }
    return 2;
  } catch (const SdaeError& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}

}  // namespace sdae::cli
