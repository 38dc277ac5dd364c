#pragma once

#include <optional>

#include "sdae/stepper.hpp"
#include "sdae/yfunction.hpp"

namespace sdae {

enum class RetryRng { Reuse, Fresh };
enum class Algorithm { Index1, Alg1, Alg2, ClosedForm };

const char* retry_rng_name(RetryRng r);
const char* algorithm_name(Algorithm a);
const char* y_form_name(YForm f);

/// Full solver configuration. Defaults follow the algorithm statements:
/// b starts at 1 and doubles on constraint violation, blocks span
/// inner_steps * dt, and retries reuse the block's Wiener increments.
struct SolverConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  double epsilon = 0.1;
  double alpha = 0.02;
  double b0 = 1.0;
  double b_cap = 1048576.0;  // 2^20
  int inner_steps = 10;      // block size N; block span = N * dt

  double gd_step = 0.1;
  double gd_tol = 1e-8;
  int gd_max_iter = 200;

  double d2y_threshold = 1e-8;  // |D2Y| cutoff for the frozen-U branch
  double denom_guard = 1e-10;   // minimum |D2Y . a|

  Scheme scheme = Scheme::HeunStratonovich;
  std::uint64_t seed = 0;
  int n_paths = 1;
  RetryRng retry_rng = RetryRng::Reuse;
  std::optional<YForm> y_form;  // problem default when unset
  bool lambda_estimate = false;
  /// Algorithm 1 only: on a degenerate direction, apply Algorithm 2's
  /// frozen-U fallback instead of raising.
  bool delegate_degenerate = false;

  /// Basic invariants plus the cut-locus check of epsilon against the
  /// injectivity radius of the target point (vacuous for flat P).
  void validate(const SDAEProblem& problem) const;

  YForm effective_y_form(const SDAEProblem& problem) const {
    return y_form.value_or(problem.default_y_form);
  }

  int n_steps() const;
  GdControls gd_controls() const { return {gd_step, gd_tol, gd_max_iter}; }
};

/// Bounded m-solution via the coupled SDE while D2Y stays away from zero;
/// blocks of inner_steps are re-run with doubled b when the constraint
/// distance exceeds epsilon at the block end. Throws StiffnessCap past
/// b_cap and DegenerateDirection unless delegation is configured.
Trajectory algorithm1(const SDAEProblem& problem, const SolverConfig& config,
                      std::uint64_t path_index = 0);

/// Approximate bounded m-solution: as algorithm1, but steps with |D2Y| at
/// or below d2y_threshold freeze U, advance X alone, and restore Y = 0 by
/// gradient descent from the previous U.
Trajectory algorithm2(const SDAEProblem& problem, const SolverConfig& config,
                      std::uint64_t path_index = 0);

/// Integrate the X equation with the algebraic variable substituted from a
/// closed-form map u = u(x, b0) (e.g. the sphere example's solution).
Trajectory run_closed_form(const SDAEProblem& problem, const SolverConfig& config,
                           const std::function<double(const Vec&, double)>& u_of_x,
                           std::uint64_t path_index = 0);

/// Integrate the index-1 reduced coupled system.
Trajectory run_index1(const SDAEProblem& problem, const SolverConfig& config,
                      std::uint64_t path_index = 0);

/// Dispatch on the algorithm choice; closed_form_u may be null unless
/// Algorithm::ClosedForm is requested.
Trajectory run_path(const SDAEProblem& problem, const SolverConfig& config,
                    Algorithm algorithm,
                    const std::function<double(const Vec&, double)>& closed_form_u,
                    std::uint64_t path_index);

struct PathSummary {
  std::uint64_t path_index = 0;
  bool ok = false;
  std::string error;        // empty when ok
  double sup_h_dist = 0.0;  // over the recorded trajectory
  double final_b = 0.0;
  double runtime_seconds = 0.0;  // excluded from canonical serialization
};

struct EnsembleDiagnostics {
  int n_paths = 0;
  double epsilon = 0.0;
  std::vector<PathSummary> paths;
  /// Fraction of paths with sup_t Delta_p(h) > epsilon (errored paths count
  /// as violating).
  double violation_fraction = 0.0;
  std::optional<double> lambda_estimate;
  /// The proposition's bound b > lambda / (alpha eps^4) and the proof-side
  /// bound b > lambda / (2 alpha eps^2), reported when lambda is estimated.
  std::optional<double> b_bound_literal;
  std::optional<double> b_bound_proof;
};

/// Run n_paths independent paths of the selected algorithm. Per-path errors
/// are collected; throws only if every path fails.
EnsembleDiagnostics run_ensemble(const SDAEProblem& problem, const SolverConfig& config,
                                 Algorithm algorithm,
                                 const std::function<double(const Vec&, double)>&
                                     closed_form_u = nullptr,
                                 std::vector<Trajectory>* trajectories = nullptr);

}  // namespace sdae
