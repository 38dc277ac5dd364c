#include "sdae/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <thread>

namespace sdae {

const char* retry_rng_name(RetryRng r) {
  return r == RetryRng::Reuse ? "reuse" : "fresh";
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Index1: return "index1";
    case Algorithm::Alg1: return "alg1";
    case Algorithm::Alg2: return "alg2";
    case Algorithm::ClosedForm: return "closed-form";
  }
  return "unknown";
}

const char* y_form_name(YForm f) {
  return f == YForm::SquaredDistance ? "squared_distance" : "linear";
}

int SolverConfig::n_steps() const {
  return static_cast<int>(std::llround(t_final / dt));
}

void SolverConfig::validate(const SDAEProblem& problem) const {
  if (!(dt > 0.0)) fail(ErrorCode::ConfigInvalid, "dt must be positive");
  if (!(t_final > 0.0) || n_steps() < 1) {
    fail(ErrorCode::ConfigInvalid, "t_final must allow at least one step");
  }
  if (!(epsilon > 0.0)) fail(ErrorCode::ConfigInvalid, "epsilon must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    fail(ErrorCode::ConfigInvalid, "alpha must lie in (0, 1]");
  }
  if (!(b0 > 0.0)) fail(ErrorCode::ConfigInvalid, "b0 must be positive");
  if (inner_steps < 1) fail(ErrorCode::ConfigInvalid, "inner_steps must be >= 1");
  if (n_paths < 1) fail(ErrorCode::ConfigInvalid, "n_paths must be >= 1");
  // Cut-locus guard: the relaxation band must fit inside the injectivity
  // radius of the target point (vacuous for flat P).
  const auto& tp = problem.target_manifold;
  if (tp->injectivity_radius) {
    const double radius = tp->injectivity_radius(problem.target_point);
    if (std::isfinite(radius) && epsilon >= radius) {
      fail(ErrorCode::ConfigInvalid,
           "epsilon exceeds the injectivity radius of the target point");
    }
  }
}

namespace {

Vec initial_algebraic_guess(const SDAEProblem& problem) {
  if (problem.initial_algebraic) return *problem.initial_algebraic;
  const auto& n = problem.algebraic_manifold;
  const Vec zero = Vec::Zero(n->ambient_dim);
  if (n->on_manifold(zero)) return zero;
  fail(ErrorCode::ConfigInvalid,
       "no initial algebraic value and no canonical guess on " + n->name);
}

double constraint_distance(const SDAEProblem& problem, const Vec& x, const Vec& u) {
  return geodesic_distance(problem.target_manifold, problem.constraint(x, u),
                           problem.target_point);
}

struct BoundedMRunner {
  const SDAEProblem& problem;
  const SolverConfig& config;
  std::uint64_t path_index;
  bool frozen_branch;  // Algorithm 2 per-step |D2Y| check
  bool delegate;       // Algorithm 1 delegation on degenerate directions

  Trajectory run() const {
    config.validate(problem);
    problem.validate();
    const YForm form = config.effective_y_form(problem);
    const int d = problem.driver_count();

    Vec x = problem.initial_state;
    Vec u = initial_algebraic_guess(problem);
    {
      const GdResult g0 = gradient_descent_root(problem, config.b0, x, u, form,
                                                config.gd_controls());
      if (!g0.converged) {
        fail(ErrorCode::FallbackFailure,
             "gradient descent could not establish Y(X0, U0) = 0 (|Y| = " +
                 std::to_string(g0.y_abs) + ")");
      }
      u = g0.u;
    }

    WienerSource source(config.seed, path_index, d, config.dt);
    const int total = config.n_steps();
    double b = config.b0;
    std::uint64_t epoch = 0;

    Trajectory traj;
    auto record = [&](double t, const Vec& z, const Vec& v) {
      traj.times.push_back(t);
      traj.x.push_back(z);
      traj.u.push_back(v);
      traj.h_dist.push_back(constraint_distance(problem, z, v));
      traj.b_value.push_back(b);
    };
    record(0.0, x, u);

    int k = 0;
    while (k < total) {
      const int block_len = std::min(config.inner_steps, total - k);
      const Vec xb = x;
      const Vec ub = u;
      const size_t mark = traj.times.size();
      for (;;) {
        run_block(x, u, b, epoch, k, block_len, form, source, traj, record);
        if (constraint_distance(problem, x, u) <= config.epsilon) break;
        traj.violations += 1;
        b *= 2.0;
        if (b > config.b_cap) {
          fail(ErrorCode::StiffnessCap,
               "b exceeded b_cap at t = " + std::to_string(traj.times.back()) +
                   " (b = " + std::to_string(b) +
                   ", h_dist = " + std::to_string(traj.h_dist.back()) + ")");
        }
        if (config.retry_rng == RetryRng::Fresh) epoch += 1;
        x = xb;
        u = ub;
        traj.times.resize(mark);
        traj.x.resize(mark);
        traj.u.resize(mark);
        traj.h_dist.resize(mark);
        traj.b_value.resize(mark);
      }
      k += block_len;
    }
    return traj;
  }

 private:
  void run_block(Vec& x, Vec& u, double b, std::uint64_t epoch, int k0,
                 int block_len, YForm form, const WienerSource& source,
                 Trajectory& traj,
                 const std::function<void(double, const Vec&, const Vec&)>& record)
      const {
    const auto& m = problem.state_manifold;
    const auto& n = problem.algebraic_manifold;
    const int d = problem.driver_count();

    PairFieldFn fields = [this, b, form](const Vec& z, const Vec& v) {
      const BoundedMFields bm =
          bounded_m_fields(problem, b, z, v, form, config.denom_guard);
      PairEval e;
      e.fx = problem.stratonovich_drift(z, v);
      e.fu = bm.u_drift;
      for (int l = 0; l < problem.driver_count(); ++l) {
        e.sx.push_back(problem.diffusions[l](z, v));
        e.su.push_back(bm.u_diffusions[l]);
      }
      return e;
    };
    if (config.scheme == Scheme::EulerIto) {
      fields = pair_field_to_ito(fields, m, n);
    }

    for (int j = 0; j < block_len; ++j) {
      const int s = k0 + j;
      Vec dw(d);
      for (int l = 0; l < d; ++l) dw[l] = source.increment(epoch, s, l);

      bool frozen = false;
      if (frozen_branch) {
        const Vec d2y = d2y_covector(problem, b, x, u, form);
        frozen = d2y.norm() <= config.d2y_threshold;
      }
      if (!frozen) {
        try {
          auto [xn, un] = config.scheme == Scheme::EulerIto
                              ? euler_step_eval(fields, m, n, x, u, dw, config.dt)
                              : heun_step_eval(fields, m, n, x, u, dw, config.dt);
          x = xn;
          u = un;
        } catch (const SdaeError& e) {
          if (e.code() != ErrorCode::DegenerateDirection ||
              !(frozen_branch || delegate)) {
            throw;
          }
          traj.denominator_guards += 1;
          frozen = true;
        }
      }
      if (frozen) {
        frozen_step(x, u, b, form, dw, traj);
      }
      record((s + 1) * config.dt, x, u);
    }
  }

  /// Step X alone with U held constant, then gradient-descend U back to the
  /// zero set of Y with the previous value as the initial guess.
  void frozen_step(Vec& x, Vec& u, double b, YForm form, const Vec& dw,
                   Trajectory& traj) const {
    const auto& m = problem.state_manifold;
    auto x_increment = [&](const Vec& z) {
      Vec dz = (config.scheme == Scheme::EulerIto ? problem.ito_drift(z, u)
                                                  : problem.stratonovich_drift(z, u)) *
               config.dt;
      for (int l = 0; l < problem.driver_count(); ++l) {
        dz += problem.diffusions[l](z, u) * dw[l];
      }
      return dz;
    };
    if (config.scheme == Scheme::EulerIto) {
      x = m->retraction(x + x_increment(x));
    } else {
      const Vec dx0 = x_increment(x);
      const Vec xp = m->retraction(x + dx0);
      x = m->retraction(x + 0.5 * (dx0 + x_increment(xp)));
    }
    traj.gd_fallbacks += 1;
    const GdResult res =
        gradient_descent_root(problem, b, x, u, form, config.gd_controls());
    if (!res.converged) {
      fail(ErrorCode::FallbackFailure,
           "fallback gradient descent stalled with |Y| = " + std::to_string(res.y_abs));
    }
    u = res.u;
  }
};

}  // namespace

Trajectory algorithm1(const SDAEProblem& problem, const SolverConfig& config,
                      std::uint64_t path_index) {
  return BoundedMRunner{problem, config, path_index, false,
                        config.delegate_degenerate}
      .run();
}

Trajectory algorithm2(const SDAEProblem& problem, const SolverConfig& config,
                      std::uint64_t path_index) {
  return BoundedMRunner{problem, config, path_index, true, true}.run();
}

Trajectory run_closed_form(const SDAEProblem& problem, const SolverConfig& config,
                           const std::function<double(const Vec&, double)>& u_of_x,
                           std::uint64_t path_index) {
  config.validate(problem);
  if (!u_of_x) {
    fail(ErrorCode::ConfigInvalid, "closed-form run requires a closed-form u map");
  }
  const double b = config.b0;
  auto u_process = [&u_of_x, b](double, const Vec& x) {
    Vec u(1);
    u[0] = u_of_x(x, b);
    return u;
  };
  const WienerPath path = wiener_path(config.seed, path_index,
                                      problem.driver_count(), config.n_steps(),
                                      config.dt);
  Trajectory traj = integrate_intrinsic(problem, u_process, path, config.scheme);
  for (auto& bv : traj.b_value) bv = b;
  return traj;
}

Trajectory run_index1(const SDAEProblem& problem, const SolverConfig& config,
                      std::uint64_t path_index) {
  config.validate(problem);
  if (!problem.initial_algebraic) {
    fail(ErrorCode::ConfigInvalid,
         "index-1 run requires an initial algebraic value consistent with h");
  }
  const auto& m = problem.state_manifold;
  const auto& n = problem.algebraic_manifold;
  const CoupledFields reduced = index1_reduction(problem);
  PairFieldFn fields = as_pair_field(reduced);
  if (config.scheme == Scheme::EulerIto) {
    fields = pair_field_to_ito(fields, m, n);
  }

  WienerSource source(config.seed, path_index, problem.driver_count(), config.dt);
  Vec x = problem.initial_state;
  Vec u = *problem.initial_algebraic;

  Trajectory traj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.x.push_back(x);
    traj.u.push_back(u);
    traj.h_dist.push_back(constraint_distance(problem, x, u));
    traj.b_value.push_back(0.0);
  };
  record(0.0);
  const int total = config.n_steps();
  for (int s = 0; s < total; ++s) {
    Vec dw(problem.driver_count());
    for (int l = 0; l < problem.driver_count(); ++l) {
      dw[l] = source.increment(0, s, l);
    }
    auto [xn, un] = config.scheme == Scheme::EulerIto
                        ? euler_step_eval(fields, m, n, x, u, dw, config.dt)
                        : heun_step_eval(fields, m, n, x, u, dw, config.dt);
    x = xn;
    u = un;
    record((s + 1) * config.dt);
  }
  return traj;
}

Trajectory run_path(const SDAEProblem& problem, const SolverConfig& config,
                    Algorithm algorithm,
                    const std::function<double(const Vec&, double)>& closed_form_u,
                    std::uint64_t path_index) {
  switch (algorithm) {
    case Algorithm::Index1: return run_index1(problem, config, path_index);
    case Algorithm::Alg1: return algorithm1(problem, config, path_index);
    case Algorithm::Alg2: return algorithm2(problem, config, path_index);
    case Algorithm::ClosedForm:
      return run_closed_form(problem, config, closed_form_u, path_index);
  }
  fail(ErrorCode::ConfigInvalid, "unreachable algorithm");
}

namespace {

/// Monte-Carlo sup of sum_l (sigma_l[Delta_p^2 o h])^2 along a trajectory.
double lambda_sup_along(const SDAEProblem& problem, const Trajectory& traj) {
  const TargetFunctional f =
      squared_distance_functional(problem.target_manifold, problem.target_point);
  const auto& m = problem.state_manifold;
  double sup = 0.0;
  for (size_t i = 0; i < traj.x.size(); ++i) {
    const Vec& x = traj.x[i];
    const Vec& u = traj.u[i];
    auto g = [&](const Vec& z) { return f.value(problem.constraint(z, u)); };
    double acc = 0.0;
    for (int l = 0; l < problem.driver_count(); ++l) {
      const double v =
          directional_derivative_scalar(m, x, problem.diffusions[l](x, u), g);
      acc += v * v;
    }
    sup = std::max(sup, acc);
  }
  return sup;
}

}  // namespace

EnsembleDiagnostics run_ensemble(const SDAEProblem& problem, const SolverConfig& config,
                                 Algorithm algorithm,
                                 const std::function<double(const Vec&, double)>&
                                     closed_form_u,
                                 std::vector<Trajectory>* trajectories) {
  config.validate(problem);
  const int n = config.n_paths;
  EnsembleDiagnostics diag;
  diag.n_paths = n;
  diag.epsilon = config.epsilon;
  diag.paths.resize(n);
  if (trajectories) trajectories->resize(n);
  std::vector<double> lambda_per_path(n, 0.0);

  auto worker = [&](int first, int stride) {
    for (int i = first; i < n; i += stride) {
      PathSummary& summary = diag.paths[i];
      summary.path_index = static_cast<std::uint64_t>(i);
      const auto start = std::chrono::steady_clock::now();
      try {
        Trajectory traj = run_path(problem, config, algorithm, closed_form_u,
                                   static_cast<std::uint64_t>(i));
        summary.ok = true;
        summary.sup_h_dist = traj.sup_h_dist();
        summary.final_b = traj.final_b();
        if (config.lambda_estimate) {
          lambda_per_path[i] = lambda_sup_along(problem, traj);
        }
        if (trajectories) (*trajectories)[i] = std::move(traj);
      } catch (const SdaeError& e) {
        summary.ok = false;
        summary.error = std::string(error_code_name(e.code())) + ": " + e.what();
        summary.sup_h_dist = std::numeric_limits<double>::quiet_NaN();
      }
      summary.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
    }
  };

  const int n_workers = std::max(1, std::min<int>(
      n, static_cast<int>(std::thread::hardware_concurrency())));
  if (n_workers == 1) {
    worker(0, 1);
  } else {
    std::vector<std::future<void>> futures;
    for (int w = 0; w < n_workers; ++w) {
      futures.push_back(std::async(std::launch::async, worker, w, n_workers));
    }
    for (auto& f : futures) f.get();
  }

  int violating = 0;
  int failed = 0;
  for (const auto& p : diag.paths) {
    if (!p.ok) {
      ++failed;
      ++violating;
    } else if (p.sup_h_dist > config.epsilon) {
      ++violating;
    }
  }
  if (failed == n) {
    fail(ErrorCode::SamplingFailure,
         "every path failed; first error: " + diag.paths.front().error);
  }
  diag.violation_fraction = static_cast<double>(violating) / n;

  if (config.lambda_estimate) {
    double lambda = 0.0;
    for (double v : lambda_per_path) lambda = std::max(lambda, v);
    diag.lambda_estimate = lambda;
    const double e2 = config.epsilon * config.epsilon;
    diag.b_bound_literal = lambda / (config.alpha * e2 * e2);
    diag.b_bound_proof = lambda / (2.0 * config.alpha * e2);
  }
  return diag;
}

}  // namespace sdae
