#pragma once

#include "sdae/problem.hpp"
#include "sdae/wiener.hpp"

namespace sdae {

enum class Scheme { HeunStratonovich, EulerIto };

const char* scheme_name(Scheme s);

/// One predictor-corrector Heun step of a coupled Stratonovich system in
/// ambient space, followed by retraction onto M and N.
std::pair<Vec, Vec> heun_step(const CoupledFields& fields, const ManifoldPtr& m,
                              const ManifoldPtr& n, const Vec& x, const Vec& u,
                              const Vec& dw, double dt);

/// One Euler-Maruyama step for fields already in Ito form, with retraction.
std::pair<Vec, Vec> euler_step(const CoupledFields& fields, const ManifoldPtr& m,
                               const ManifoldPtr& n, const Vec& x, const Vec& u,
                               const Vec& dw, double dt);

/// A time-stamped solution path with constraint diagnostics.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<double> h_dist;   //!< Delta_p(h(X_t))
  std::vector<double> b_value;  //!< stiffness parameter in force at each time
  int violations = 0;
  int gd_fallbacks = 0;
  int denominator_guards = 0;

  double sup_h_dist() const;
  double final_b() const { return b_value.empty() ? 0.0 : b_value.back(); }
};

/// Integrate the intrinsic X equation with the algebraic variable supplied
/// exogenously by u_process(t, x). The intrinsic drift is converted to the
/// representation matching the scheme (Stratonovich for Heun, standard Ito
/// for Euler-Maruyama); both discretize the same intrinsic SDE.
Trajectory integrate_intrinsic(const SDAEProblem& problem,
                               const std::function<Vec(double, const Vec&)>& u_process,
                               const WienerPath& path, Scheme scheme);

/// Ito-form coupled fields derived from Stratonovich ones: each component
/// gains the joint correction 1/2 sum_l D(B_l) . (sigma_l, B_l), evaluated
/// by central differences along the pair direction.
CoupledFields stratonovich_to_ito(const CoupledFields& fields, const ManifoldPtr& m,
                                  const ManifoldPtr& n);

/// All coupled fields at one evaluation point, so steppers can share the
/// expensive per-point work (D2Y, constraint solves) across components.
struct PairEval {
  Vec fx, fu;               // drift
  std::vector<Vec> sx, su;  // one diffusion pair per driver
};
using PairFieldFn = std::function<PairEval(const Vec&, const Vec&)>;

PairFieldFn as_pair_field(const CoupledFields& fields);

std::pair<Vec, Vec> heun_step_eval(const PairFieldFn& fields, const ManifoldPtr& m,
                                   const ManifoldPtr& n, const Vec& x, const Vec& u,
                                   const Vec& dw, double dt);

std::pair<Vec, Vec> euler_step_eval(const PairFieldFn& fields, const ManifoldPtr& m,
                                    const ManifoldPtr& n, const Vec& x, const Vec& u,
                                    const Vec& dw, double dt);

/// Joint Stratonovich-to-Ito drift correction for a bundled evaluator.
PairFieldFn pair_field_to_ito(const PairFieldFn& fields, const ManifoldPtr& m,
                              const ManifoldPtr& n);

}  // namespace sdae
