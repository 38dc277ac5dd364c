#pragma once

#include "sdae/problem.hpp"

namespace sdae {

/// Scalar functional of the constraint value used inside Y, with its
/// ambient gradient on P.
struct TargetFunctional {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// Delta_p^2: squared geodesic distance from p, with analytic gradient for
/// the built-in manifolds.
TargetFunctional squared_distance_functional(const ManifoldPtr& p_manifold,
                                             const Vec& p);

/// z - p as a scalar; requires P to be the real line.
TargetFunctional linear_functional(const ManifoldPtr& p_manifold, const Vec& p);

TargetFunctional target_functional(const SDAEProblem& problem, YForm form);

/// The generator drift applied to f of h: [V + 1/2 sum G(sigma_l)][f o h]
/// at (x, u), evaluated by nested directional derivatives on M (the route
/// justified by the decomposition identity).
double composed_constraint_drift(const SDAEProblem& problem, const Vec& x,
                                 const Vec& u, const TargetFunctional& f);

/// The literal three-term decomposition of the same quantity:
///   (D_x h V)[f] + 1/2 sum (D_x h nabla^G_S sigma_l)[f]
///   + 1/2 sum P-side G_S(D_x h sigma_l)[f],
/// kept as an independent verification oracle.
double decomposed_constraint_drift(const SDAEProblem& problem, const Vec& x,
                                   const Vec& u, const TargetFunctional& f);

/// Y(x, u) = b f(h(x)) + [V + 1/2 sum G(sigma_l)][f o h](x, u) with
/// f = Delta_p^2 (or the literal constraint when form is Linear and P = R).
/// Throws CutLocusProximity when h(x) is within 1e-6 of the injectivity
/// radius of p. Uses the problem's fast_y evaluator when present.
double y_value(const SDAEProblem& problem, double b, const Vec& x, const Vec& u,
               YForm form);

/// D1Y as a pairing: derivative of Y along a tangent direction w at x.
double d1y_apply(const SDAEProblem& problem, double b, const Vec& x, const Vec& u,
                 YForm form, const Vec& w);

/// D2Y as an ambient covector on N (components against a tangent basis are
/// taken by the callers that need them).
Vec d2y_covector(const SDAEProblem& problem, double b, const Vec& x, const Vec& u,
                 YForm form);

/// The coupled drift / diffusion tangent vectors on N that hold Y constant:
///   U-drift = alpha_0 a,  U-diff_l = alpha_l a,  a = g-sharp D2Y,
/// with alpha_0 = -D1Y.(Strat drift) / (D2Y.a), alpha_l = -D1Y.sigma_l / (D2Y.a).
/// Throws DegenerateDirection when |D2Y.a| <= denom_guard.
struct BoundedMFields {
  Vec u_drift;
  std::vector<Vec> u_diffusions;
  double d2y_dot_a = 0.0;
};

BoundedMFields bounded_m_fields(const SDAEProblem& problem, double b, const Vec& x,
                                const Vec& u, YForm form, double denom_guard = 1e-10);

/// Riemannian gradient descent on K(u) = Y^2(x, u) with Armijo backtracking.
struct GdControls {
  double initial_step = 0.1;
  double tol = 1e-8;  //!< on |Y|
  int max_iter = 200;
};

struct GdResult {
  Vec u;
  int iterations = 0;
  double y_abs = 0.0;
  bool converged = false;
  bool local_minimum = false;  //!< flat gradient with |Y| > tol
};

GdResult gradient_descent_root(const SDAEProblem& problem, double b, const Vec& x,
                               const Vec& u_init, YForm form,
                               const GdControls& controls);

/// A candidate solution map y : R x N -> M with its partial differential in
/// the algebraic direction, for the unit-probability field formulas.
struct SolutionMap {
  std::function<Vec(double, const Vec&)> value;  //!< (t, u) -> point of M
  std::function<Mat(double, const Vec&)> d2y;    //!< ambient dM x dim N
};

/// Pure evaluation of the unit-probability fields at (t, u):
///   B_l = (Dh D2y)^{-1} Dh sigma_l,
///   a   = (Dh D2y)^{-1} [Dh (V + 1/2 sum nabla^G_S sigma_l)].
/// Throws SingularConstraint when Dh D2y is singular.
struct UnitProbabilityFields {
  Vec a;
  std::vector<Vec> b;
};

UnitProbabilityFields unit_probability_fields(const SDAEProblem& problem,
                                              const SolutionMap& y_map, double t,
                                              const Vec& u);

}  // namespace sdae
