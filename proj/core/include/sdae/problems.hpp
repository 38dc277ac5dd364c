#pragma once

#include "sdae/algorithms.hpp"

namespace sdae {

/// A registered built-in SDAE problem.
struct ProblemRegistryEntry {
  std::string name;
  std::function<SDAEProblem()> builder;
  /// u(x, b) with Y(x, u) = 0 where the denominator guard passes; null when
  /// the problem has no closed form.
  std::function<double(const Vec&, double)> closed_form_u;
  std::string documentation;
};

const std::vector<ProblemRegistryEntry>& problem_registry();

/// Lookup by name; throws UnknownProblem when absent.
const ProblemRegistryEntry& find_problem(const std::string& name);

// ---------------------------------------------------------------------------
// Sphere example: SDE on S^2 with two projected coordinate fields as noise,
// an Ito generator, and a u-independent constraint written in the
// stereographic chart from the north pole.
// ---------------------------------------------------------------------------

SDAEProblem sphere_problem(double noise_scale = 0.3, double drift_scale = 2.0);

/// The constraint as a chart function with analytic gradient and Hessian
/// (stereographic chart from the north pole).
ChartScalar sphere_constraint_chart();

/// Closed-form ingredients of the linear-form Y at a sphere point:
/// h, dh.K1, dh.K2, and gterm = 1/2 sum_l G_I(noise K_l)[h].
struct SphereYTerms {
  double h = 0.0;
  double dh_k1 = 0.0;
  double dh_k2 = 0.0;
  double gterm = 0.0;
};

SphereYTerms sphere_y_terms(const Vec& x, double noise_scale = 0.3);

/// u = [-b h - drift dh.K2 - gterm] / dh.K1; throws DegenerateDirection when
/// |dh.K1| <= denom_guard.
double sphere_closed_form_u(const Vec& x, double b, double noise_scale = 0.3,
                            double drift_scale = 2.0, double denom_guard = 1e-10);

/// Sample the constraint curve {h = 0} by bisection along chart rays from
/// the origin; returns ambient sphere points with |h| <= tol.
std::vector<Vec> sphere_constraint_curve(int n_rays = 720, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Euclidean test problems
// ---------------------------------------------------------------------------

/// Index-1 test problem on the real line: h(x, u) = u - sin(x), V = 1,
/// sigma = 0.2.
SDAEProblem euclidean_index1_problem();

/// Completely-high-index problem on R^2 with tangent noise: h(x) = x1,
/// sigma = (0, 1), V = (u/2 - x1, 1). Well-posed (no kernel witness) and
/// degenerate for the coupled SDE on the constraint set (D2Y = x1).
SDAEProblem euclidean_tangent_noise_problem();

}  // namespace sdae
