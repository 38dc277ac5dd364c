#pragma once

#include <optional>

#include "sdae/generator.hpp"

namespace sdae {

/// Which scalar functional of the constraint the Y-function is built on:
/// the squared geodesic distance to the target (general case), or the
/// literal constraint value when the target manifold is the real line.
enum class YForm { SquaredDistance, Linear };

/// An explicit SDAE on manifolds: state X on M, algebraic variable U on N,
/// constraint h into P with target point p, drift V and diffusions sigma_l
/// (tangent to M), and a diffusion generator fixing the intrinsic SDE.
struct SDAEProblem {
  std::string name;

  ManifoldPtr state_manifold;      // M
  ManifoldPtr algebraic_manifold;  // N
  ManifoldPtr target_manifold;     // P

  /// V(x, u): tangent vector at x.
  std::function<Vec(const Vec&, const Vec&)> drift;
  /// sigma_l(x, u): tangent vectors at x, l = 1..d.
  std::vector<std::function<Vec(const Vec&, const Vec&)>> diffusions;

  GeneratorChoice generator = GeneratorChoice::ito();

  /// h(x, u) as a point of P. When h_depends_on_u is false the u argument
  /// is ignored (completely-high-index form).
  std::function<Vec(const Vec&, const Vec&)> constraint;
  bool h_depends_on_u = true;

  /// Optional analytic differentials; finite differences otherwise.
  std::function<Mat(const Vec&, const Vec&)> d1h;  // dP x dM ambient
  std::function<Mat(const Vec&, const Vec&)> d2h;  // dP x dN ambient

  Vec target_point;  // p in P
  Vec initial_state; // X0 on M
  std::optional<Vec> initial_algebraic;  // U0 on N

  YForm default_y_form = YForm::SquaredDistance;

  /// Optional fast Y evaluator sharing ingredients with a closed-form u
  /// (registry-provided); the generic evaluator is used when absent.
  std::function<double(double, const Vec&, const Vec&, YForm)> fast_y;
  /// Optional analytic D2Y covector on N (e.g. affine-in-u problems).
  std::function<Vec(double, const Vec&, const Vec&, YForm)> analytic_d2y;

  int driver_count() const { return static_cast<int>(diffusions.size()); }

  /// Stratonovich drift of the X equation: V + 1/2 sum (G - G_S)(sigma_l).
  Vec stratonovich_drift(const Vec& x, const Vec& u) const;
  /// Standard Ito drift of the X equation: V + 1/2 sum (G - G_I)(sigma_l).
  Vec ito_drift(const Vec& x, const Vec& u) const;

  /// sigma_l with u frozen, as a vector field on M.
  VectorField diffusion_field(int l, const Vec& u) const;

  /// D1h applied to a tangent direction w at x (analytic or retracted FD).
  Vec d1h_apply(const Vec& x, const Vec& u, const Vec& w) const;
  /// D2h applied to a tangent direction e at u.
  Vec d2h_apply(const Vec& x, const Vec& u, const Vec& e) const;
  /// D2h against an orthonormal tangent basis of N at u (dP x dim N).
  Mat d2h_matrix(const Vec& x, const Vec& u) const;

  void validate() const;  // field tangency and constraint evaluability
};

enum class IndexKind { Index1, HighIndex, CompletelyHighIndex };
enum class IllPosed { Yes, NoEvidence, NotApplicable };

const char* index_kind_name(IndexKind k);
const char* ill_posed_name(IllPosed v);

/// One sampled diagnostic row backing a classification verdict.
struct IndexWitness {
  Vec x;
  Vec u;
  double sv_min = 0.0;  //!< smallest singular value of D2h
  double sv_max = 0.0;  //!< largest singular value of D2h
  std::vector<double> diffusion_residuals;  //!< |D_x h . sigma_l| per l
  double drift_residual = 0.0;              //!< |D_x h . (V + corrections)|
};

struct IndexClass {
  IndexKind kind = IndexKind::HighIndex;
  IllPosed ill_posed = IllPosed::NotApplicable;
  std::vector<IndexWitness> witnesses;
};

/// Classify the SDAE's index by sampling (x, u). Completely-high-index
/// problems additionally run the well-posedness test and set ill_posed.
IndexClass classify(const SDAEProblem& problem, int n_samples, std::uint64_t seed);

struct WellposednessReport {
  std::vector<IndexWitness> samples;  //!< on (near) the constraint set
  double max_diffusion_residual = 0.0;
  double max_drift_residual = 0.0;
  bool ill_posed_witness = false;  //!< some |dh . sigma_l| > 1e-8
};

/// Test span(sigma_1..sigma_d) subset Ker(D_x h) and the drift condition at
/// sample points projected onto the constraint set.
WellposednessReport check_wellposedness(const SDAEProblem& problem, int n_samples,
                                        std::uint64_t seed);

/// Coupled Stratonovich fields on M x N: drift and one field per driver,
/// each returning the (X-part, U-part) pair of ambient tangent vectors.
struct CoupledFields {
  std::function<std::pair<Vec, Vec>(const Vec&, const Vec&)> drift;
  std::vector<std::function<std::pair<Vec, Vec>(const Vec&, const Vec&)>> diffusions;
};

/// Index-1 reduction: the coupled Stratonovich SDE whose U-part is
/// -(D2h)^{-1} D1h applied to the corresponding X-part field. Throws
/// SingularConstraint (with the condition number) where D2h degenerates.
CoupledFields index1_reduction(const SDAEProblem& problem);

}  // namespace sdae
