#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdae/error.hpp"
#include "sdae/rng.hpp"

namespace sdae {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Membership tolerance for points claimed to lie on a manifold.
inline constexpr double kPointTol = 1e-9;

/// Central finite-difference step used throughout when no analytic
/// derivative closure is available.
inline constexpr double kFdStep = 1e-5;

/// A coordinate chart of an embedded manifold. Jacobian closures are
/// optional; callers fall back to central differences when absent.
struct Chart {
  std::string name;
  std::function<bool(const Vec&)> domain;                //!< ambient point -> in domain
  std::function<Vec(const Vec&)> to_coords;              //!< ambient -> intrinsic (n)
  std::function<Vec(const Vec&)> from_coords;            //!< intrinsic -> ambient (q)
  std::function<Mat(const Vec&)> jac_forward;            //!< n x q, at ambient point
  std::function<Mat(const Vec&)> jac_inverse;            //!< q x n, at intrinsic point

  Mat forward_jacobian(const Vec& x) const;   // analytic or finite-difference
  Mat inverse_jacobian(const Vec& xi) const;  // analytic or finite-difference
};

/// Extrinsic representation of an embedded Riemannian manifold: ambient
/// coordinates, defining equations, tangent projector and a retraction.
/// The metric is the one induced from the ambient Euclidean structure, so
/// tangent vectors pair by the ambient dot product.
struct Manifold {
  std::string name;
  int dim = 0;          //!< intrinsic dimension n
  int ambient_dim = 0;  //!< ambient dimension q

  /// Zero (as a vector in R^c) exactly on the manifold; empty for R^k.
  std::function<Vec(const Vec&)> defining_residual;
  /// P_x v: orthogonal projection of an ambient vector onto T_x M.
  std::function<Vec(const Vec&, const Vec&)> tangent_projector;
  /// Metric projection of a nearby ambient point back onto the manifold.
  std::function<Vec(const Vec&)> retraction;

  std::vector<Chart> charts;

  /// Geodesic distance, when the manifold carries one in closed form.
  std::function<double(const Vec&, const Vec&)> distance;  // may be null
  /// Injectivity radius at a point; +inf for Euclidean space.
  std::function<double(const Vec&)> injectivity_radius;    // may be null

  /// Draw a point from the manifold's canonical sampling measure.
  std::function<Vec(CounterRng&)> sample;

  bool on_manifold(const Vec& x, double tol = kPointTol) const;
  /// Throws InvalidPoint if x is off the manifold beyond tol.
  void require_on_manifold(const Vec& x, double tol = kPointTol) const;

  /// Chart containing x, preferring the one x is deepest inside.
  const Chart& chart_for(const Vec& x) const;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// A point of a manifold, stored in ambient coordinates.
struct ManifoldPoint {
  ManifoldPtr manifold;
  Vec coords;

  ManifoldPoint(ManifoldPtr m, Vec x);
};

/// A tangent vector attached to a base point, in ambient coordinates.
struct TangentVector {
  ManifoldPoint base;
  Vec vec;
};

// ---------------------------------------------------------------------------
// Built-in manifolds
// ---------------------------------------------------------------------------

/// Unit sphere S^{q-1} embedded in R^q (q >= 2). Charts: stereographic
/// projections from the +e_q and -e_q poles. Injectivity radius pi.
ManifoldPtr make_unit_sphere(int ambient_dim = 3);

/// Flat R^k with the identity chart; sampling is uniform on [-bound, bound]^k.
ManifoldPtr make_euclidean(int k, double sample_bound = 2.0);

/// The real line, i.e. make_euclidean(1).
ManifoldPtr make_real_line();

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// P_x v as a TangentVector. Throws InvalidPoint for off-manifold x.
TangentVector project_tangent(const ManifoldPtr& m, const Vec& x, const Vec& v);

/// Retract an ambient point onto the manifold. Throws DegenerateRetraction
/// outside the retraction basin.
ManifoldPoint retract(const ManifoldPtr& m, const Vec& y);

/// Geodesic distance; throws UnsupportedMetric if the manifold has none.
double geodesic_distance(const ManifoldPtr& m, const Vec& x, const Vec& y);

/// Riemannian gradient of a functional given by its ambient covector:
/// with the induced metric this is the tangent projection of df.
TangentVector riemannian_gradient(const ManifoldPtr& m, const Vec& x, const Vec& df);

/// Derivative of f : M -> R^k at x along tangent direction v, computed by a
/// central difference along the retracted line t |-> retract(x + t v).
Vec directional_derivative(const ManifoldPtr& m, const Vec& x, const Vec& v,
                           const std::function<Vec(const Vec&)>& f,
                           double step = kFdStep);

/// Scalar version of directional_derivative.
double directional_derivative_scalar(const ManifoldPtr& m, const Vec& x, const Vec& v,
                                     const std::function<double(const Vec&)>& f,
                                     double step = kFdStep);

/// Fourth-order (five-point) variant, for nested-difference evaluations
/// whose truncation error would otherwise dominate.
double directional_derivative_scalar_o4(const ManifoldPtr& m, const Vec& x,
                                        const Vec& v,
                                        const std::function<double(const Vec&)>& f,
                                        double step = 1e-4);

/// Orthonormal basis of T_x M as columns of a q x n matrix.
Mat tangent_basis(const ManifoldPtr& m, const Vec& x);

/// Map x through the chart and back; throws ChartDomain off the domain.
Vec chart_roundtrip(const Chart& chart, const Vec& x);

}  // namespace sdae
