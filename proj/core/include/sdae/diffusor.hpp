#pragma once

#include <functional>

#include "sdae/manifold.hpp"

namespace sdae {

/// A scalar function written in chart coordinates, with optional analytic
/// gradient and Hessian closures. Missing derivatives fall back to central
/// finite differences with step kFdStep.
struct ChartScalar {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // may be null
  std::function<Mat(const Vec&)> hessian;   // may be null

  double operator()(const Vec& xi) const { return value(xi); }
  Vec grad(const Vec& xi) const;
  Mat hess(const Vec& xi) const;

  /// Pointwise product; derivatives composed by the product rule when both
  /// factors carry them.
  static ChartScalar product(const ChartScalar& f, const ChartScalar& g);
};

/// Wrap an ambient scalar function as a chart function through from_coords.
ChartScalar chart_scalar_from_ambient(const Chart& chart,
                                      std::function<double(const Vec&)> f);

/// A second-order tangent object at a base point, in chart-local form
/// a^i d_i + b^{ij} d2_{ij} with b symmetric.
struct Diffusor {
  ManifoldPoint base;
  const Chart* chart;  //!< chart the local coefficients refer to
  Vec first_order;     //!< a, length n
  Mat second_order;    //!< b, n x n symmetric

  /// Chart coordinates of the base point.
  Vec base_coords() const { return chart->to_coords(base.coords); }
};

/// Apply L to a scalar function: a^i d_i f + b^{ij} d2_{ij} f at the base.
double apply_diffusor(const Diffusor& L, const ChartScalar& f);

/// Convenience: apply to an ambient scalar function on the manifold.
double apply_diffusor(const Diffusor& L, const std::function<double(const Vec&)>& f);

/// The symmetric second-order symbol: hat(L)(df, dg) = b^{ij} d_i f d_j g.
/// Returned as the coefficient matrix in the diffusor's chart.
Mat hat(const Diffusor& L);

/// hat(L) paired against two concrete functions.
double hat_apply(const Diffusor& L, const ChartScalar& f, const ChartScalar& g);

/// A smooth map between manifolds, for pushing diffusors forward.
struct SmoothMap {
  ManifoldPtr domain;
  ManifoldPtr codomain;
  std::function<Vec(const Vec&)> value;  //!< ambient point -> ambient point
};

/// Local-formula pushforward of a diffusor through phi:
///   a'^k = a^i d_i phi^k + b^{ij} d2_{ij} phi^k,  b'^{kl} = b^{ij} d_i phi^k d_j phi^l.
/// Throws ChartDomain if the image has no chart.
Diffusor pushforward_diffusor(const SmoothMap& phi, const Diffusor& L);

}  // namespace sdae
