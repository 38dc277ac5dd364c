#pragma once

#include "sdae/diffusor.hpp"

namespace sdae {

/// A (time-frozen) vector field on a manifold: ambient tangent values, with
/// an optional analytic ambient Jacobian of the extension.
struct VectorField {
  std::function<Vec(const Vec&)> value;     //!< x -> tangent vector at x
  std::function<Mat(const Vec&)> jacobian;  //!< optional ambient D sigma

  Vec operator()(const Vec& x) const { return value(x); }
};

/// Make the canonical field extending an ambient direction c: x -> P_x c.
VectorField projected_field(const ManifoldPtr& m, const Vec& c);

/// Extend a single tangent vector Y at x0 to the field z -> P_z Y.
VectorField extend_tangent(const ManifoldPtr& m, const TangentVector& y);

/// Chart components of a vector field at an ambient point.
Vec chart_components(const Chart& chart, const Vec& x, const Vec& v);

/// Levi-Civita covariant derivative of sigma along itself for an embedded
/// manifold with the induced metric: P_x(D sigma . sigma).
TangentVector covariant_derivative(const ManifoldPtr& m, const VectorField& sigma,
                                   const Vec& x);

/// The Stratonovich generator applied to a field at a point, as a diffusor:
/// acts on functions as f -> sigma[sigma[f]]; symbol sigma (x) sigma.
Diffusor stratonovich_generator(const ManifoldPtr& m, const VectorField& sigma,
                                const Vec& x);

/// The Ito (Levi-Civita) generator: f -> sigma[sigma[f]] - (nabla_sigma sigma)[f].
Diffusor ito_generator(const ManifoldPtr& m, const VectorField& sigma, const Vec& x);

/// Choice of diffusion generator for an SDE on a manifold. Custom maps are
/// accepted only if they pass a symbol-condition self-test at registration.
class GeneratorChoice {
 public:
  enum class Kind { Ito, Stratonovich, Custom };

  using CustomFn =
      std::function<Diffusor(const ManifoldPtr&, const VectorField&, const Vec&)>;

  static GeneratorChoice ito() { return GeneratorChoice(Kind::Ito, nullptr); }
  static GeneratorChoice stratonovich() {
    return GeneratorChoice(Kind::Stratonovich, nullptr);
  }
  /// Validates hat(G(Y)) = Y (x) Y on samples drawn from m before accepting.
  static GeneratorChoice custom(CustomFn fn, const ManifoldPtr& m,
                                std::uint64_t seed = 7, int n_checks = 32,
                                double tol = 1e-6);

  Kind kind() const { return kind_; }

  /// The generator applied to a field at a point, as a chart-local diffusor.
  Diffusor diffusor(const ManifoldPtr& m, const VectorField& sigma, const Vec& x) const;

  /// G(sigma)[f] evaluated without building the chart representation:
  /// nested directional derivatives plus the first-order correction.
  double apply(const ManifoldPtr& m, const VectorField& sigma, const Vec& x,
               const std::function<double(const Vec&)>& f) const;

  /// Stratonovich conversion correction nabla^G_S(sigma) = (G - G_S)(sigma),
  /// a tangent vector (the second-order parts cancel).
  TangentVector correction_stratonovich(const ManifoldPtr& m, const VectorField& sigma,
                                        const Vec& x) const;

  /// Ito conversion correction nabla^G_I(sigma) = (G - G_I)(sigma).
  TangentVector correction_ito(const ManifoldPtr& m, const VectorField& sigma,
                               const Vec& x) const;

 private:
  GeneratorChoice(Kind kind, CustomFn fn) : kind_(kind), custom_(std::move(fn)) {}

  Kind kind_;
  CustomFn custom_;
};

/// nabla^G_S(sigma) = (G - G_S)(sigma) as a free function, matching the
/// shorthand conversion formulas.
TangentVector generator_correction(const GeneratorChoice& g, const ManifoldPtr& m,
                                   const VectorField& sigma, const Vec& x);

}  // namespace sdae
