#include "sdae/generator.hpp"

#include <cmath>

namespace sdae {

VectorField projected_field(const ManifoldPtr& m, const Vec& c) {
  VectorField f;
  f.value = [m, c](const Vec& x) { return m->tangent_projector(x, c); };
  return f;
}

VectorField extend_tangent(const ManifoldPtr& m, const TangentVector& y) {
  return projected_field(m, y.vec);
}

Vec chart_components(const Chart& chart, const Vec& x, const Vec& v) {
  return chart.forward_jacobian(x) * v;
}

namespace {

/// Ambient Jacobian of the field at x, analytic or by central differences.
Mat field_jacobian(const VectorField& sigma, const Vec& x) {
  if (sigma.jacobian) return sigma.jacobian(x);
  const int q = static_cast<int>(x.size());
  const Vec v0 = sigma.value(x);
  Mat jac(v0.size(), q);
  for (int j = 0; j < q; ++j) {
    Vec xp = x, xm = x;
    xp[j] += kFdStep;
    xm[j] -= kFdStep;
    jac.col(j) = (sigma.value(xp) - sigma.value(xm)) / (2.0 * kFdStep);
  }
  return jac;
}

/// Chart components of sigma as a function of chart coordinates.
Vec chart_field(const Chart& chart, const VectorField& sigma, const Vec& xi) {
  const Vec x = chart.from_coords(xi);
  return chart.forward_jacobian(x) * sigma.value(x);
}

/// First-order coefficients of sigma[sigma[.]] in the chart: (Dc) c, where
/// c are the chart components of sigma.
Vec stratonovich_first_order(const Chart& chart, const VectorField& sigma,
                             const Vec& xi0, const Vec& c0) {
  const int n = static_cast<int>(xi0.size());
  Mat dc(n, n);
  for (int j = 0; j < n; ++j) {
    Vec xp = xi0, xm = xi0;
    xp[j] += kFdStep;
    xm[j] -= kFdStep;
    dc.col(j) = (chart_field(chart, sigma, xp) - chart_field(chart, sigma, xm)) /
                (2.0 * kFdStep);
  }
  return dc * c0;
}

}  // namespace

TangentVector covariant_derivative(const ManifoldPtr& m, const VectorField& sigma,
                                   const Vec& x) {
  const Vec v = sigma.value(x);
  const Vec ambient = field_jacobian(sigma, x) * v;
  return TangentVector{ManifoldPoint(m, x), m->tangent_projector(x, ambient)};
}

Diffusor stratonovich_generator(const ManifoldPtr& m, const VectorField& sigma,
                                const Vec& x) {
  m->require_on_manifold(x);
  const Chart& chart = m->chart_for(x);
  const Vec xi0 = chart.to_coords(x);
  const Vec c0 = chart.forward_jacobian(x) * sigma.value(x);
  Diffusor out{ManifoldPoint(m, x), &chart, Vec(), Mat()};
  out.first_order = stratonovich_first_order(chart, sigma, xi0, c0);
  out.second_order = c0 * c0.transpose();
  return out;
}

Diffusor ito_generator(const ManifoldPtr& m, const VectorField& sigma, const Vec& x) {
  Diffusor out = stratonovich_generator(m, sigma, x);
  const TangentVector nss = covariant_derivative(m, sigma, x);
  out.first_order -= chart_components(*out.chart, x, nss.vec);
  return out;
}

GeneratorChoice GeneratorChoice::custom(CustomFn fn, const ManifoldPtr& m,
                                        std::uint64_t seed, int n_checks,
                                        double tol) {
  GeneratorChoice g(Kind::Custom, std::move(fn));
  CounterRng rng(seed, 0x5eedc0de);
  for (int i = 0; i < n_checks; ++i) {
    const Vec x = m->sample(rng);
    Vec dir(m->ambient_dim);
    for (int j = 0; j < m->ambient_dim; ++j) dir[j] = rng.normal();
    const Vec y = m->tangent_projector(x, dir);
    const VectorField field = projected_field(m, y);
    const Diffusor d = g.diffusor(m, field, x);
    const Vec c = chart_components(*d.chart, x, y);
    const double err = (d.second_order - c * c.transpose()).cwiseAbs().maxCoeff();
    if (err > tol) {
      fail(ErrorCode::ConfigInvalid,
           "custom generator rejected: symbol condition violated (err=" +
               std::to_string(err) + ")");
    }
  }
  return g;
}

Diffusor GeneratorChoice::diffusor(const ManifoldPtr& m, const VectorField& sigma,
                                   const Vec& x) const {
  switch (kind_) {
    case Kind::Ito: return ito_generator(m, sigma, x);
    case Kind::Stratonovich: return stratonovich_generator(m, sigma, x);
    case Kind::Custom: return custom_(m, sigma, x);
  }
  fail(ErrorCode::ConfigInvalid, "unreachable generator kind");
}

double GeneratorChoice::apply(const ManifoldPtr& m, const VectorField& sigma,
                              const Vec& x,
                              const std::function<double(const Vec&)>& f) const {
  // sigma[sigma[f]] by nested directional derivatives along the field, then
  // the first-order correction relative to the Stratonovich generator.
  auto sigma_f = [&](const Vec& z) {
    return directional_derivative_scalar(m, z, sigma.value(z), f);
  };
  double out = directional_derivative_scalar(m, x, sigma.value(x), sigma_f);
  switch (kind_) {
    case Kind::Stratonovich:
      break;
    case Kind::Ito: {
      const TangentVector nss = covariant_derivative(m, sigma, x);
      out -= directional_derivative_scalar(m, x, nss.vec, f);
      break;
    }
    case Kind::Custom: {
      const TangentVector corr = correction_stratonovich(m, sigma, x);
      out += directional_derivative_scalar(m, x, corr.vec, f);
      break;
    }
  }
  return out;
}

TangentVector GeneratorChoice::correction_stratonovich(const ManifoldPtr& m,
                                                       const VectorField& sigma,
                                                       const Vec& x) const {
  switch (kind_) {
    case Kind::Stratonovich:
      return TangentVector{ManifoldPoint(m, x), Vec::Zero(m->ambient_dim)};
    case Kind::Ito: {
      TangentVector nss = covariant_derivative(m, sigma, x);
      nss.vec = -nss.vec;
      return nss;
    }
    case Kind::Custom: {
      // Difference of diffusors with equal symbols: first-order in the chart,
      // mapped back to an ambient tangent vector.
      const Diffusor g = custom_(m, sigma, x);
      const Diffusor gs = stratonovich_generator(m, sigma, x);
      if (g.chart != gs.chart) {
        fail(ErrorCode::ConfigInvalid,
             "custom generator must use the manifold's preferred chart (chart_for)");
      }
      const Vec diff = g.first_order - gs.first_order;
      const Vec xi = gs.base_coords();
      return TangentVector{ManifoldPoint(m, x),
                           m->tangent_projector(x, gs.chart->inverse_jacobian(xi) * diff)};
    }
  }
  fail(ErrorCode::ConfigInvalid, "unreachable generator kind");
}

TangentVector GeneratorChoice::correction_ito(const ManifoldPtr& m,
                                              const VectorField& sigma,
                                              const Vec& x) const {
  // (G - G_I) = (G - G_S) + (G_S - G_I) = correction_S + nabla_sigma sigma.
  TangentVector corr = correction_stratonovich(m, sigma, x);
  corr.vec += covariant_derivative(m, sigma, x).vec;
  return corr;
}

TangentVector generator_correction(const GeneratorChoice& g, const ManifoldPtr& m,
                                   const VectorField& sigma, const Vec& x) {
  return g.correction_stratonovich(m, sigma, x);
}

}  // namespace sdae
