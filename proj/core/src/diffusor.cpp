#include "sdae/diffusor.hpp"

namespace sdae {

Vec ChartScalar::grad(const Vec& xi) const {
  if (gradient) return gradient(xi);
  const int n = static_cast<int>(xi.size());
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = xi, xm = xi;
    xp[i] += kFdStep;
    xm[i] -= kFdStep;
    g[i] = (value(xp) - value(xm)) / (2.0 * kFdStep);
  }
  return g;
}

Mat ChartScalar::hess(const Vec& xi) const {
  if (hessian) return hessian(xi);
  const int n = static_cast<int>(xi.size());
  const double h = kFdStep;
  Mat H(n, n);
  const double f0 = value(xi);
  for (int i = 0; i < n; ++i) {
    Vec xp = xi, xm = xi;
    xp[i] += h;
    xm[i] -= h;
    H(i, i) = (value(xp) - 2.0 * f0 + value(xm)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Vec xpp = xi, xpm = xi, xmp = xi, xmm = xi;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      H(i, j) = (value(xpp) - value(xpm) - value(xmp) + value(xmm)) / (4.0 * h * h);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

ChartScalar ChartScalar::product(const ChartScalar& f, const ChartScalar& g) {
  ChartScalar out;
  out.value = [f, g](const Vec& xi) { return f.value(xi) * g.value(xi); };
  if (f.gradient && g.gradient) {
    out.gradient = [f, g](const Vec& xi) {
      return Vec(f.value(xi) * g.gradient(xi) + g.value(xi) * f.gradient(xi));
    };
  }
  if (f.gradient && g.gradient && f.hessian && g.hessian) {
    out.hessian = [f, g](const Vec& xi) {
      const Vec gf = f.gradient(xi), gg = g.gradient(xi);
      Mat H = f.value(xi) * g.hessian(xi) + g.value(xi) * f.hessian(xi);
      H += gf * gg.transpose() + gg * gf.transpose();
      return H;
    };
  }
  return out;
}

ChartScalar chart_scalar_from_ambient(const Chart& chart,
                                      std::function<double(const Vec&)> f) {
  ChartScalar out;
  out.value = [from = chart.from_coords, f = std::move(f)](const Vec& xi) {
    return f(from(xi));
  };
  return out;
}

double apply_diffusor(const Diffusor& L, const ChartScalar& f) {
  if (L.chart->domain && !L.chart->domain(L.base.coords)) {
    fail(ErrorCode::ChartDomain, "diffusor base point outside chart domain");
  }
  const Vec xi = L.base_coords();
  double out = L.first_order.dot(f.grad(xi));
  out += (L.second_order.cwiseProduct(f.hess(xi))).sum();
  return out;
}

double apply_diffusor(const Diffusor& L, const std::function<double(const Vec&)>& f) {
  return apply_diffusor(L, chart_scalar_from_ambient(*L.chart, f));
}

Mat hat(const Diffusor& L) { return L.second_order; }

double hat_apply(const Diffusor& L, const ChartScalar& f, const ChartScalar& g) {
  const Vec xi = L.base_coords();
  return f.grad(xi).dot(L.second_order * g.grad(xi));
}

Diffusor pushforward_diffusor(const SmoothMap& phi, const Diffusor& L) {
  const Vec x = L.base.coords;
  const Vec y = phi.value(x);
  phi.codomain->require_on_manifold(y);
  const Chart& chart_n = phi.codomain->chart_for(y);
  const Chart& chart_m = *L.chart;

  // Component functions of phi in the two charts.
  const int n = static_cast<int>(L.first_order.size());
  const int k = phi.codomain->dim;
  auto phi_hat = [&](const Vec& xi) {
    return chart_n.to_coords(phi.value(chart_m.from_coords(xi)));
  };

  const Vec xi0 = L.base_coords();
  // First and second chart derivatives of phi_hat by central differences.
  Mat jac(k, n);
  std::vector<Mat> hess(k, Mat(n, n));
  const double h = kFdStep;
  const Vec f0 = phi_hat(xi0);
  for (int j = 0; j < n; ++j) {
    Vec xp = xi0, xm = xi0;
    xp[j] += h;
    xm[j] -= h;
    const Vec fp = phi_hat(xp), fm = phi_hat(xm);
    jac.col(j) = (fp - fm) / (2.0 * h);
    for (int c = 0; c < k; ++c) hess[c](j, j) = (fp[c] - 2.0 * f0[c] + fm[c]) / (h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Vec xpp = xi0, xpm = xi0, xmp = xi0, xmm = xi0;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      const Vec v = (phi_hat(xpp) - phi_hat(xpm) - phi_hat(xmp) + phi_hat(xmm)) / (4.0 * h * h);
      for (int c = 0; c < k; ++c) {
        hess[c](i, j) = v[c];
        hess[c](j, i) = v[c];
      }
    }
  }

  Diffusor out{ManifoldPoint(phi.codomain, y), &chart_n, Vec(k), Mat(k, k)};
  for (int c = 0; c < k; ++c) {
    out.first_order[c] = L.first_order.dot(jac.row(c)) +
                         (L.second_order.cwiseProduct(hess[c])).sum();
  }
  out.second_order = jac * L.second_order * jac.transpose();
  return out;
}

}  // namespace sdae
