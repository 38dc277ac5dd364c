#include "sdae/manifold.hpp"

#include <cmath>
#include <limits>

namespace sdae {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPoint: return "invalid-point";
    case ErrorCode::DegenerateRetraction: return "degenerate-retraction";
    case ErrorCode::UnsupportedMetric: return "unsupported-metric";
    case ErrorCode::ChartDomain: return "chart-domain";
    case ErrorCode::SingularConstraint: return "singular-constraint";
    case ErrorCode::DegenerateDirection: return "degenerate-direction";
    case ErrorCode::CutLocusProximity: return "cut-locus-proximity";
    case ErrorCode::StiffnessCap: return "stiffness-cap";
    case ErrorCode::FallbackFailure: return "fallback-failure";
    case ErrorCode::LocalMinimum: return "local-minimum";
    case ErrorCode::SamplingFailure: return "sampling-failure";
    case ErrorCode::SchemeMismatch: return "scheme-mismatch";
    case ErrorCode::ConfigInvalid: return "config-invalid";
    case ErrorCode::UnknownProblem: return "unknown-problem";
  }
  return "unknown";
}

Mat Chart::forward_jacobian(const Vec& x) const {
  if (jac_forward) return jac_forward(x);
  const int q = static_cast<int>(x.size());
  const Vec xi0 = to_coords(x);
  Mat jac(xi0.size(), q);
  for (int j = 0; j < q; ++j) {
    Vec xp = x, xm = x;
    xp[j] += kFdStep;
    xm[j] -= kFdStep;
    jac.col(j) = (to_coords(xp) - to_coords(xm)) / (2.0 * kFdStep);
  }
  return jac;
}

Mat Chart::inverse_jacobian(const Vec& xi) const {
  if (jac_inverse) return jac_inverse(xi);
  const int n = static_cast<int>(xi.size());
  const Vec x0 = from_coords(xi);
  Mat jac(x0.size(), n);
  for (int j = 0; j < n; ++j) {
    Vec xp = xi, xm = xi;
    xp[j] += kFdStep;
    xm[j] -= kFdStep;
    jac.col(j) = (from_coords(xp) - from_coords(xm)) / (2.0 * kFdStep);
  }
  return jac;
}

bool Manifold::on_manifold(const Vec& x, double tol) const {
  if (x.size() != ambient_dim) return false;
  if (!defining_residual) return true;
  const Vec r = defining_residual(x);
  return r.size() == 0 || r.cwiseAbs().maxCoeff() <= tol;
}

void Manifold::require_on_manifold(const Vec& x, double tol) const {
  if (!on_manifold(x, tol)) {
    fail(ErrorCode::InvalidPoint,
         "point is not on manifold '" + name + "' within tolerance");
  }
}

const Chart& Manifold::chart_for(const Vec& x) const {
  if (charts.empty()) {
    fail(ErrorCode::ChartDomain, "manifold '" + name + "' has no charts");
  }
  // Prefer the chart whose excluded locus is farthest: measured by the norm
  // of the chart coordinates (stereographic blows up near its pole).
  const Chart* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& c : charts) {
    if (c.domain && !c.domain(x)) continue;
    const double score = c.to_coords(x).norm();
    if (score < best_score) {
      best_score = score;
      best = &c;
    }
  }
  if (!best) {
    fail(ErrorCode::ChartDomain,
         "point lies in no chart domain of manifold '" + name + "'");
  }
  return *best;
}

ManifoldPoint::ManifoldPoint(ManifoldPtr m, Vec x) : manifold(std::move(m)), coords(std::move(x)) {
  manifold->require_on_manifold(coords);
}

// ---------------------------------------------------------------------------
// Unit sphere S^{q-1}
// ---------------------------------------------------------------------------

namespace {

Chart stereographic_chart(int q, double pole_sign) {
  // Projection from the pole p = pole_sign * e_q onto the equatorial plane.
  Chart c;
  c.name = pole_sign > 0 ? "stereographic-from-north" : "stereographic-from-south";
  const int n = q - 1;
  c.domain = [q, pole_sign](const Vec& x) {
    return 1.0 - pole_sign * x[q - 1] > 1e-12;
  };
  c.to_coords = [q, n, pole_sign](const Vec& x) {
    const double denom = 1.0 - pole_sign * x[q - 1];
    if (denom <= 1e-12) {
      fail(ErrorCode::ChartDomain, "stereographic projection pole excluded");
    }
    return Vec(x.head(n) / denom);
  };
  c.from_coords = [q, n, pole_sign](const Vec& xi) {
    const double r2 = xi.squaredNorm();
    Vec x(q);
    x.head(n) = 2.0 * xi / (1.0 + r2);
    x[q - 1] = pole_sign * (r2 - 1.0) / (1.0 + r2);
    return x;
  };
  c.jac_forward = [q, n, pole_sign](const Vec& x) {
    const double denom = 1.0 - pole_sign * x[q - 1];
    Mat jac = Mat::Zero(n, q);
    for (int i = 0; i < n; ++i) {
      jac(i, i) = 1.0 / denom;
      jac(i, q - 1) = pole_sign * x[i] / (denom * denom);
    }
    return jac;
  };
  c.jac_inverse = [q, n, pole_sign](const Vec& xi) {
    const double s = 1.0 + xi.squaredNorm();
    Mat jac(q, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        jac(i, j) = (i == j ? 2.0 / s : 0.0) - 4.0 * xi[i] * xi[j] / (s * s);
      }
      jac(q - 1, j) = pole_sign * 4.0 * xi[j] / (s * s);
    }
    return jac;
  };
  return c;
}

}  // namespace

ManifoldPtr make_unit_sphere(int ambient_dim) {
  auto m = std::make_shared<Manifold>();
  const int q = ambient_dim;
  m->name = "S" + std::to_string(q - 1);
  m->dim = q - 1;
  m->ambient_dim = q;
  m->defining_residual = [](const Vec& x) {
    Vec r(1);
    r[0] = x.squaredNorm() - 1.0;
    return r;
  };
  m->tangent_projector = [](const Vec& x, const Vec& v) {
    return Vec(v - (x.dot(v)) * x);
  };
  m->retraction = [](const Vec& y) {
    const double norm = y.norm();
    if (norm < 1e-8) {
      fail(ErrorCode::DegenerateRetraction,
           "sphere retraction undefined near the origin");
    }
    return Vec(y / norm);
  };
  m->distance = [](const Vec& x, const Vec& y) {
    const double c = std::clamp(x.dot(y), -1.0, 1.0);
    return std::acos(c);
  };
  m->injectivity_radius = [](const Vec&) { return 3.14159265358979323846; };
  m->sample = [q](CounterRng& rng) {
    Vec x(q);
    double norm2 = 0.0;
    do {
      for (int i = 0; i < q; ++i) x[i] = rng.normal();
      norm2 = x.squaredNorm();
    } while (norm2 < 1e-12);
    return Vec(x / std::sqrt(norm2));
  };
  m->charts.push_back(stereographic_chart(q, +1.0));
  m->charts.push_back(stereographic_chart(q, -1.0));
  return m;
}

ManifoldPtr make_euclidean(int k, double sample_bound) {
  auto m = std::make_shared<Manifold>();
  m->name = "R" + std::to_string(k);
  m->dim = k;
  m->ambient_dim = k;
  m->defining_residual = [](const Vec&) { return Vec(0); };
  m->tangent_projector = [](const Vec&, const Vec& v) { return v; };
  m->retraction = [](const Vec& y) { return y; };
  m->distance = [](const Vec& x, const Vec& y) { return (x - y).norm(); };
  m->injectivity_radius = [](const Vec&) {
    return std::numeric_limits<double>::infinity();
  };
  m->sample = [k, sample_bound](CounterRng& rng) {
    Vec x(k);
    for (int i = 0; i < k; ++i) x[i] = rng.uniform(-sample_bound, sample_bound);
    return x;
  };
  Chart id;
  id.name = "identity";
  id.domain = [](const Vec&) { return true; };
  id.to_coords = [](const Vec& x) { return x; };
  id.from_coords = [](const Vec& xi) { return xi; };
  id.jac_forward = [k](const Vec&) { return Mat(Mat::Identity(k, k)); };
  id.jac_inverse = [k](const Vec&) { return Mat(Mat::Identity(k, k)); };
  m->charts.push_back(std::move(id));
  return m;
}

ManifoldPtr make_real_line() { return make_euclidean(1); }

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

TangentVector project_tangent(const ManifoldPtr& m, const Vec& x, const Vec& v) {
  m->require_on_manifold(x);
  return TangentVector{ManifoldPoint(m, x), m->tangent_projector(x, v)};
}

ManifoldPoint retract(const ManifoldPtr& m, const Vec& y) {
  return ManifoldPoint(m, m->retraction(y));
}

double geodesic_distance(const ManifoldPtr& m, const Vec& x, const Vec& y) {
  if (!m->distance) {
    fail(ErrorCode::UnsupportedMetric,
         "manifold '" + m->name + "' provides no distance map");
  }
  m->require_on_manifold(x);
  m->require_on_manifold(y);
  return m->distance(x, y);
}

TangentVector riemannian_gradient(const ManifoldPtr& m, const Vec& x, const Vec& df) {
  return project_tangent(m, x, df);
}

Vec directional_derivative(const ManifoldPtr& m, const Vec& x, const Vec& v,
                           const std::function<Vec(const Vec&)>& f, double step) {
  const Vec fp = f(m->retraction(x + step * v));
  const Vec fm = f(m->retraction(x - step * v));
  return (fp - fm) / (2.0 * step);
}

double directional_derivative_scalar(const ManifoldPtr& m, const Vec& x, const Vec& v,
                                     const std::function<double(const Vec&)>& f,
                                     double step) {
  const double fp = f(m->retraction(x + step * v));
  const double fm = f(m->retraction(x - step * v));
  return (fp - fm) / (2.0 * step);
}

double directional_derivative_scalar_o4(const ManifoldPtr& m, const Vec& x,
                                        const Vec& v,
                                        const std::function<double(const Vec&)>& f,
                                        double step) {
  const double f2p = f(m->retraction(x + 2.0 * step * v));
  const double f1p = f(m->retraction(x + step * v));
  const double f1m = f(m->retraction(x - step * v));
  const double f2m = f(m->retraction(x - 2.0 * step * v));
  return (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * step);
}

Vec chart_roundtrip(const Chart& chart, const Vec& x) {
  if (chart.domain && !chart.domain(x)) {
    fail(ErrorCode::ChartDomain,
         "point outside the domain of chart '" + chart.name + "'");
  }
  return chart.from_coords(chart.to_coords(x));
}

Mat tangent_basis(const ManifoldPtr& m, const Vec& x) {
  const int q = m->ambient_dim;
  Mat projected(q, q);
  for (int j = 0; j < q; ++j) {
    projected.col(j) = m->tangent_projector(x, Vec::Unit(q, j));
  }
  // Orthonormalize and keep the n leading directions.
  Eigen::ColPivHouseholderQR<Mat> qr(projected);
  Mat full = qr.householderQ();
  return full.leftCols(m->dim);
}

}  // namespace sdae
