#include "sdae/problems.hpp"

#include <cmath>

namespace sdae {

namespace {

constexpr double kMinChartRadius = 1e-12;

struct PolarTerms {
  double r, s3, c3;  // radius, sin(3 theta), cos(3 theta)
};

PolarTerms polar_terms(const Vec& xi) {
  const double r = std::hypot(xi[0], xi[1]);
  if (r < kMinChartRadius) {
    fail(ErrorCode::ChartDomain,
         "constraint undefined at the chart origin (south pole)");
  }
  const double theta = std::atan2(xi[1], xi[0]);
  return {r, std::sin(3.0 * theta), std::cos(3.0 * theta)};
}

double sphere_h_value(const Vec& xi) {
  const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
  if (r2 < kMinChartRadius * kMinChartRadius) {
    fail(ErrorCode::ChartDomain,
         "constraint undefined at the chart origin (south pole)");
  }
  const double r = std::sqrt(r2);
  return 1.0 + (3.0 * xi[1] * xi[0] * xi[0] - xi[1] * xi[1] * xi[1]) / (r2 * r) - r;
}

Vec sphere_h_gradient(const Vec& xi) {
  const PolarTerms t = polar_terms(xi);
  const double X = xi[0], Y = xi[1];
  const double r2 = t.r * t.r;
  Vec g(2);
  g[0] = -3.0 * Y * t.c3 / r2 - X / t.r;
  g[1] = 3.0 * X * t.c3 / r2 - Y / t.r;
  return g;
}

Mat sphere_h_hessian(const Vec& xi) {
  const PolarTerms t = polar_terms(xi);
  const double X = xi[0], Y = xi[1];
  const double r3 = t.r * t.r * t.r;
  const double r4 = r3 * t.r;
  Mat h(2, 2);
  h(0, 0) = (-9.0 * Y * Y * t.s3 + 6.0 * X * Y * t.c3) / r4 - 1.0 / t.r + X * X / r3;
  h(0, 1) = -3.0 * t.c3 / (t.r * t.r) +
            (9.0 * X * Y * t.s3 + 6.0 * Y * Y * t.c3) / r4 + X * Y / r3;
  h(1, 0) = h(0, 1);
  h(1, 1) = (-9.0 * X * X * t.s3 - 6.0 * X * Y * t.c3) / r4 - 1.0 / t.r + Y * Y / r3;
  return h;
}

// Chart components of the projected coordinate fields K1 = P(e3), K2 = P(e2)
// in the stereographic chart from the north pole, with their Jacobians and
// the ambient inner products c . x needed for nabla_K K = -(c . x) K.
struct SphereChartFields {
  Vec k1, k2;
  Mat dk1, dk2;
  double x2, x3;  // ambient coordinates of the base point
};

SphereChartFields sphere_chart_fields(const Vec& xi) {
  SphereChartFields f;
  const double X = xi[0], Y = xi[1];
  const double s = 1.0 + X * X + Y * Y;
  f.k1 = Vec(2);
  f.k1 << X, Y;
  f.k2 = Vec(2);
  f.k2 << -X * Y, 0.5 * (1.0 + X * X - Y * Y);
  f.dk1 = Mat::Identity(2, 2);
  f.dk2 = Mat(2, 2);
  f.dk2 << -Y, -X, X, -Y;
  f.x2 = 2.0 * Y / s;
  f.x3 = (X * X + Y * Y - 1.0) / s;
  return f;
}

/// G_I(K)[f] in the chart for a projected field K with c . x = cx:
/// K'Hf K + (DK K) . grad f + cx (K . grad f).
double ito_apply_chart(const Vec& k, const Mat& dk, double cx, const Vec& grad,
                       const Mat& hess) {
  return k.dot(hess * k) + (dk * k).dot(grad) + cx * k.dot(grad);
}

const Chart& sphere_north_chart(const ManifoldPtr& sphere) {
  return sphere->charts.front();
}

Vec to_north_chart(const ManifoldPtr& sphere, const Vec& x) {
  const Chart& chart = sphere_north_chart(sphere);
  if (!chart.domain(x)) {
    fail(ErrorCode::ChartDomain,
         "point outside the stereographic chart from the north pole");
  }
  return chart.to_coords(x);
}

}  // namespace

ChartScalar sphere_constraint_chart() {
  ChartScalar h;
  h.value = sphere_h_value;
  h.gradient = sphere_h_gradient;
  h.hessian = sphere_h_hessian;
  return h;
}

SphereYTerms sphere_y_terms(const Vec& x, double noise_scale) {
  static const ManifoldPtr sphere = make_unit_sphere(3);
  const Vec xi = to_north_chart(sphere, x);
  const Vec grad = sphere_h_gradient(xi);
  const Mat hess = sphere_h_hessian(xi);
  const SphereChartFields f = sphere_chart_fields(xi);

  SphereYTerms out;
  out.h = sphere_h_value(xi);
  out.dh_k1 = grad.dot(f.k1);
  out.dh_k2 = grad.dot(f.k2);
  const double g1 = ito_apply_chart(f.k1, f.dk1, f.x3, grad, hess);
  const double g2 = ito_apply_chart(f.k2, f.dk2, f.x2, grad, hess);
  out.gterm = 0.5 * noise_scale * noise_scale * (g1 + g2);
  return out;
}

double sphere_closed_form_u(const Vec& x, double b, double noise_scale,
                            double drift_scale, double denom_guard) {
  const SphereYTerms t = sphere_y_terms(x, noise_scale);
  if (std::abs(t.dh_k1) <= denom_guard) {
    fail(ErrorCode::DegenerateDirection,
         "closed-form u undefined: |dh . K1| below the denominator guard");
  }
  return (-b * t.h - drift_scale * t.dh_k2 - t.gterm) / t.dh_k1;
}

SDAEProblem sphere_problem(double noise_scale, double drift_scale) {
  SDAEProblem p;
  p.name = "sphere_example";
  p.state_manifold = make_unit_sphere(3);
  p.algebraic_manifold = make_real_line();
  p.target_manifold = make_real_line();
  p.generator = GeneratorChoice::ito();
  p.h_depends_on_u = false;
  p.default_y_form = YForm::Linear;

  const ManifoldPtr sphere = p.state_manifold;
  auto k_field = [sphere](const Vec& x, int axis) {
    return Vec(sphere->tangent_projector(x, Vec::Unit(3, axis)));
  };

  p.drift = [k_field, drift_scale](const Vec& x, const Vec& u) {
    return Vec(drift_scale * k_field(x, 1) + u[0] * k_field(x, 2));
  };
  p.diffusions.push_back([k_field, noise_scale](const Vec& x, const Vec&) {
    return Vec(noise_scale * k_field(x, 2));  // sigma_1 = noise K1
  });
  p.diffusions.push_back([k_field, noise_scale](const Vec& x, const Vec&) {
    return Vec(noise_scale * k_field(x, 1));  // sigma_2 = noise K2
  });

  p.constraint = [sphere](const Vec& x, const Vec&) {
    Vec h(1);
    h[0] = sphere_h_value(to_north_chart(sphere, x));
    return h;
  };
  p.d1h = [sphere](const Vec& x, const Vec&) {
    const Chart& chart = sphere_north_chart(sphere);
    const Vec xi = to_north_chart(sphere, x);
    Mat d(1, 3);
    d.row(0) = (chart.forward_jacobian(x).transpose() * sphere_h_gradient(xi))
                   .transpose();
    return d;
  };

  p.target_point = Vec::Zero(1);
  p.initial_state = Vec(3);
  p.initial_state << 1.0, 0.0, 0.0;
  p.initial_algebraic = Vec::Zero(1);

  p.fast_y = [noise_scale, drift_scale](double b, const Vec& x, const Vec& u,
                                        YForm form) {
    const SphereYTerms t = sphere_y_terms(x, noise_scale);
    const double du_pairing = drift_scale * t.dh_k2 + u[0] * t.dh_k1;
    if (form == YForm::Linear) {
      return b * t.h + du_pairing + t.gterm;
    }
    // Squared form: f = h^2, so grad f = 2 h grad h and the generator terms
    // gain 2 (dh . K)^2 alongside 2 h G_I(K)[h].
    static const ManifoldPtr sphere = make_unit_sphere(3);
    const Vec xi = to_north_chart(sphere, x);
    const SphereChartFields f = sphere_chart_fields(xi);
    const Vec grad = sphere_h_gradient(xi);
    const double n2 = noise_scale * noise_scale;
    const double quad =
        n2 * (std::pow(grad.dot(f.k1), 2) + std::pow(grad.dot(f.k2), 2));
    return b * t.h * t.h + 2.0 * t.h * (du_pairing + t.gterm) + quad;
  };
  p.analytic_d2y = [noise_scale, drift_scale](double, const Vec& x, const Vec&,
                                              YForm form) {
    const SphereYTerms t = sphere_y_terms(x, noise_scale);
    Vec d(1);
    d[0] = form == YForm::Linear ? t.dh_k1 : 2.0 * t.h * t.dh_k1;
    return d;
  };
  return p;
}

std::vector<Vec> sphere_constraint_curve(int n_rays, double tol) {
  const ManifoldPtr sphere = make_unit_sphere(3);
  const Chart& chart = sphere_north_chart(sphere);
  std::vector<Vec> points;
  const double two_pi = 6.283185307179586476925287;
  for (int k = 0; k < n_rays; ++k) {
    const double theta = two_pi * k / n_rays;
    const Vec dir = (Vec(2) << std::cos(theta), std::sin(theta)).finished();
    auto h_at = [&](double r) { return sphere_h_value(Vec(r * dir)); };
    double lo = 1e-6, hi = 3.5;
    double h_lo = h_at(lo);
    if (!(h_lo > 0.0)) continue;  // petal pinches into the chart origin here
    // h = 1 + angular(theta) - r is strictly decreasing in r along the ray.
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (h_at(mid) > 0.0 ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    if (std::abs(h_at(r)) <= tol) {
      points.push_back(chart.from_coords(Vec(r * dir)));
    }
  }
  return points;
}

SDAEProblem euclidean_index1_problem() {
  SDAEProblem p;
  p.name = "euclidean_index1";
  p.state_manifold = make_real_line();
  p.algebraic_manifold = make_real_line();
  p.target_manifold = make_real_line();
  p.generator = GeneratorChoice::ito();
  p.h_depends_on_u = true;
  p.default_y_form = YForm::SquaredDistance;

  p.drift = [](const Vec&, const Vec&) { return Vec::Ones(1); };
  p.diffusions.push_back([](const Vec&, const Vec&) {
    return Vec(0.2 * Vec::Ones(1));
  });
  p.constraint = [](const Vec& x, const Vec& u) {
    Vec h(1);
    h[0] = u[0] - std::sin(x[0]);
    return h;
  };
  p.d1h = [](const Vec& x, const Vec&) {
    Mat d(1, 1);
    d(0, 0) = -std::cos(x[0]);
    return d;
  };
  p.d2h = [](const Vec&, const Vec&) { return Mat(Mat::Ones(1, 1)); };
  p.target_point = Vec::Zero(1);
  p.initial_state = Vec::Zero(1);
  p.initial_algebraic = Vec::Zero(1);
  return p;
}

SDAEProblem euclidean_tangent_noise_problem() {
  SDAEProblem p;
  p.name = "euclidean_tangent_noise";
  p.state_manifold = make_euclidean(2);
  p.algebraic_manifold = make_real_line();
  p.target_manifold = make_real_line();
  p.generator = GeneratorChoice::ito();
  p.h_depends_on_u = false;
  p.default_y_form = YForm::SquaredDistance;

  p.drift = [](const Vec& x, const Vec& u) {
    Vec v(2);
    v << 0.5 * u[0] - x[0], 1.0;
    return v;
  };
  p.diffusions.push_back([](const Vec&, const Vec&) {
    Vec s(2);
    s << 0.0, 1.0;
    return s;
  });
  p.constraint = [](const Vec& x, const Vec&) {
    Vec h(1);
    h[0] = x[0];
    return h;
  };
  p.d1h = [](const Vec&, const Vec&) {
    Mat d(1, 2);
    d << 1.0, 0.0;
    return d;
  };
  p.target_point = Vec::Zero(1);
  p.initial_state = Vec::Zero(2);
  p.initial_algebraic = Vec::Zero(1);
  return p;
}

const std::vector<ProblemRegistryEntry>& problem_registry() {
  static const std::vector<ProblemRegistryEntry> registry = [] {
    std::vector<ProblemRegistryEntry> r;
    r.push_back({"sphere_example", [] { return sphere_problem(); },
                 [](const Vec& x, double b) { return sphere_closed_form_u(x, b); },
                 "SDE on the unit sphere with two projected coordinate noise "
                 "fields and a rose-curve constraint in the stereographic "
                 "chart; completely high index and ill-posed."});
    r.push_back({"euclidean_index1", [] { return euclidean_index1_problem(); },
                 nullptr,
                 "Scalar index-1 problem h(x, u) = u - sin(x) exercising the "
                 "reduction to a coupled SDE."});
    r.push_back({"euclidean_tangent_noise",
                 [] { return euclidean_tangent_noise_problem(); }, nullptr,
                 "Completely-high-index problem on R^2 whose noise stays in "
                 "the constraint kernel; exercises the degenerate-D2Y "
                 "fallback of the approximate algorithm."});
    return r;
  }();
  return registry;
}

const ProblemRegistryEntry& find_problem(const std::string& name) {
  for (const auto& entry : problem_registry()) {
    if (entry.name == name) return entry;
  }
  fail(ErrorCode::UnknownProblem, "unknown problem '" + name + "'");
}

}  // namespace sdae
