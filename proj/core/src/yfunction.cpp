#include "sdae/yfunction.hpp"

#include <cmath>

namespace sdae {

namespace {

/// Outer step for nested directional derivatives: wider than kFdStep so the
/// inner difference noise does not dominate the outer quotient.
constexpr double kFdStepOuter = 3e-4;

/// Inner step of the nested sigma[sigma[g]] evaluation. Roundoff in the
/// inner quotient is amplified by every enclosing difference, so this one
/// is widest; its truncation error is smooth and differentiates cleanly.
constexpr double kFdStepNestedInner = 1e-3;

}  // namespace

TargetFunctional squared_distance_functional(const ManifoldPtr& p_manifold,
                                             const Vec& p) {
  TargetFunctional f;
  if (!p_manifold->distance) {
    fail(ErrorCode::UnsupportedMetric,
         "target manifold '" + p_manifold->name + "' provides no distance map");
  }
  const bool flat = p_manifold->defining_residual(p).size() == 0;
  if (flat) {
    f.value = [p](const Vec& z) { return (z - p).squaredNorm(); };
    f.gradient = [p](const Vec& z) { return Vec(2.0 * (z - p)); };
    return f;
  }
  f.value = [p, p_manifold](const Vec& z) {
    const double d = p_manifold->distance(z, p);
    return d * d;
  };
  if (p_manifold->name.size() > 1 && p_manifold->name[0] == 'S') {
    // Unit sphere: Delta = arccos(z . p). The ambient representative -g p
    // pairs correctly with tangent vectors; g -> 2 smoothly as z -> p.
    f.gradient = [p](const Vec& z) {
      const double c = std::clamp(z.dot(p), -1.0, 1.0);
      const double s2 = 1.0 - c * c;
      double g;
      if (s2 < 1e-14) {
        g = c > 0 ? 2.0 : 0.0;  // limit at p; the cut locus is guarded upstream
      } else {
        g = 2.0 * std::acos(c) / std::sqrt(s2);
      }
      return Vec(-g * p);
    };
    return f;
  }
  // Generic fallback: finite differences of Delta_p^2 on P.
  f.gradient = [p_manifold, value = f.value](const Vec& z) {
    const int q = p_manifold->ambient_dim;
    Vec g(q);
    for (int j = 0; j < q; ++j) {
      g[j] = directional_derivative_scalar(p_manifold, z, Vec::Unit(q, j), value);
    }
    return g;
  };
  return f;
}

TargetFunctional linear_functional(const ManifoldPtr& p_manifold, const Vec& p) {
  if (p_manifold->ambient_dim != 1 || p_manifold->dim != 1) {
    fail(ErrorCode::ConfigInvalid,
         "linear Y form requires the target manifold to be the real line");
  }
  TargetFunctional f;
  f.value = [p](const Vec& z) { return z[0] - p[0]; };
  f.gradient = [](const Vec&) {
    Vec g(1);
    g[0] = 1.0;
    return g;
  };
  return f;
}

TargetFunctional target_functional(const SDAEProblem& problem, YForm form) {
  if (form == YForm::Linear) {
    return linear_functional(problem.target_manifold, problem.target_point);
  }
  return squared_distance_functional(problem.target_manifold, problem.target_point);
}

double composed_constraint_drift(const SDAEProblem& problem, const Vec& x,
                                 const Vec& u, const TargetFunctional& f) {
  const auto& m = problem.state_manifold;
  auto g = [&](const Vec& z) { return f.value(problem.constraint(z, u)); };

  double out = directional_derivative_scalar_o4(m, x, problem.drift(x, u), g);
  for (int l = 0; l < problem.driver_count(); ++l) {
    const VectorField sigma = problem.diffusion_field(l, u);
    // G(sigma)[g] = sigma[sigma[g]] + (G - G_S)(sigma)[g].
    auto sigma_g = [&](const Vec& z) {
      return directional_derivative_scalar_o4(m, z, sigma.value(z), g,
                                              kFdStepNestedInner);
    };
    double term =
        directional_derivative_scalar_o4(m, x, sigma.value(x), sigma_g, kFdStepOuter);
    const TangentVector corr =
        problem.generator.correction_stratonovich(m, sigma, x);
    if (corr.vec.norm() > 0.0) {
      term += directional_derivative_scalar_o4(m, x, corr.vec, g);
    }
    out += 0.5 * term;
  }
  return out;
}

double decomposed_constraint_drift(const SDAEProblem& problem, const Vec& x,
                                   const Vec& u, const TargetFunctional& f) {
  const auto& m = problem.state_manifold;
  const Vec hx = problem.constraint(x, u);
  const Vec grad_f = f.gradient(hx);

  // First-order terms pair f's gradient with D_x h applied to the vectors.
  double out = grad_f.dot(problem.d1h_apply(x, u, problem.drift(x, u)));
  for (int l = 0; l < problem.driver_count(); ++l) {
    const VectorField sigma = problem.diffusion_field(l, u);
    const TangentVector corr =
        problem.generator.correction_stratonovich(m, sigma, x);
    out += 0.5 * grad_f.dot(problem.d1h_apply(x, u, corr.vec));

    // P-side Stratonovich generator of the constraint diffusion, evaluated
    // through the composite s_l(z) = <grad f(h(z)), D_z h sigma(z)>.
    auto s_l = [&](const Vec& z) {
      return f.gradient(problem.constraint(z, u))
          .dot(problem.d1h_apply(z, u, sigma.value(z)));
    };
    out += 0.5 *
           directional_derivative_scalar_o4(m, x, sigma.value(x), s_l, kFdStepOuter);
  }
  return out;
}

namespace {

void cut_locus_guard(const SDAEProblem& problem, const Vec& hx) {
  const auto& tp = problem.target_manifold;
  if (!tp->injectivity_radius) return;
  const double radius = tp->injectivity_radius(problem.target_point);
  if (!std::isfinite(radius)) return;
  const double dist = geodesic_distance(tp, hx, problem.target_point);
  if (dist >= radius - 1e-6) {
    fail(ErrorCode::CutLocusProximity,
         "constraint image within 1e-6 of the cut locus of p");
  }
}

}  // namespace

double y_value(const SDAEProblem& problem, double b, const Vec& x, const Vec& u,
               YForm form) {
  const Vec hx = problem.constraint(x, u);
  cut_locus_guard(problem, hx);
  if (problem.fast_y) return problem.fast_y(b, x, u, form);
  const TargetFunctional f = target_functional(problem, form);
  return b * f.value(hx) + composed_constraint_drift(problem, x, u, f);
}

double d1y_apply(const SDAEProblem& problem, double b, const Vec& x, const Vec& u,
                 YForm form, const Vec& w) {
  const auto& m = problem.state_manifold;
  return directional_derivative_scalar_o4(
      m, x, w, [&](const Vec& z) { return y_value(problem, b, z, u, form); },
      kFdStepOuter);
}

Vec d2y_covector(const SDAEProblem& problem, double b, const Vec& x, const Vec& u,
                 YForm form) {
  if (problem.analytic_d2y) return problem.analytic_d2y(b, x, u, form);
  const auto& n = problem.algebraic_manifold;
  const Mat basis = tangent_basis(n, u);
  Vec components(basis.cols());
  for (int j = 0; j < basis.cols(); ++j) {
    components[j] = directional_derivative_scalar_o4(
        n, u, basis.col(j),
        [&](const Vec& v) { return y_value(problem, b, x, v, form); },
        kFdStepOuter);
  }
  return Vec(basis * components);
}

BoundedMFields bounded_m_fields(const SDAEProblem& problem, double b, const Vec& x,
                                const Vec& u, YForm form, double denom_guard) {
  const Vec d2y = d2y_covector(problem, b, x, u, form);
  // a = g-sharp D2Y; with the induced metric the ambient representative is
  // the tangent projection of the covector.
  const Vec a = problem.algebraic_manifold->tangent_projector(u, d2y);
  const double denom = d2y.dot(a);
  if (std::abs(denom) <= denom_guard) {
    fail(ErrorCode::DegenerateDirection,
         "|D2Y . a| below denominator guard: " + std::to_string(denom));
  }

  BoundedMFields out;
  out.d2y_dot_a = denom;
  const double alpha0 =
      -d1y_apply(problem, b, x, u, form, problem.stratonovich_drift(x, u)) / denom;
  out.u_drift = alpha0 * a;
  for (int l = 0; l < problem.driver_count(); ++l) {
    const double alpha_l =
        -d1y_apply(problem, b, x, u, form, problem.diffusions[l](x, u)) / denom;
    out.u_diffusions.push_back(alpha_l * a);
  }
  return out;
}

GdResult gradient_descent_root(const SDAEProblem& problem, double b, const Vec& x,
                               const Vec& u_init, YForm form,
                               const GdControls& controls) {
  const auto& n = problem.algebraic_manifold;
  GdResult res;
  res.u = u_init;

  auto y_at = [&](const Vec& v) { return y_value(problem, b, x, v, form); };
  double y = y_at(res.u);
  res.y_abs = std::abs(y);
  if (res.y_abs <= controls.tol) {
    res.converged = true;
    return res;
  }

  for (int it = 0; it < controls.max_iter; ++it) {
    // grad K = 2 Y g-sharp D2Y.
    const Vec d2y = d2y_covector(problem, b, x, res.u, form);
    const Vec grad = 2.0 * y * n->tangent_projector(res.u, d2y);
    const double gn2 = grad.squaredNorm();
    if (gn2 < 1e-28) {
      res.local_minimum = true;
      res.iterations = it;
      return res;
    }
    const double k0 = y * y;
    double step = controls.initial_step;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec cand = n->retraction(res.u - step * grad);
      const double yc = y_at(cand);
      // Strict decrease; equality means the step no longer moves K.
      if (yc * yc < k0 - 1e-4 * step * gn2) {
        res.u = cand;
        y = yc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!moved) {
      res.local_minimum = true;
      res.y_abs = std::abs(y);
      return res;
    }
    res.y_abs = std::abs(y);
    if (res.y_abs <= controls.tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

UnitProbabilityFields unit_probability_fields(const SDAEProblem& problem,
                                              const SolutionMap& y_map, double t,
                                              const Vec& u) {
  const Vec x = y_map.value(t, u);
  problem.state_manifold->require_on_manifold(x);
  const Mat d2y = y_map.d2y(t, u);

  // Dh D2y columnwise through the constraint differential at x.
  Mat lhs(problem.target_manifold->ambient_dim, d2y.cols());
  for (int j = 0; j < d2y.cols(); ++j) {
    lhs.col(j) = problem.d1h_apply(x, u, d2y.col(j));
  }
  Eigen::JacobiSVD<Mat> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0))) {
    fail(ErrorCode::SingularConstraint, "Dh . D2y is singular at (t, u)");
  }

  const Mat basis = tangent_basis(problem.algebraic_manifold, u);
  UnitProbabilityFields out;
  out.a = basis * svd.solve(problem.d1h_apply(x, u, problem.stratonovich_drift(x, u)));
  for (int l = 0; l < problem.driver_count(); ++l) {
    out.b.push_back(
        Vec(basis * svd.solve(problem.d1h_apply(x, u, problem.diffusions[l](x, u)))));
  }
  return out;
}

}  // namespace sdae
