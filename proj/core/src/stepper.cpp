#include "sdae/stepper.hpp"

#include <cmath>
#include <limits>

namespace sdae {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::HeunStratonovich: return "heun_stratonovich";
    case Scheme::EulerIto: return "euler_ito";
  }
  return "unknown";
}

namespace {

std::pair<Vec, Vec> euler_increment(const PairEval& e, const Vec& dw, double dt) {
  Vec dx = e.fx * dt;
  Vec du = e.fu * dt;
  for (size_t l = 0; l < e.sx.size(); ++l) {
    dx += e.sx[l] * dw[static_cast<int>(l)];
    du += e.su[l] * dw[static_cast<int>(l)];
  }
  return {dx, du};
}

}  // namespace

PairFieldFn as_pair_field(const CoupledFields& fields) {
  return [fields](const Vec& x, const Vec& u) {
    PairEval e;
    std::tie(e.fx, e.fu) = fields.drift(x, u);
    for (const auto& sig : fields.diffusions) {
      auto [sx, su] = sig(x, u);
      e.sx.push_back(std::move(sx));
      e.su.push_back(std::move(su));
    }
    return e;
  };
}

std::pair<Vec, Vec> heun_step_eval(const PairFieldFn& fields, const ManifoldPtr& m,
                                   const ManifoldPtr& n, const Vec& x, const Vec& u,
                                   const Vec& dw, double dt) {
  auto [dx0, du0] = euler_increment(fields(x, u), dw, dt);
  const Vec xp = m->retraction(x + dx0);
  const Vec up = n->retraction(u + du0);
  auto [dx1, du1] = euler_increment(fields(xp, up), dw, dt);
  return {m->retraction(x + 0.5 * (dx0 + dx1)), n->retraction(u + 0.5 * (du0 + du1))};
}

std::pair<Vec, Vec> euler_step_eval(const PairFieldFn& fields, const ManifoldPtr& m,
                                    const ManifoldPtr& n, const Vec& x, const Vec& u,
                                    const Vec& dw, double dt) {
  auto [dx, du] = euler_increment(fields(x, u), dw, dt);
  return {m->retraction(x + dx), n->retraction(u + du)};
}

std::pair<Vec, Vec> heun_step(const CoupledFields& fields, const ManifoldPtr& m,
                              const ManifoldPtr& n, const Vec& x, const Vec& u,
                              const Vec& dw, double dt) {
  return heun_step_eval(as_pair_field(fields), m, n, x, u, dw, dt);
}

std::pair<Vec, Vec> euler_step(const CoupledFields& fields, const ManifoldPtr& m,
                               const ManifoldPtr& n, const Vec& x, const Vec& u,
                               const Vec& dw, double dt) {
  return euler_step_eval(as_pair_field(fields), m, n, x, u, dw, dt);
}

PairFieldFn pair_field_to_ito(const PairFieldFn& fields, const ManifoldPtr& m,
                              const ManifoldPtr& n) {
  return [fields, m, n](const Vec& x, const Vec& u) {
    PairEval e = fields(x, u);
    const double h = kFdStep;
    for (size_t l = 0; l < e.sx.size(); ++l) {
      const PairEval ep =
          fields(m->retraction(x + h * e.sx[l]), n->retraction(u + h * e.su[l]));
      const PairEval em =
          fields(m->retraction(x - h * e.sx[l]), n->retraction(u - h * e.su[l]));
      e.fx += m->tangent_projector(x, 0.25 * (ep.sx[l] - em.sx[l]) / h);
      e.fu += n->tangent_projector(u, 0.25 * (ep.su[l] - em.su[l]) / h);
    }
    return e;
  };
}

double Trajectory::sup_h_dist() const {
  double out = 0.0;
  for (double v : h_dist) {
    if (!std::isnan(v)) out = std::max(out, v);
  }
  return out;
}

Trajectory integrate_intrinsic(const SDAEProblem& problem,
                               const std::function<Vec(double, const Vec&)>& u_process,
                               const WienerPath& path, Scheme scheme) {
  const auto& m = problem.state_manifold;
  const auto& n = problem.algebraic_manifold;
  const double dt = path.dt;

  auto u_at = [&](double t, const Vec& x) {
    if (u_process) return u_process(t, x);
    return problem.initial_algebraic.value_or(Vec::Zero(n->ambient_dim));
  };

  auto x_drift = [&](double t, const Vec& x) {
    const Vec u = u_at(t, x);
    return scheme == Scheme::HeunStratonovich ? problem.stratonovich_drift(x, u)
                                              : problem.ito_drift(x, u);
  };

  Trajectory traj;
  Vec x = problem.initial_state;
  double t = 0.0;
  auto record = [&](double time, const Vec& z) {
    const Vec u = u_at(time, z);
    traj.times.push_back(time);
    traj.x.push_back(z);
    traj.u.push_back(u);
    // Unconstrained comparison paths may leave the chart where h lives;
    // the distance is then undefined and recorded as NaN.
    double hd = std::numeric_limits<double>::quiet_NaN();
    try {
      hd = geodesic_distance(problem.target_manifold, problem.constraint(z, u),
                             problem.target_point);
    } catch (const SdaeError&) {
    }
    traj.h_dist.push_back(hd);
    traj.b_value.push_back(0.0);
  };
  record(t, x);

  for (int k = 0; k < path.n_steps(); ++k) {
    const Vec dw = path.increments.row(k);
    if (scheme == Scheme::HeunStratonovich) {
      // Heun on the X equation alone, with u evaluated at the same times.
      Vec dx0 = x_drift(t, x) * dt;
      {
        const Vec u = u_at(t, x);
        for (int l = 0; l < problem.driver_count(); ++l) {
          dx0 += problem.diffusions[l](x, u) * dw[l];
        }
      }
      const Vec xp = m->retraction(x + dx0);
      Vec dx1 = x_drift(t + dt, xp) * dt;
      {
        const Vec u = u_at(t + dt, xp);
        for (int l = 0; l < problem.driver_count(); ++l) {
          dx1 += problem.diffusions[l](xp, u) * dw[l];
        }
      }
      x = m->retraction(x + 0.5 * (dx0 + dx1));
    } else {
      const Vec u = u_at(t, x);
      Vec dx = problem.ito_drift(x, u) * dt;
      for (int l = 0; l < problem.driver_count(); ++l) {
        dx += problem.diffusions[l](x, u) * dw[l];
      }
      x = m->retraction(x + dx);
    }
    t += dt;
    record(t, x);
  }
  return traj;
}

CoupledFields stratonovich_to_ito(const CoupledFields& fields, const ManifoldPtr& m,
                                  const ManifoldPtr& n) {
  CoupledFields out;
  out.diffusions = fields.diffusions;
  out.drift = [fields, m, n](const Vec& x, const Vec& u) {
    auto [fx, fu] = fields.drift(x, u);
    // Joint Stratonovich-to-Ito correction: 1/2 sum_l d/dtheta of the pair
    // field along its own direction, by central differences; the tangent
    // projection keeps the drift in the tangent space (retraction supplies
    // the curvature term).
    const double h = kFdStep;
    for (const auto& sig : fields.diffusions) {
      auto [sx, su] = sig(x, u);
      auto [sxp, sup] = sig(m->retraction(x + h * sx), n->retraction(u + h * su));
      auto [sxm, sum] = sig(m->retraction(x - h * sx), n->retraction(u - h * su));
      fx += m->tangent_projector(x, 0.25 * (sxp - sxm) / h);
      fu += n->tangent_projector(u, 0.25 * (sup - sum) / h);
    }
    return std::make_pair(fx, fu);
  };
  return out;
}

}  // namespace sdae
