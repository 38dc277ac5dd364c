#include <doctest.h>

#include <cmath>

#include "sdae/problems.hpp"
#include "sdae/stepper.hpp"

using namespace sdae;

namespace {

/// h(x, u) = u - x on the line: trivially index 1.
SDAEProblem scalar_index1() {
  SDAEProblem p;
  p.name = "scalar";
  p.state_manifold = make_real_line();
  p.algebraic_manifold = make_real_line();
  p.target_manifold = make_real_line();
  p.generator = GeneratorChoice::ito();
  p.drift = [](const Vec&, const Vec&) { return Vec(Vec::Ones(1)); };
  p.diffusions.push_back([](const Vec&, const Vec&) { return Vec(Vec::Ones(1)); });
  p.constraint = [](const Vec& x, const Vec& u) { return Vec(u - x); };
  p.target_point = Vec::Zero(1);
  p.initial_state = Vec::Zero(1);
  p.initial_algebraic = Vec::Zero(1);
  return p;
}

}  // namespace

TEST_CASE("classify index-1 problems") {
  CHECK(classify(scalar_index1(), 10, 1).kind == IndexKind::Index1);
  CHECK(classify(scalar_index1(), 10, 1).ill_posed == IllPosed::NotApplicable);
  CHECK(classify(euclidean_index1_problem(), 10, 1).kind == IndexKind::Index1);
}

TEST_CASE("classify the sphere example as ill-posed") {
  const IndexClass cls = classify(sphere_problem(), 20, 7);
  CHECK(cls.kind == IndexKind::CompletelyHighIndex);
  CHECK(cls.ill_posed == IllPosed::Yes);
}

TEST_CASE("classify the tangent-noise problem as no-evidence") {
  const IndexClass cls = classify(euclidean_tangent_noise_problem(), 20, 7);
  CHECK(cls.kind == IndexKind::CompletelyHighIndex);
  CHECK(cls.ill_posed == IllPosed::NoEvidence);
}

TEST_CASE("classification is deterministic and stable under more samples") {
  const SDAEProblem p = sphere_problem();
  const IndexClass a = classify(p, 15, 99);
  const IndexClass b = classify(p, 15, 99);
  CHECK(a.kind == b.kind);
  CHECK(a.ill_posed == b.ill_posed);
  REQUIRE(a.witnesses.size() == b.witnesses.size());
  for (size_t i = 0; i < a.witnesses.size(); ++i) {
    CHECK((a.witnesses[i].x - b.witnesses[i].x).norm() == 0.0);
  }
  // Index-1 verdicts stable when the sample count doubles.
  CHECK(classify(euclidean_index1_problem(), 10, 3).kind == IndexKind::Index1);
  CHECK(classify(euclidean_index1_problem(), 20, 3).kind == IndexKind::Index1);
}

TEST_CASE("rectangular D2h classifies as high index") {
  // h into R^2 with a one-dimensional algebraic variable.
  SDAEProblem p = scalar_index1();
  p.target_manifold = make_euclidean(2);
  p.constraint = [](const Vec& x, const Vec& u) {
    Vec h(2);
    h << u[0] - x[0], u[0] + x[0];
    return h;
  };
  p.target_point = Vec::Zero(2);
  CHECK(classify(p, 10, 1).kind == IndexKind::HighIndex);
}

TEST_CASE("kernel residual value at the sphere start point") {
  // |dh . sigma_1| at (1,0,0) with sigma_1 = 0.3 K1 and dh . K1 = -1.
  const SDAEProblem p = sphere_problem();
  Vec x0(3), u0(1);
  x0 << 1, 0, 0;
  u0 << 0;
  const Vec s1 = p.diffusions[0](x0, u0);
  CHECK(p.d1h_apply(x0, u0, s1).norm() == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("well-posedness witness report") {
  // Sphere example: nonzero |dh . sigma| on the constraint set.
  const WellposednessReport sphere = check_wellposedness(sphere_problem(), 10, 5);
  CHECK(sphere.ill_posed_witness);
  CHECK(sphere.max_diffusion_residual > 0.1);

  // Zero diffusion: all residuals vanish.
  SDAEProblem quiet = euclidean_tangent_noise_problem();
  quiet.diffusions[0] = [](const Vec&, const Vec&) { return Vec(Vec::Zero(2)); };
  const WellposednessReport z = check_wellposedness(quiet, 10, 5);
  CHECK_FALSE(z.ill_posed_witness);
  CHECK(z.max_diffusion_residual <= 1e-12);

  // Tangent noise with h = x1: sigma residual zero, drift residual is the
  // first drift component.
  const WellposednessReport t =
      check_wellposedness(euclidean_tangent_noise_problem(), 10, 5);
  CHECK_FALSE(t.ill_posed_witness);
  for (const auto& w : t.samples) {
    const double expected = std::abs(0.5 * w.u[0] - w.x[0]);
    CHECK(w.drift_residual == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("index-1 reduction fields") {
  // h(x,u) = u - x, V = 1, sigma = 1, flat generator: U-fields equal X-fields.
  const SDAEProblem p = scalar_index1();
  const CoupledFields fields = index1_reduction(p);
  auto [vx, vu] = fields.drift(Vec::Zero(1), Vec::Zero(1));
  CHECK(vx[0] == doctest::Approx(1.0));
  CHECK(vu[0] == doctest::Approx(1.0).epsilon(1e-7));
  auto [sx, su] = fields.diffusions[0](Vec::Zero(1), Vec::Zero(1));
  CHECK(su[0] == doctest::Approx(sx[0]).epsilon(1e-7));

  // h(x,u) = u - sin(x): U-drift = cos(x) X-drift (chain rule), and the
  // diffusion scales linearly with sigma.
  const SDAEProblem q = euclidean_index1_problem();
  const CoupledFields qf = index1_reduction(q);
  Vec x(1), u(1);
  x << 0.4;
  u << std::sin(0.4);
  auto [qvx, qvu] = qf.drift(x, u);
  CHECK(qvu[0] == doctest::Approx(std::cos(0.4) * qvx[0]).epsilon(1e-7));

  SDAEProblem scaled = euclidean_index1_problem();
  scaled.diffusions[0] = [](const Vec&, const Vec&) { return Vec(3.0 * 0.2 * Vec::Ones(1)); };
  auto [ssx, ssu] = index1_reduction(scaled).diffusions[0](x, u);
  auto [osx, osu] = qf.diffusions[0](x, u);
  CHECK(ssu[0] == doctest::Approx(3.0 * osu[0]).epsilon(1e-7));
  CHECK(ssx[0] == doctest::Approx(3.0 * osx[0]).epsilon(1e-12));
}

TEST_CASE("reduced fields satisfy the defining relation") {
  const SDAEProblem q = euclidean_index1_problem();
  const CoupledFields qf = index1_reduction(q);
  CounterRng rng(77, 0);
  for (int i = 0; i < 50; ++i) {
    Vec x(1), u(1);
    x << rng.uniform(-2, 2);
    u << rng.uniform(-2, 2);
    auto [vx, vu] = qf.drift(x, u);
    const Vec resid = q.d1h_apply(x, u, vx) + q.d2h_apply(x, u, vu);
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-9);
    auto [sx, su] = qf.diffusions[0](x, u);
    const Vec resid2 = q.d1h_apply(x, u, sx) + q.d2h_apply(x, u, su);
    CHECK(resid2.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("singular D2h raises a singular-constraint error") {
  SDAEProblem p = scalar_index1();
  p.constraint = [](const Vec& x, const Vec& u) {
    return Vec(u * 0.0 - x);  // h ignores u numerically
  };
  const CoupledFields fields = index1_reduction(p);
  CHECK_THROWS_AS(fields.drift(Vec::Zero(1), Vec::Zero(1)), SdaeError);
}

TEST_CASE("index-1 constraint preservation along a solved path") {
  // sup_t |h| <= C dt with C stable under dt halving.
  const SDAEProblem q = euclidean_index1_problem();
  SolverConfig config;
  config.t_final = 1.0;
  config.seed = 4;
  double c_prev = -1.0;
  for (const double dt : {1e-2, 1e-3}) {
    config.dt = dt;
    const Trajectory traj = run_index1(q, config, 0);
    const double c = traj.sup_h_dist() / dt;
    if (c_prev > 0) {
      CHECK(c <= 2.0 * c_prev);
      CHECK(c >= 0.5 * c_prev);
    }
    c_prev = c;
  }
}

TEST_CASE("deterministic index-1 flow follows the closed form") {
  // sigma = 0: U_t = sin(t + x0) to ODE accuracy.
  SDAEProblem q = euclidean_index1_problem();
  q.diffusions[0] = [](const Vec&, const Vec&) { return Vec(Vec::Zero(1)); };
  SolverConfig config;
  config.dt = 1e-3;
  config.t_final = 1.0;
  const Trajectory traj = run_index1(q, config, 0);
  for (size_t k = 0; k < traj.times.size(); k += 100) {
    CHECK(traj.u[k][0] ==
          doctest::Approx(std::sin(traj.times[k])).epsilon(1e-5));
  }
}
