#include "sdae/problem.hpp"

#include <cmath>

namespace sdae {

const char* index_kind_name(IndexKind k) {
  switch (k) {
    case IndexKind::Index1: return "Index1";
    case IndexKind::HighIndex: return "HighIndex";
    case IndexKind::CompletelyHighIndex: return "CompletelyHighIndex";
  }
  return "unknown";
}

const char* ill_posed_name(IllPosed v) {
  switch (v) {
    case IllPosed::Yes: return "yes";
    case IllPosed::NoEvidence: return "no-evidence";
    case IllPosed::NotApplicable: return "not-applicable";
  }
  return "unknown";
}

Vec SDAEProblem::stratonovich_drift(const Vec& x, const Vec& u) const {
  Vec out = drift(x, u);
  for (int l = 0; l < driver_count(); ++l) {
    out += 0.5 * generator.correction_stratonovich(state_manifold,
                                                   diffusion_field(l, u), x).vec;
  }
  return out;
}

Vec SDAEProblem::ito_drift(const Vec& x, const Vec& u) const {
  Vec out = drift(x, u);
  for (int l = 0; l < driver_count(); ++l) {
    out += 0.5 * generator.correction_ito(state_manifold, diffusion_field(l, u), x).vec;
  }
  return out;
}

VectorField SDAEProblem::diffusion_field(int l, const Vec& u) const {
  VectorField f;
  f.value = [sig = diffusions.at(l), u](const Vec& x) { return sig(x, u); };
  return f;
}

Vec SDAEProblem::d1h_apply(const Vec& x, const Vec& u, const Vec& w) const {
  if (d1h) return d1h(x, u) * w;
  const auto& m = state_manifold;
  return directional_derivative(
      m, x, w, [this, &u](const Vec& z) { return constraint(z, u); });
}

Vec SDAEProblem::d2h_apply(const Vec& x, const Vec& u, const Vec& e) const {
  if (!h_depends_on_u) return Vec::Zero(target_manifold->ambient_dim);
  if (d2h) return d2h(x, u) * e;
  return directional_derivative(
      algebraic_manifold, u, e, [this, &x](const Vec& v) { return constraint(x, v); });
}

Mat SDAEProblem::d2h_matrix(const Vec& x, const Vec& u) const {
  const Mat basis = tangent_basis(algebraic_manifold, u);
  Mat out(target_manifold->ambient_dim, basis.cols());
  for (int j = 0; j < basis.cols(); ++j) {
    out.col(j) = d2h_apply(x, u, basis.col(j));
  }
  return out;
}

void SDAEProblem::validate() const {
  if (diffusions.empty()) {
    fail(ErrorCode::ConfigInvalid, "SDAE requires at least one diffusion field");
  }
  state_manifold->require_on_manifold(initial_state);
  const Vec u0 = initial_algebraic.value_or(
      Vec::Zero(algebraic_manifold->ambient_dim));
  const Vec v = drift(initial_state, u0);
  const Vec pv = state_manifold->tangent_projector(initial_state, v);
  if ((v - pv).norm() > 1e-10 * std::max(1.0, v.norm())) {
    fail(ErrorCode::ConfigInvalid, "drift field is not tangent to M at X0");
  }
  for (int l = 0; l < driver_count(); ++l) {
    const Vec s = diffusions[l](initial_state, u0);
    const Vec ps = state_manifold->tangent_projector(initial_state, s);
    if ((s - ps).norm() > 1e-10 * std::max(1.0, s.norm())) {
      fail(ErrorCode::ConfigInvalid, "diffusion field is not tangent to M at X0");
    }
  }
  constraint(initial_state, u0);  // must be evaluable
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

namespace {

constexpr double kInvertibilityRel = 1e-8;   // sv_min / sv_max for index 1
constexpr double kStructuralZero = 1e-12;    // ||D2h|| treated as absent u
constexpr double kKernelResidual = 1e-8;     // ill-posedness witness level

struct SampledPair {
  Vec x, u;
};

std::vector<SampledPair> draw_samples(const SDAEProblem& p, int n,
                                      std::uint64_t seed) {
  std::vector<SampledPair> out;
  CounterRng rng(seed, 0xc1a551f7);
  for (int i = 0; i < n; ++i) {
    out.push_back({p.state_manifold->sample(rng), p.algebraic_manifold->sample(rng)});
  }
  return out;
}

void singular_values(const Mat& a, double& sv_min, double& sv_max) {
  if (a.size() == 0) {
    sv_min = sv_max = 0.0;
    return;
  }
  Eigen::JacobiSVD<Mat> svd(a);
  sv_max = svd.singularValues()(0);
  sv_min = svd.singularValues()(svd.singularValues().size() - 1);
}

/// Pull a sample onto the constraint set by Riemannian gradient descent on
/// Delta_p^2(h(x)) over M. Returns false if it fails to converge.
bool project_to_constraint(const SDAEProblem& p, const Vec& u, Vec& x,
                           double tol = 1e-8, int max_iter = 400) {
  const auto& m = p.state_manifold;
  const auto& tp = p.target_manifold;
  auto objective = [&](const Vec& z) {
    const double d = geodesic_distance(tp, p.constraint(z, u), p.target_point);
    return d * d;
  };
  double f = objective(x);
  for (int it = 0; it < max_iter && f > tol * tol; ++it) {
    // Ambient gradient by central differences, projected to the tangent space.
    Vec g(m->ambient_dim);
    for (int j = 0; j < m->ambient_dim; ++j) {
      g[j] = directional_derivative_scalar(m, x, Vec::Unit(m->ambient_dim, j),
                                           objective);
    }
    Vec dir = m->tangent_projector(x, g);
    const double gn2 = dir.squaredNorm();
    if (gn2 < 1e-24) break;
    double step = 0.5;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec cand = m->retraction(x - step * dir);
      const double fc = objective(cand);
      if (fc < f - 1e-4 * step * gn2) {
        x = cand;
        f = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return f <= tol;
}

IndexWitness kernel_residuals(const SDAEProblem& p, const Vec& x, const Vec& u) {
  IndexWitness w;
  w.x = x;
  w.u = u;
  for (int l = 0; l < p.driver_count(); ++l) {
    const Vec s = p.diffusions[l](x, u);
    w.diffusion_residuals.push_back(p.d1h_apply(x, u, s).norm());
  }
  w.drift_residual = p.d1h_apply(x, u, p.stratonovich_drift(x, u)).norm();
  return w;
}

}  // namespace

WellposednessReport check_wellposedness(const SDAEProblem& problem, int n_samples,
                                        std::uint64_t seed) {
  WellposednessReport report;
  int converged = 0;
  for (auto& s : draw_samples(problem, n_samples, seed)) {
    Vec x = s.x;
    if (!project_to_constraint(problem, s.u, x)) continue;
    ++converged;
    IndexWitness w = kernel_residuals(problem, x, s.u);
    for (double r : w.diffusion_residuals) {
      report.max_diffusion_residual = std::max(report.max_diffusion_residual, r);
    }
    report.max_drift_residual = std::max(report.max_drift_residual, w.drift_residual);
    report.samples.push_back(std::move(w));
  }
  if (converged == 0) {
    fail(ErrorCode::SamplingFailure,
         "no sample could be projected onto the constraint set");
  }
  report.ill_posed_witness = report.max_diffusion_residual > kKernelResidual;
  return report;
}

IndexClass classify(const SDAEProblem& problem, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) {
    fail(ErrorCode::ConfigInvalid, "classify requires n_samples >= 1");
  }
  IndexClass out;

  bool ignores_u = !problem.h_depends_on_u;
  if (!ignores_u) {
    // Numeric fallback: ||D2h|| below the structural-zero level everywhere.
    bool all_zero = true;
    for (auto& s : draw_samples(problem, n_samples, seed)) {
      double sv_min = 0.0, sv_max = 0.0;
      singular_values(problem.d2h_matrix(s.x, s.u), sv_min, sv_max);
      IndexWitness w;
      w.x = s.x;
      w.u = s.u;
      w.sv_min = sv_min;
      w.sv_max = sv_max;
      out.witnesses.push_back(std::move(w));
      if (sv_max > kStructuralZero) all_zero = false;
    }
    if (all_zero) {
      ignores_u = true;
    } else {
      // Invertibility requires a square differential: dim P == dim N.
      const bool square =
          problem.target_manifold->dim == problem.algebraic_manifold->dim;
      bool invertible = square;
      for (const auto& w : out.witnesses) {
        if (w.sv_max <= 0.0 || w.sv_min <= kInvertibilityRel * w.sv_max) {
          invertible = false;
          break;
        }
      }
      out.kind = invertible ? IndexKind::Index1 : IndexKind::HighIndex;
      out.ill_posed = IllPosed::NotApplicable;
      return out;
    }
  }

  out.kind = IndexKind::CompletelyHighIndex;
  const WellposednessReport report = check_wellposedness(problem, n_samples, seed);
  out.ill_posed = report.ill_posed_witness ? IllPosed::Yes : IllPosed::NoEvidence;
  out.witnesses = report.samples;
  return out;
}

CoupledFields index1_reduction(const SDAEProblem& problem) {
  // U-part: solve D2h z = -D1h w in the tangent basis of N at u.
  auto algebraic_part = [&problem](const Vec& x, const Vec& u, const Vec& w) {
    const Mat d2 = problem.d2h_matrix(x, u);
    Eigen::JacobiSVD<Mat> svd(d2, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double sv_max = sv(0);
    const double sv_min = sv(sv.size() - 1);
    if (sv_max <= 0.0 || sv_min <= kInvertibilityRel * sv_max) {
      fail(ErrorCode::SingularConstraint,
           "D2h singular at evaluation point (condition number " +
               std::to_string(sv_max / std::max(sv_min, 1e-300)) + ")");
    }
    const Vec rhs = -problem.d1h_apply(x, u, w);
    const Vec z = svd.solve(rhs);
    return Vec(tangent_basis(problem.algebraic_manifold, u) * z);
  };

  CoupledFields fields;
  fields.drift = [&problem, algebraic_part](const Vec& x, const Vec& u) {
    const Vec vx = problem.stratonovich_drift(x, u);
    return std::make_pair(vx, algebraic_part(x, u, vx));
  };
  for (int l = 0; l < problem.driver_count(); ++l) {
    fields.diffusions.push_back(
        [&problem, algebraic_part, l](const Vec& x, const Vec& u) {
          const Vec sx = problem.diffusions[l](x, u);
          return std::make_pair(sx, algebraic_part(x, u, sx));
        });
  }
  return fields;
}

}  // namespace sdae
