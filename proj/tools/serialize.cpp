#include "serialize.hpp"

#include <cstdio>
#include <fstream>

namespace sdae {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out;
  const int q = traj.x.empty() ? 0 : static_cast<int>(traj.x.front().size());
  const int m = traj.u.empty() ? 0 : static_cast<int>(traj.u.front().size());
  out += "t";
  for (int i = 1; i <= q; ++i) out += ",x" + std::to_string(i);
  for (int i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
  out += ",h_dist,b\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    out += format_double(traj.times[k]);
    for (int i = 0; i < q; ++i) out += "," + format_double(traj.x[k][i]);
    for (int i = 0; i < m; ++i) out += "," + format_double(traj.u[k][i]);
    out += "," + format_double(traj.h_dist[k]);
    out += "," + format_double(traj.b_value[k]);
    out += "\n";
  }
  return out;
}

Json diagnostics_json(const EnsembleDiagnostics& diag) {
  Json j;
  j["n_paths"] = diag.n_paths;
  j["epsilon"] = format_double(diag.epsilon);
  j["violation_fraction"] = format_double(diag.violation_fraction);
  Json paths = Json::array();
  for (const auto& p : diag.paths) {
    Json row;
    row["path"] = p.path_index;
    row["ok"] = p.ok;
    if (!p.ok) row["error"] = p.error;
    row["sup_h_dist"] = format_double(p.sup_h_dist);
    row["final_b"] = format_double(p.final_b);
    paths.push_back(std::move(row));
  }
  j["paths"] = std::move(paths);
  if (diag.lambda_estimate) {
    j["lambda_estimate"] = format_double(*diag.lambda_estimate);
    j["b_bound_literal"] = format_double(*diag.b_bound_literal);
    j["b_bound_proof"] = format_double(*diag.b_bound_proof);
  }
  return j;
}

Json solver_config_json(const SolverConfig& c) {
  Json j;
  j["dt"] = c.dt;
  j["t_final"] = c.t_final;
  j["epsilon"] = c.epsilon;
  j["alpha"] = c.alpha;
  j["b0"] = c.b0;
  j["b_cap"] = c.b_cap;
  j["inner_steps"] = c.inner_steps;
  j["gd_step"] = c.gd_step;
  j["gd_tol"] = c.gd_tol;
  j["gd_max_iter"] = c.gd_max_iter;
  j["d2y_threshold"] = c.d2y_threshold;
  j["denom_guard"] = c.denom_guard;
  j["scheme"] = scheme_name(c.scheme);
  j["seed"] = c.seed;
  j["n_paths"] = c.n_paths;
  j["retry_rng"] = retry_rng_name(c.retry_rng);
  if (c.y_form) j["y_form"] = y_form_name(*c.y_form);
  j["lambda_estimate"] = c.lambda_estimate;
  j["delegate_degenerate"] = c.delegate_degenerate;
  return j;
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig c) {
  if (j.contains("dt")) c.dt = j["dt"].get<double>();
  if (j.contains("t_final")) c.t_final = j["t_final"].get<double>();
  if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("b0")) c.b0 = j["b0"].get<double>();
  if (j.contains("b_cap")) c.b_cap = j["b_cap"].get<double>();
  if (j.contains("inner_steps")) c.inner_steps = j["inner_steps"].get<int>();
  if (j.contains("gd_step")) c.gd_step = j["gd_step"].get<double>();
  if (j.contains("gd_tol")) c.gd_tol = j["gd_tol"].get<double>();
  if (j.contains("gd_max_iter")) c.gd_max_iter = j["gd_max_iter"].get<int>();
  if (j.contains("d2y_threshold")) c.d2y_threshold = j["d2y_threshold"].get<double>();
  if (j.contains("denom_guard")) c.denom_guard = j["denom_guard"].get<double>();
  if (j.contains("scheme")) {
    const std::string s = j["scheme"].get<std::string>();
    if (s == "heun_stratonovich") {
      c.scheme = Scheme::HeunStratonovich;
    } else if (s == "euler_ito") {
      c.scheme = Scheme::EulerIto;
    } else {
      fail(ErrorCode::ConfigInvalid, "unknown scheme '" + s + "'");
    }
  }
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_paths")) c.n_paths = j["n_paths"].get<int>();
  if (j.contains("retry_rng")) {
    const std::string s = j["retry_rng"].get<std::string>();
    if (s == "reuse") {
      c.retry_rng = RetryRng::Reuse;
    } else if (s == "fresh") {
      c.retry_rng = RetryRng::Fresh;
    } else {
      fail(ErrorCode::ConfigInvalid, "unknown retry_rng '" + s + "'");
    }
  }
  if (j.contains("y_form")) {
    const std::string s = j["y_form"].get<std::string>();
    if (s == "squared_distance") {
      c.y_form = YForm::SquaredDistance;
    } else if (s == "linear") {
      c.y_form = YForm::Linear;
    } else {
      fail(ErrorCode::ConfigInvalid, "unknown y_form '" + s + "'");
    }
  }
  if (j.contains("lambda_estimate")) {
    c.lambda_estimate = j["lambda_estimate"].get<bool>();
  }
  if (j.contains("delegate_degenerate")) {
    c.delegate_degenerate = j["delegate_degenerate"].get<bool>();
  }
  return c;
}

Json index_class_json(const IndexClass& cls) {
  Json j;
  j["kind"] = index_kind_name(cls.kind);
  j["ill_posed"] = ill_posed_name(cls.ill_posed);
  Json witnesses = Json::array();
  for (const auto& w : cls.witnesses) {
    Json row;
    Json x = Json::array();
    for (int i = 0; i < w.x.size(); ++i) x.push_back(format_double(w.x[i]));
    Json u = Json::array();
    for (int i = 0; i < w.u.size(); ++i) u.push_back(format_double(w.u[i]));
    row["x"] = std::move(x);
    row["u"] = std::move(u);
    if (w.sv_max > 0.0 || w.sv_min > 0.0) {
      row["sv_min"] = format_double(w.sv_min);
      row["sv_max"] = format_double(w.sv_max);
    }
    if (!w.diffusion_residuals.empty()) {
      Json res = Json::array();
      for (double r : w.diffusion_residuals) res.push_back(format_double(r));
      row["diffusion_residuals"] = std::move(res);
      row["drift_residual"] = format_double(w.drift_residual);
    }
    witnesses.push_back(std::move(row));
  }
  j["witnesses"] = std::move(witnesses);
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::ConfigInvalid, "cannot open '" + path + "' for writing");
  }
  out << content;
}

}  // namespace sdae
