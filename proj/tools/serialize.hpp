#pragma once

#include <json.hpp>
#include <string>

#include "sdae/algorithms.hpp"

namespace sdae {

using Json = nlohmann::ordered_json;

/// A double rendered with 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Trajectory CSV with the canonical schema t,x1..xq,u1..um,h_dist,b,
/// UTF-8 with plain \n newlines.
std::string trajectory_csv(const Trajectory& traj);

/// Deterministic ensemble diagnostics (runtimes are deliberately omitted so
/// reruns are byte-identical).
Json diagnostics_json(const EnsembleDiagnostics& diag);

Json solver_config_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const Json& j, SolverConfig base = {});

Json index_class_json(const IndexClass& cls);

void write_file(const std::string& path, const std::string& content);

}  // namespace sdae
