#pragma once

#include "perihom/cell_problem.hpp"
#include "perihom/field.hpp"
#include "perihom/limit_solver.hpp"
#include "perihom/micro_solver.hpp"

#include <string>

namespace perihom {

// snapshot CSV: node coordinates plus both fields
std::string snapshot_csv(const ScalarField& u, const ScalarField& theta);

// (macro_i, macro_j, micro_i, micro_j, value)
std::string two_scale_csv(const TwoScaleField& U);

// one JSON object per time step
std::string diagnostics_jsonl(const MicroTrajectory& traj);
std::string diagnostics_jsonl(const LimitTrajectory& traj);

std::string tensor_csv(const EffectiveTensor& tensor);
std::string correctors_csv(const CellGeometry& geom, const EffectiveTensor& tensor);

void write_text_file(const std::string& path, const std::string& content);

} // namespace perihom
