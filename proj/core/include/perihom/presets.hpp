#pragma once

#include "perihom/field.hpp"
#include "perihom/micro_solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace perihom {

// Named data presets; configs refer to these instead of embedding expressions.

Reaction reaction_preset(const std::string& name);
std::vector<std::string> reaction_preset_names();

std::function<Sym2(double, double)> coefficient_preset(const std::string& name);
std::vector<std::string> coefficient_preset_names();

BoundarySource source_preset(const std::string& name);
std::vector<std::string> source_preset_names();

// initial-value recipes
double default_u0(double x1, double x2);
double default_theta0(double x1, double x2, double y1, double y2);

} // namespace perihom
