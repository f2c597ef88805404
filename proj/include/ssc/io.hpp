#pragma once

#include "ssc/grid.hpp"
#include "ssc/solver.hpp"

#include <filesystem>
#include <string>

namespace ssc {

/// %.17g, so a value survives a text round trip exactly.
std::string format_number(double v);

// Regimes are 1-based in every file.
std::string value_csv(const ValueField& field);     // x1..xn,regime,value
std::string policy_csv(const PolicyField& policy);  // x1..xn,regime,action
std::string boundary_csv(const Region& region, const Grid& grid);  // regime,node,x1..xn

/// Rebuilds the grid from the coordinate columns. Throws CONFIG on malformed files.
ValueField read_value_csv(const std::filesystem::path& path);
PolicyField read_policy_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ssc
