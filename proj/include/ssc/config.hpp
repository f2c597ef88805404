#pragma once

#include "ssc/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssc {

/// Run settings a config file may carry besides the model. Command-line flags
/// take precedence over these.
struct FileSettings {
    std::optional<std::vector<double>> grid_upper;
    std::optional<std::vector<int>> grid_nodes;
    std::optional<double> tolerance;
    std::optional<int> max_iterations;
    std::optional<std::string> outer;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<long long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<double>> x0;
    std::optional<int> alpha0;  // 1-based
};

struct LoadedConfig {
    ModelSpec model;
    std::optional<std::string> builtin;
    FileSettings settings;
};

/// Parses a model configuration. Sections: [builtin] (name plus parameter
/// overrides), [model] (n, m, r, d, kappa0, name), [drift], [diffusion],
/// [reward], [generator], [grid], [solver], [simulation]. Explicit sections
/// override the builtin. Throws CONFIG on malformed input.
LoadedConfig parse_config(std::string_view text, std::string_view origin = "<config>");
LoadedConfig load_config_file(const std::filesystem::path& path);

}  // namespace ssc
