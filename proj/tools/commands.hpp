#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "topox/complex.hpp"

namespace topox::cli {

// One command-line flag; the default's JSON type decides how overrides are parsed.
struct FlagSpec {
    std::string name;  // config key; the flag is --name with '_' spelled '-'
    nlohmann::json def;
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<FlagSpec> flags;
    // Writes CSV/JSON files under out_dir and the primary CSV to stdout.
    void (*run)(const nlohmann::json& params, const std::string& out_dir);
};

const std::vector<CommandSpec>& commands();

// Defaults, then the config file, then explicit flags. Unknown config keys throw ConfigError.
nlohmann::json merge_params(const CommandSpec& cmd, const nlohmann::json& file_cfg,
                            const std::vector<std::pair<std::string, std::string>>& overrides);

// "path:5", "cycle:6", "complete:4", "star:5", "barbell:4", "cycles:3,3",
// "ring:8" / "crossed_ring:8" / "clique_path:8", or a file (.json complex or edge list).
Graph graph_from_spec(const std::string& spec);
// JSON complex files keep their rings; anything else is lifted to rings of length <= max_ring
// (max_ring 0 keeps the bare graph).
CellComplex complex_from_spec(const std::string& spec, int max_ring);

}  // namespace topox::cli
