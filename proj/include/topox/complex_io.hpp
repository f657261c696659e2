#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topox/complex.hpp"

namespace topox {

struct Point {
    double x;
    double y;
};

// {"n_nodes": int, "edges": [[u,v],...], "rings": [[e0,e1,...],...]}
nlohmann::json complex_to_json(const CellComplex& c);
CellComplex complex_from_json(const nlohmann::json& j);
CellComplex load_complex(const std::string& path);
void save_complex(const CellComplex& c, const std::string& path);

// One "u v" pair per line; '#' starts a comment. Node count = max index + 1.
Graph parse_edge_list(const std::string& text);
Graph load_edge_list(const std::string& path);
// Dispatches on extension: .json -> complex JSON, anything else -> edge list.
CellComplex load_complex_any(const std::string& path);

// "x,y" per line; a non-numeric first line is treated as a header.
std::vector<Point> parse_points_csv(const std::string& text);
std::vector<Point> load_points_csv(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace topox
