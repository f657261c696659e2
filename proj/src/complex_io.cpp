#include "topox/complex_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "topox/errors.hpp"

namespace topox {

nlohmann::json complex_to_json(const CellComplex& c) {
    nlohmann::json j;
    j["n_nodes"] = c.n_nodes();
    j["edges"] = nlohmann::json::array();
    for (auto [u, v] : c.graph.edges()) j["edges"].push_back({u, v});
    j["rings"] = nlohmann::json::array();
    for (const auto& r : c.ring_edges) j["rings"].push_back(r);
    return j;
}

CellComplex complex_from_json(const nlohmann::json& j) {
    try {
        const int n = j.at("n_nodes").get<int>();
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            if (e.size() != 2) throw ConfigError("complex json: edge entries must be [u, v]");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        // Ring edge indices refer to positions in the file, so the order is kept.
        Graph g = Graph::from_ordered_edges(n, edges);
        std::vector<std::vector<int>> rings;
        if (j.contains("rings"))
            for (const auto& r : j.at("rings")) rings.push_back(r.get<std::vector<int>>());
        return build_complex(g, rings);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("complex json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CellComplex load_complex(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return complex_from_json(j);
}

void save_complex(const CellComplex& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << complex_to_json(c).dump(2) << "\n";
}

Graph parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Edge> edges;
    int max_node = -1;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        int u, v;
        if (!(ls >> u)) continue;
        if (!(ls >> v)) throw ConfigError("edge list line " + std::to_string(lineno) + ": expected 'u v'");
        if (u < 0 || v < 0) throw ConfigError("edge list line " + std::to_string(lineno) + ": negative node");
        edges.emplace_back(u, v);
        max_node = std::max({max_node, u, v});
    }
    try {
        return build_graph(max_node + 1, edges);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

Graph load_edge_list(const std::string& path) { return parse_edge_list(read_file(path)); }

CellComplex load_complex_any(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return load_complex(path);
    return build_complex(load_edge_list(path), {});
}

std::vector<Point> parse_points_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Point> pts;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        Point p;
        if (!(ls >> p.x >> p.y)) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError("points csv: malformed line '" + line + "'");
        }
        first = false;
        pts.push_back(p);
    }
    return pts;
}

std::vector<Point> load_points_csv(const std::string& path) { return parse_points_csv(read_file(path)); }

}  // namespace topox
