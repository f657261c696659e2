#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "topox/complex.hpp"
#include "topox/complex_io.hpp"
#include "topox/lifting.hpp"

namespace topox {

class Rng;

enum class TransferTask { ring, crossed_ring, clique_path };
TransferTask parse_transfer_task(const std::string& s);
std::string to_string(TransferTask t);

constexpr int kTransferClasses = 5;

struct TransferInstance {
    std::shared_ptr<const Graph> graph;
    int source = 0;
    int target = 0;
    Matrix features;  // n x 5
    int label = 0;
};

struct TransferDataset {
    TransferTask task = TransferTask::ring;
    int r = 0;
    std::vector<TransferInstance> train, test;
};

// Topology for parameter r (2r nodes): ring and crossed ring put source and
// target r apart, clique_path r + 1 apart. Crossed ring adds X-crosses
// i <-> 2r-i-1 and i <-> 2r-i+1 between the two arcs. Clique path is a clique of
// r nodes holding the source, with a path of r nodes hanging off one of them.
struct TransferTopology {
    Graph graph;
    int source = 0;
    int target = 0;
};
TransferTopology transfer_topology(TransferTask task, int r);
TransferInstance make_transfer(TransferTask task, int r, Rng& rng);
TransferDataset make_transfer_dataset(TransferTask task, int r, int n_train, int n_test, Rng& rng);
// Source/target distance of the task at parameter r.
int transfer_distance(TransferTask task, int r);

// Published closed forms for (S^d)_{target,source}, S = D^{-1/2} A D^{-1/2}.
double closed_form_entry(TransferTask task, int r);
// The same entry computed by matrix powers at depth d = transfer_distance.
double computed_transfer_entry(TransferTask task, int r);

std::string transfer_dataset_json(const TransferDataset& d);

struct FlowConfig {
    int n_points = 400;
    std::vector<Disc> holes{{{0.3, 0.3}, 0.12}, {{0.7, 0.7}, 0.12}};
    double corner = 0.2;          // start in [0, c] x [1-c, 1], end in [1-c, 1] x [0, c]
    double waypoint_margin = 0.05;  // distance outside the hole boundary
    int max_retries = 20;
};

struct FlowInstance {
    std::vector<int> path;      // vertex walk
    std::vector<double> flow;   // one entry per edge
    int label = 0;              // index of the hole the waypoint circles
};

struct FlowDataset {
    std::shared_ptr<const CellComplex> complex;
    std::vector<Point> points;
    FlowConfig config;
    std::vector<FlowInstance> train, test;
};

// Signed edge cochain of a vertex walk: +1 when a step follows the edge orientation.
std::vector<double> path_cochain(const Graph& g, const std::vector<int>& path);
// Dijkstra on Euclidean edge lengths; empty when unreachable.
std::vector<int> shortest_path(const Graph& g, const std::vector<Point>& pts, int from, int to);
FlowDataset make_flow_dataset(const FlowConfig& cfg, int n_train, int n_test, Rng& rng);
std::string flow_dataset_json(const FlowDataset& d);

}  // namespace topox
