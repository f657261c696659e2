#include "topox/synth.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "topox/errors.hpp"
#include "topox/rng.hpp"

namespace topox {

TransferTask parse_transfer_task(const std::string& s) {
    if (s == "ring") return TransferTask::ring;
    if (s == "crossed_ring") return TransferTask::crossed_ring;
    if (s == "clique_path") return TransferTask::clique_path;
    throw ConfigError("unknown transfer task '" + s + "' (ring | crossed_ring | clique_path)");
}

std::string to_string(TransferTask t) {
    switch (t) {
        case TransferTask::ring: return "ring";
        case TransferTask::crossed_ring: return "crossed_ring";
        case TransferTask::clique_path: return "clique_path";
    }
    return "?";
}

int transfer_distance(TransferTask task, int r) { return task == TransferTask::clique_path ? r + 1 : r; }

TransferTopology transfer_topology(TransferTask task, int r) {
    if (r < 3) throw std::invalid_argument("transfer: r must be at least 3");
    const int n = 2 * r;
    std::vector<Edge> e;
    TransferTopology t;
    if (task == TransferTask::clique_path) {
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j) e.emplace_back(i, j);
        for (int i = r - 1; i + 1 < n; ++i) e.emplace_back(i, i + 1);
        t.source = 0;
        t.target = n - 1;
    } else {
        for (int i = 0; i < n; ++i) e.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
        // Crosses: node i is tied to the two nodes one step off its mirror image.
        if (task == TransferTask::crossed_ring) {
            for (int i = 1; i + 1 < r; ++i) e.emplace_back(i, n - i - 1);
            for (int i = 2; i < r; ++i) e.emplace_back(i, n - i + 1);
        }
        t.source = 0;
        t.target = r;
    }
    t.graph = build_graph(n, e);
    if (t.graph.bfs_distances(t.source)[t.target] != transfer_distance(task, r))
        throw std::logic_error("transfer: generated topology has the wrong source-target distance");
    return t;
}

TransferInstance make_transfer(TransferTask task, int r, Rng& rng) {
    auto topo = transfer_topology(task, r);
    TransferInstance inst;
    inst.source = topo.source;
    inst.target = topo.target;
    inst.label = static_cast<int>(rng.below(kTransferClasses));
    inst.features = Matrix(topo.graph.n_nodes(), kTransferClasses, 1.0);
    for (int c = 0; c < kTransferClasses; ++c) {
        inst.features(inst.source, c) = 0.0;
        inst.features(inst.target, c) = c == inst.label ? 1.0 : 0.0;
    }
    inst.graph = std::make_shared<const Graph>(std::move(topo.graph));
    return inst;
}

TransferDataset make_transfer_dataset(TransferTask task, int r, int n_train, int n_test, Rng& rng) {
    TransferDataset d;
    d.task = task;
    d.r = r;
    auto shared = std::make_shared<const Graph>(transfer_topology(task, r).graph);
    for (int i = 0; i < n_train + n_test; ++i) {
        TransferInstance inst = make_transfer(task, r, rng);
        inst.graph = shared;
        (i < n_train ? d.train : d.test).push_back(std::move(inst));
    }
    return d;
}

double closed_form_entry(TransferTask task, int r) {
    if (r < 3) throw std::invalid_argument("closed_form_entry: r must be at least 3");
    switch (task) {
        case TransferTask::ring: return std::pow(2.0, -(r - 1));
        case TransferTask::crossed_ring: return std::pow(1.5, -(r - 1));
        case TransferTask::clique_path: return std::pow(2.0, -(r - 2)) / (r * std::sqrt(r - 2.0));
    }
    return 0.0;
}

double computed_transfer_entry(TransferTask task, int r) {
    auto topo = transfer_topology(task, r);
    const Matrix s = shift_operator(topo.graph, ShiftKind::sym_norm);
    Matrix p = Matrix::identity(s.rows());
    for (int i = 0; i < transfer_distance(task, r); ++i) p = p * s;
    return p(topo.target, topo.source);
}

std::string transfer_dataset_json(const TransferDataset& d) {
    nlohmann::json j;
    j["task"] = to_string(d.task);
    j["r"] = d.r;
    j["classes"] = kTransferClasses;
    if (d.task == TransferTask::crossed_ring) j["reconstructed"] = "crossed_ring chords i <-> 2r-i-1 (i = 1..r-2) and i <-> 2r-i+1 (i = 2..r-1)";
    const auto& g = d.train.empty() ? (d.test.empty() ? nullptr : d.test[0].graph) : d.train[0].graph;
    if (g) {
        j["n_nodes"] = g->n_nodes();
        j["edges"] = g->edges();
        const auto& any = d.train.empty() ? d.test[0] : d.train[0];
        j["source"] = any.source;
        j["target"] = any.target;
    }
    auto labels = [](const std::vector<TransferInstance>& v) {
        std::vector<int> out;
        for (const auto& x : v) out.push_back(x.label);
        return out;
    };
    j["train_labels"] = labels(d.train);
    j["test_labels"] = labels(d.test);
    return j.dump(1);
}

}  // namespace topox
