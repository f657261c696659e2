#include <doctest.h>

#include <set>

#include <json.hpp>

#include "helpers.hpp"
#include "topox/errors.hpp"
#include "topox/oversquash.hpp"
#include "topox/synth.hpp"

using namespace topox;

namespace {

double sym_norm_power_entry(const Graph& g, int d, int v, int u) {
    Matrix s(g.n_nodes(), g.n_nodes());
    for (auto [a, b] : g.edges()) {
        const double w = 1.0 / std::sqrt(static_cast<double>(g.degree(a)) * g.degree(b));
        s(a, b) = s(b, a) = w;
    }
    return testing::dense_power(s, d)(v, u);
}

}  // namespace

TEST_CASE("transfer topologies") {
    auto ring = transfer_topology(TransferTask::ring, 5);
    CHECK(ring.graph.n_nodes() == 10);
    CHECK(ring.graph.n_edges() == 10);
    CHECK(ring.graph.bfs_distances(ring.source)[ring.target] == 5);
    auto cp = transfer_topology(TransferTask::clique_path, 5);
    CHECK(cp.graph.bfs_distances(cp.source)[cp.target] == 6);
    CHECK(transfer_distance(TransferTask::clique_path, 5) == 6);
    CHECK_THROWS(transfer_topology(TransferTask::ring, 2));
    CHECK(parse_transfer_task("crossed_ring") == TransferTask::crossed_ring);
    CHECK_THROWS_AS(parse_transfer_task("torus"), ConfigError);

    for (int r = 3; r <= 10; ++r) {
        auto cr = transfer_topology(TransferTask::crossed_ring, r);
        CHECK(cr.graph.bfs_distances(cr.source)[cr.target] == r);
        // crosses lower the resistance between source and target
        auto rg = transfer_topology(TransferTask::ring, r);
        if (r >= 4) {
            CHECK(effective_resistance(cr.graph, cr.source, cr.target) <
                  effective_resistance(rg.graph, rg.source, rg.target));
        }
    }
}

TEST_CASE("transfer entries") {
    for (int r = 3; r <= 10; ++r) {
        CHECK(std::abs(computed_transfer_entry(TransferTask::ring, r) - closed_form_entry(TransferTask::ring, r)) <=
              1e-12);
        for (auto task : {TransferTask::ring, TransferTask::crossed_ring, TransferTask::clique_path}) {
            auto topo = transfer_topology(task, r);
            const double oracle = sym_norm_power_entry(topo.graph, transfer_distance(task, r), topo.target, topo.source);
            CHECK(std::abs(computed_transfer_entry(task, r) - oracle) <= 1e-12);
        }
    }
    CHECK(closed_form_entry(TransferTask::ring, 4) == doctest::Approx(0.125));
    CHECK(closed_form_entry(TransferTask::crossed_ring, 4) == doctest::Approx(8.0 / 27.0));
    CHECK(closed_form_entry(TransferTask::clique_path, 4) == doctest::Approx(0.25 / (4 * std::sqrt(2.0))));
}

TEST_CASE("transfer instances") {
    Rng rng(1);
    auto d = make_transfer_dataset(TransferTask::clique_path, 4, 500, 100, rng);
    CHECK(d.train.size() == 500);
    CHECK(d.test.size() == 100);
    std::vector<int> counts(kTransferClasses, 0);
    for (const auto& inst : d.train) {
        CHECK(inst.graph.get() == d.train[0].graph.get());
        int zero_rows = 0, onehot_rows = 0;
        for (int v = 0; v < inst.graph->n_nodes(); ++v) {
            double sum = 0.0;
            for (int c = 0; c < kTransferClasses; ++c) sum += inst.features(v, c);
            if (sum == 0.0) {
                ++zero_rows;
                CHECK(v == inst.source);
            } else if (sum == 1.0) {
                ++onehot_rows;
                CHECK(v == inst.target);
                CHECK(inst.features(v, inst.label) == 1.0);
            } else {
                CHECK(sum == kTransferClasses);
            }
        }
        CHECK(zero_rows == 1);
        CHECK(onehot_rows == 1);
        ++counts[inst.label];
    }
    // a constant guess is right about a fifth of the time
    for (int c : counts) CHECK(std::abs(c / 500.0 - 0.2) < 0.06);
    auto j = nlohmann::json::parse(transfer_dataset_json(d));
    CHECK(j["train_labels"].size() == 500);
    CHECK(j["source"] == 0);
}

TEST_CASE("path cochains") {
    Graph g = build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    auto f = path_cochain(g, {0, 1, 2, 3});
    CHECK(f == std::vector<double>{1.0, 0.0, 1.0, 1.0});
    auto b = path_cochain(g, {3, 2, 1, 0});
    for (int e = 0; e < 4; ++e) CHECK(b[e] == -f[e]);
    CHECK_THROWS(path_cochain(g, {0, 2}));
}

TEST_CASE("flow dataset") {
    Rng rng(2);
    FlowDataset d = make_flow_dataset(FlowConfig{}, 1000, 50, rng);
    const CellComplex& c = *d.complex;
    CHECK(d.points.size() == 400);
    CHECK_NOTHROW(validate_complex(c));
    const Matrix b1 = c.b1.dense();
    int ones = 0;
    for (const auto& inst : d.train) {
        ones += inst.label;
        REQUIRE(inst.flow.size() == static_cast<std::size_t>(c.n_edges()));
        // simple path from the top-left corner region to the bottom-right one
        const Point s = d.points[inst.path.front()], e = d.points[inst.path.back()];
        CHECK(s.x <= 0.2);
        CHECK(s.y >= 0.8);
        CHECK(e.x >= 0.8);
        CHECK(e.y <= 0.2);
        CHECK(std::set<int>(inst.path.begin(), inst.path.end()).size() == inst.path.size());
        for (std::size_t i = 0; i + 1 < inst.path.size(); ++i) CHECK(c.graph.has_edge(inst.path[i], inst.path[i + 1]));
        // divergence is -1 at the start, +1 at the end, 0 elsewhere
        const auto div = b1 * inst.flow;
        for (int v = 0; v < c.n_nodes(); ++v) {
            const double expect = v == inst.path.front() ? -1.0 : v == inst.path.back() ? 1.0 : 0.0;
            CHECK(div[v] == expect);
        }
    }
    const double frac = ones / 1000.0;
    CHECK(frac >= 0.45);
    CHECK(frac <= 0.55);
    auto j = nlohmann::json::parse(flow_dataset_json(d));
    CHECK(j.contains("reconstructed"));
}

TEST_CASE("flow generation is deterministic") {
    Rng a(9), b(9);
    FlowDataset x = make_flow_dataset(FlowConfig{}, 20, 5, a);
    FlowDataset y = make_flow_dataset(FlowConfig{}, 20, 5, b);
    CHECK(*x.complex == *y.complex);
    for (std::size_t i = 0; i < 20; ++i) CHECK(x.train[i].path == y.train[i].path);
    FlowConfig bad;
    bad.n_points = 10;
    CHECK_THROWS(make_flow_dataset(bad, 1, 1, a));
}
