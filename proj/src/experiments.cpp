#include "topox/experiments.hpp"

#include <map>
#include <memory>
#include <stdexcept>

#include "topox/cinpp.hpp"
#include "topox/lifting.hpp"
#include "topox/rng.hpp"

namespace topox {

namespace {

// Stacks 1 x C rows into a k x C tensor.
Tensor stack_rows(const std::vector<Tensor>& rows) {
    const std::size_t k = rows.size();
    Tensor out;
    for (std::size_t i = 0; i < k; ++i) {
        Tensor placed = ad::scatter_add(rows[i], {static_cast<int>(i)}, k);
        out = i == 0 ? placed : ad::add(out, placed);
    }
    return out;
}

}  // namespace

nlohmann::json report_json(const ExperimentReport& r) {
    nlohmann::json j;
    j["final_train_acc"] = r.final_train_acc;
    j["final_test_acc"] = r.final_test_acc;
    j["early_stopped"] = r.early_stopped;
    j["epochs_run"] = r.epochs.empty() ? 0 : r.epochs.back().epoch;
    j["wall_seconds"] = r.wall_seconds;
    return j;
}

ExperimentReport run_transfer(const TransferRunConfig& cfg) {
    Rng rng(cfg.seed);
    Rng data_rng = rng.split();
    const TransferDataset data = make_transfer_dataset(cfg.task, cfg.r, cfg.n_train, cfg.n_test, data_rng);
    const Graph& base = *data.train.front().graph;
    const int n = base.n_nodes();

    MpnnConfig mc;
    mc.layers = transfer_distance(cfg.task, cfg.r);
    mc.width = cfg.hidden;
    mc.in_dim = kTransferClasses;
    mc.act = cfg.act;
    mc.shift = cfg.shift;
    mc.variant = cfg.variant;
    mc.c_r = cfg.c_r;
    mc.c_a = cfg.c_a;
    mc.bias = cfg.bias;
    Rng model_rng = rng.split();
    auto model = std::make_shared<MpnnModel>(mc, model_rng);
    auto head = std::make_shared<Dense>(make_dense("transfer.head", cfg.hidden, kTransferClasses, model_rng));
    auto ops = std::make_shared<std::map<std::size_t, GraphOperator>>();

    auto sample = [&data](int i, bool train) -> const TransferInstance& {
        return train ? data.train[i] : data.test[i];
    };
    ClassificationTask task;
    task.n_train = data.train.size();
    task.n_test = data.test.size();
    task.params = model->params();
    task.params.push_back(head->w);
    task.params.push_back(head->b);
    task.label = [&](int i, bool train) { return sample(i, train).label; };
    task.fingerprint = [&](int i, bool train) { return static_cast<std::uint64_t>(sample(i, train).label); };
    task.forward = [&, model, head, ops, n](Tape& t, const std::vector<int>& idx, bool train) {
        const std::size_t k = idx.size();
        auto it = ops->find(k);
        if (it == ops->end()) {
            std::vector<const Graph*> parts(k, &base);
            it = ops->emplace(k, GraphOperator(disjoint_union(parts), mc.shift)).first;
        }
        Matrix x(k * n, kTransferClasses);
        std::vector<int> rows;
        for (std::size_t b = 0; b < k; ++b) {
            const auto& s = sample(idx[b], train);
            for (int v = 0; v < n; ++v)
                for (int c = 0; c < kTransferClasses; ++c) x(b * n + v, c) = s.features(v, c);
            rows.push_back(static_cast<int>(b * n) + s.source);
        }
        auto hs = model->forward(t, it->second, t.constant(std::move(x)));
        return head->forward(t, ad::row_gather(hs.back(), rows));
    };
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch;
    tc.lr = cfg.lr;
    tc.patience = cfg.patience;
    tc.seed = cfg.seed;
    return train(task, tc);
}

FlowRunConfig default_flow_config() {
    FlowRunConfig c;
    c.san.in_dim = 1;
    c.san.out_dim = 4;
    c.san.heads = 1;
    c.san.k_down = 3;
    c.san.k_up = 3;
    c.san.harmonic = true;
    c.san.act = Activation::relu;
    return c;
}

ExperimentReport run_flow(const FlowRunConfig& cfg) {
    Rng rng(cfg.seed);
    Rng data_rng = rng.split();
    const FlowDataset data = make_flow_dataset(cfg.flow, cfg.n_train, cfg.n_test, data_rng);
    CellOperator op = make_cell_operator(*data.complex, 1);
    SanConfig sc = cfg.san;
    sc.in_dim = 1;
    if (sc.harmonic) attach_harmonic(op, *data.complex, cfg.harmonic);
    Rng model_rng = rng.split();
    auto model = std::make_shared<SanModel>(sc, 1, cfg.readout, 2, model_rng);

    auto sample = [&data](int i, bool train) -> const FlowInstance& { return train ? data.train[i] : data.test[i]; };
    ClassificationTask task;
    task.n_train = data.train.size();
    task.n_test = data.test.size();
    task.params = model->params();
    task.label = [&](int i, bool train) { return sample(i, train).label; };
    task.forward = [&, model](Tape& t, const std::vector<int>& idx, bool train) {
        std::vector<Tensor> rows;
        for (int i : idx) {
            const auto& f = sample(i, train).flow;
            rows.push_back(model->logits(t, op, t.constant(Matrix(f.size(), 1, f))));
        }
        return stack_rows(rows);
    };
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch;
    tc.lr = cfg.lr;
    tc.patience = cfg.patience;
    tc.seed = cfg.seed;
    return train(task, tc);
}

namespace {

struct LiftedSample {
    CellComplex complex;
    NeighborhoodIndex nb;
    int label = 0;
};

Graph cycles_union(const std::vector<int>& sizes) {
    std::vector<Edge> e;
    int off = 0;
    for (int s : sizes) {
        for (int i = 0; i < s; ++i) {
            const int a = off + i, b = off + (i + 1) % s;
            e.emplace_back(std::min(a, b), std::max(a, b));
        }
        off += s;
    }
    return build_graph(off, e);
}

FeatureStore ones_features(Tape& t, const CellComplex& c) {
    FeatureStore x;
    for (int k = 0; k < 3; ++k) x[k] = t.constant(Matrix(c.n_cells(k), 1, 1.0));
    return x;
}

ExperimentReport train_lifted(const std::vector<LiftedSample>& train_set, const std::vector<LiftedSample>& test_set,
                              bool use_cinpp, std::size_t hidden, int epochs, std::uint64_t seed) {
    Rng rng(seed);
    CinppConfig cc;
    cc.hidden = hidden;
    cc.layers = 3;
    cc.n_classes = 2;
    auto cin = std::make_shared<CinppModel>(cc, rng);
    MpnnConfig mc;
    mc.layers = 3;
    mc.width = hidden;
    mc.in_dim = 1;
    mc.shift = ShiftKind::adjacency;
    auto gcn = std::make_shared<MpnnModel>(mc, rng);
    auto head = std::make_shared<Dense>(make_dense("gcn.head", hidden, 2, rng));

    auto sample = [&](int i, bool train) -> const LiftedSample& { return train ? train_set[i] : test_set[i]; };
    ClassificationTask task;
    task.n_train = train_set.size();
    task.n_test = test_set.size();
    if (use_cinpp) {
        task.params = cin->params();
    } else {
        task.params = gcn->params();
        task.params.push_back(head->w);
        task.params.push_back(head->b);
    }
    task.label = [&](int i, bool train) { return sample(i, train).label; };
    task.forward = [&, cin, gcn, head, use_cinpp](Tape& t, const std::vector<int>& idx, bool train) {
        std::vector<Tensor> rows;
        for (int i : idx) {
            const auto& s = sample(i, train);
            if (use_cinpp) {
                rows.push_back(cin->logits(t, s.complex, s.nb, ones_features(t, s.complex)));
            } else {
                auto hs = mpnn_forward(t, s.complex.graph, t.constant(Matrix(s.complex.n_nodes(), 1, 1.0)), *gcn);
                rows.push_back(head->forward(t, ad::sum_rows(hs.back())));
            }
        }
        return stack_rows(rows);
    };
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = 8;
    tc.lr = 5e-3;
    tc.seed = seed;
    return train(task, tc);
}

LiftedSample lifted(const std::vector<int>& sizes, int label) {
    LiftedSample s;
    s.complex = structural_lift(cycles_union(sizes), kMaxRingSize);
    s.nb = neighborhoods(s.complex);
    s.label = label;
    return s;
}

}  // namespace

CinppDemoResult run_cinpp_demo(std::uint64_t seed, int epochs, std::size_t hidden) {
    CinppDemoResult res;
    const std::vector<LiftedSample> sep{lifted({6}, 0), lifted({3, 3}, 1)};
    res.cinpp_separation_acc = train_lifted(sep, sep, true, hidden, epochs, seed).final_test_acc;
    res.gcn_separation_acc = train_lifted(sep, sep, false, hidden, epochs, seed).final_test_acc;

    Rng rng(seed ^ 0x70fULL);
    const std::vector<std::vector<int>> shapes{{3, 6}, {4, 5}, {4, 6}, {5, 5}, {3, 7}};
    std::vector<LiftedSample> tr, te;
    for (int i = 0; i < 60; ++i) {
        const auto& sh = shapes[rng.below(shapes.size())];
        const int label = *std::max_element(sh.begin(), sh.end()) >= 6 ? 1 : 0;
        (i < 40 ? tr : te).push_back(lifted(sh, label));
    }
    res.cinpp_toy = train_lifted(tr, te, true, hidden, epochs, seed);
    res.gcn_toy = train_lifted(tr, te, false, hidden, epochs, seed);
    return res;
}

}  // namespace topox
