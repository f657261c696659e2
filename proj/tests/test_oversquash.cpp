#include <doctest.h>

#include "helpers.hpp"
#include "topox/oversquash.hpp"
#include "topox/rewiring.hpp"
#include "topox/spectral.hpp"

using namespace topox;

namespace {

MpnnConfig small_cfg(int layers, double clamp = 0.0) {
    MpnnConfig cfg;
    cfg.layers = layers;
    cfg.width = 3;
    cfg.in_dim = 3;
    cfg.weight_clamp = clamp;
    return cfg;
}

double spectral_norm(const Matrix& w) {
    return std::sqrt(std::max(0.0, eigh(kernels::serial::matmul_tn(w, w)).values.back()));
}

}  // namespace

TEST_CASE("sensitivity bound examples") {
    Rng rng(1);
    Graph c8 = cycle_graph(8);
    MpnnModel zero(small_cfg(0), rng);
    const Matrix h0 = testing::random_matrix(8, 3, rng);
    CHECK(empirical_sensitivity(zero, c8, h0, 2, 2) == doctest::Approx(3.0));
    CHECK(sensitivity_bound(small_cfg(0, 0.5), c8, 2, 2, 0).bound >= 3.0);

    MpnnModel two(small_cfg(2), rng);
    CHECK(empirical_sensitivity(two, c8, h0, 0, 4) == 0.0);
    CHECK(sensitivity_bound(small_cfg(2), c8, 0, 4, 2, &two).bound == 0.0);

    MpnnModel four(small_cfg(4, 0.3), rng);
    const auto rep = sensitivity_bound(small_cfg(4, 0.3), c8, 0, 4, 4, &four);
    CHECK(empirical_sensitivity(four, c8, h0, 0, 4) <= rep.bound);
    CHECK(rep.empirical == 0.0);
}

TEST_CASE("sensitivity bound is never violated") {
    Rng rng(2);
    for (int t = 0; t < 25; ++t) {
        Graph g = random_connected_graph(5 + static_cast<int>(rng.below(6)), 0.35, rng);
        const int m = 1 + static_cast<int>(rng.below(5));
        MpnnConfig cfg = small_cfg(m, 0.1 + rng.uniform());
        cfg.act = rng.below(2) ? Activation::relu : Activation::tanh;
        MpnnModel model(cfg, rng);
        const int v = static_cast<int>(rng.below(g.n_nodes())), u = static_cast<int>(rng.below(g.n_nodes()));
        const Matrix h0 = testing::random_matrix(g.n_nodes(), 3, rng);
        CHECK(empirical_sensitivity(model, g, h0, v, u) <= sensitivity_bound(cfg, g, v, u, m, &model).bound * (1 + 1e-12));
    }
}

TEST_CASE("walk counts") {
    Graph p5 = path_graph(5);
    CHECK(count_walks(p5, 0, 4, 4) == 1);
    CHECK(count_walks(cycle_graph(8), 0, 4, 4) == 2);
    CHECK(count_walks(complete_graph(4), 0, 1, 2) == 3);
    Rng rng(3);
    Graph g = random_connected_graph(7, 0.4, rng);
    const Matrix a = adjacency_matrix(g);
    double sum = 0.0;
    for (int l = 0; l <= 5; ++l) sum += testing::dense_power(a, l)(1, 5);
    CHECK(count_walks(g, 1, 5, 5) == static_cast<std::int64_t>(sum));
    CHECK_THROWS(distance_bound(p5, 0, 4, 4, 4, small_cfg(4), 1.0));
    CHECK_THROWS(distance_bound(p5, 0, 3, 4, 0, small_cfg(4), 1.0));
    CHECK(distance_bound(p5, 0, 4, 4, 0, small_cfg(4), 1.0) > 0.0);
}

TEST_CASE("resistance and random-walk times") {
    Graph k2 = build_graph(2, {{0, 1}});
    CHECK(effective_resistance(k2, 0, 1) == doctest::Approx(1.0));
    CHECK(commute_time(k2, 0, 1) == doctest::Approx(2.0));
    CHECK(effective_resistance(path_graph(3), 0, 2) == doctest::Approx(2.0));
    Graph c3 = cycle_graph(3);
    CHECK_THROWS(ResistanceOracle(disjoint_union({&c3, &c3})));

    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        Graph g = random_connected_graph(4 + static_cast<int>(rng.below(8)), 0.35, rng);
        ResistanceOracle o(g);
        const Matrix r = resistance_matrix(g);
        double total = 0.0;
        for (int v = 0; v < g.n_nodes(); ++v)
            for (int u = 0; u < g.n_nodes(); ++u) {
                const double oracle = testing::grounded_resistance(g, v, u);
                CHECK(std::abs(o.resistance(v, u) - oracle) < 1e-8);
                CHECK(std::abs(r(v, u) - oracle) < 1e-8);
                CHECK(std::abs(o.commute_time(v, u) - 2.0 * g.n_edges() * o.resistance(v, u)) <= 1e-8);
                if (v != u) CHECK(std::abs(o.access_time(u, v) - testing::hitting_oracle(g, u, v)) < 1e-7);
                if (v < u) total += oracle;
            }
        CHECK(o.total_resistance() == doctest::Approx(total));
        // metric
        for (int s = 0; s < 20; ++s) {
            const int a = static_cast<int>(rng.below(g.n_nodes())), b = static_cast<int>(rng.below(g.n_nodes())),
                      c = static_cast<int>(rng.below(g.n_nodes()));
            CHECK(r(a, c) <= r(a, b) + r(b, c) + 1e-10);
            CHECK(std::abs(r(a, b) - r(b, a)) < 1e-12);
        }
    }
}

TEST_CASE("rayleigh monotonicity") {
    Rng rng(5);
    for (int t = 0; t < 8; ++t) {
        Graph g = random_connected_graph(4 + static_cast<int>(rng.below(5)), 0.4, rng);
        const Matrix before = resistance_matrix(g);
        for (int a = 0; a < g.n_nodes(); ++a)
            for (int b = a + 1; b < g.n_nodes(); ++b) {
                if (g.has_edge(a, b)) continue;
                auto edges = g.edges();
                edges.emplace_back(a, b);
                const Matrix after = resistance_matrix(build_graph(g.n_nodes(), edges));
                for (std::size_t i = 0; i < after.size(); ++i) CHECK(after.values()[i] <= before.values()[i] + 1e-10);
            }
    }
}

TEST_CASE("monte carlo commute time on P4") {
    Rng rng(6);
    Graph p4 = path_graph(4);
    const double exact = commute_time(p4, 0, 3);
    CHECK(exact == doctest::Approx(18.0));
    CHECK(std::abs(monte_carlo_commute_time(p4, 0, 3, 100000, rng) - exact) <= 0.05 * exact);
}

TEST_CASE("jacobian obstruction") {
    Rng rng(7);
    Graph g = random_connected_graph(8, 0.4, rng);
    MpnnModel model(small_cfg(3), rng);
    tie_weights(model);
    const Matrix h0 = testing::random_matrix(8, 3, rng);
    const auto self = jacobian_obstruction(model, g, h0, 2, 2);
    CHECK(self.symmetric_obstruction == 0.0);
    CHECK(self.obstruction == 0.0);
    const auto r = jacobian_obstruction(model, g, h0, 2, 5);
    CHECK(r.rho > 0.0);
    CHECK(r.rho < 1.0);
    CHECK(r.obstruction > 0.0);

    Graph bar = barbell_graph(4);
    MpnnConfig cfg = small_cfg(3);
    const double across = mean_obstruction(cfg, bar, 0, 7, 20, 11).symmetric_obstruction;
    const double within = mean_obstruction(cfg, bar, 0, 1, 20, 11).symmetric_obstruction;
    CHECK(across > within);
}

TEST_CASE("symmetric obstruction tracks commute time") {
    Rng rng(8);
    Graph g = random_connected_graph(12, 0.25, rng);
    MpnnConfig cfg = small_cfg(4);
    std::vector<double> obs, tau;
    for (int v = 0; v < 12; ++v)
        for (int u = v + 1; u < 12; ++u) {
            const auto r = mean_obstruction(cfg, g, v, u, 20, 5);
            obs.push_back(r.symmetric_obstruction);
            tau.push_back(r.commute);
        }
    CHECK(spearman(obs, tau) >= 0.5);
}

TEST_CASE("obstruction respects the cheeger bound") {
    Rng rng(9);
    for (int t = 0; t < 5; ++t) {
        Graph g = random_connected_graph(6 + static_cast<int>(rng.below(3)), 0.4, rng);
        const double h = cheeger_constant_exact(g);
        MpnnConfig cfg = small_cfg(3);
        double obs = 0.0, bound = 0.0;
        const int seeds = 10;
        for (int s = 0; s < seeds; ++s) {
            Rng mr(100 + s);
            MpnnModel model(cfg, mr);
            tie_weights(model);
            double mu = 0.0;
            for (const auto& w : model.w_r()) mu = std::max(mu, spectral_norm(w->value));
            const auto r = jacobian_obstruction(model, g, testing::random_matrix(g.n_nodes(), 3, mr), 0, g.n_nodes() - 1);
            obs += r.symmetric_obstruction / seeds;
            bound += 4.0 / (r.rho * mu * cfg.c_a * h * h) / seeds;
        }
        CHECK(obs <= bound);
    }
}

TEST_CASE("spearman and slope") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 2, 2, 3}, {1, 2, 2, 3}) == doctest::Approx(1.0));
    CHECK(least_squares_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
}

TEST_CASE("signal propagation") {
    Rng rng(10);
    MpnnConfig cfg = small_cfg(3);
    MpnnModel model(cfg, rng);
    CHECK_FALSE(signal_propagation(model, build_graph(1, {}), 0).defined);
    MpnnModel none(small_cfg(0), rng);
    CHECK(signal_propagation(none, path_graph(6), 0).value == 0.0);

    double star = 0.0, path = 0.0;
    for (int s = 0; s < 10; ++s) {
        Rng mr(200 + s);
        MpnnModel m(cfg, mr);
        star += signal_propagation(m, star_graph(8), 1).value;
        path += signal_propagation(m, path_graph(8), 0).value;
    }
    CHECK(total_resistance(star_graph(8)) < total_resistance(path_graph(8)));
    CHECK(star > path);
}

TEST_CASE("vanishing gradients") {
    Graph g = cycle_graph(6);
    MpnnConfig cfg;
    cfg.width = 4;
    cfg.act = Activation::tanh;
    // c_sigma = 1 for tanh, c_r + c_a = 2
    const auto decay = vanishing_gradient_probe(cfg, g, 0.25, 2, 12, 5, 1);
    CHECK(std::abs(decay.slope - std::log(0.5)) <= 0.2 * std::abs(std::log(0.5)));
    const auto flat = vanishing_gradient_probe(cfg, g, 0.5, 2, 12, 5, 1);
    CHECK(std::abs(flat.slope) <= 0.1);
    const auto one = vanishing_gradient_probe(cfg, g, 0.5, 1, 1, 1, 1);
    CHECK(std::isfinite(one.grad_norms[0]));
    CHECK(one.grad_norms[0] > 0.0);
}

TEST_CASE("rewired diffusion") {
    Rng rng(11);
    Graph g = random_connected_graph(7, 0.3, rng);
    Matrix ai = adjacency_matrix(g);
    for (int i = 0; i < 7; ++i) ai(i, i) += 1.0;
    const Matrix h = testing::random_matrix(7, 2, rng);

    RewiringMap plain{RewiringMap::Correction::identity, RewiringMap::RowScale::ones, 2, 0.5};
    RewiredDiffusion p(g, 4, plain, 2, 3, rng);
    Tape t;
    const Matrix out = p.forward(t, t.constant(h)).value();
    Matrix expect(7, 3);
    for (int k = 0; k <= 4; ++k) expect += testing::dense_power(ai, k) * h * p.weights()[k]->value;
    CHECK(max_abs_diff(out, expect) < 1e-9);

    RewiringMap bin{RewiringMap::Correction::binarize, RewiringMap::RowScale::ones, 2, 0.5};
    RewiredDiffusion b(g, 5, bin, 2, 3, rng);
    for (int k = 3; k <= 5; ++k) {
        const Matrix r = b.corrected_power(k);
        for (int v = 0; v < 7; ++v) {
            const auto dist = g.bfs_distances(v);
            for (int u = 0; u < 7; ++u) CHECK(r(v, u) == (dist[u] >= 0 && dist[u] <= k ? 1.0 : 0.0));
        }
    }
    CHECK(max_abs_diff(b.corrected_power(2), testing::dense_power(ai, 2)) < 1e-12);

    RewiringMap pw;
    RewiredDiffusion q(g, 4, pw, 2, 3, rng);
    const Matrix r4 = q.corrected_power(4);
    const Matrix a4 = q.power(4);
    for (int v = 0; v < 7; ++v)
        for (int u = 0; u < 7; ++u) {
            if (a4(v, u) == 0.0) {
                CHECK(r4(v, u) == 0.0);
            } else {
                CHECK(r4(v, u) == doctest::Approx(std::sqrt(a4(v, u)) / (g.degree(v) + 1.0)));
            }
        }
    // theta receives a gradient
    zero_grads(q.params());
    Tape t2;
    t2.backward(ad::sum_all(q.forward(t2, t2.constant(h))));
    CHECK(q.thetas()[4]->grad.max_abs() > 0.0);
    CHECK(q.thetas()[1]->grad.max_abs() == 0.0);
}

TEST_CASE("telescopic mpnn with lambda one is the base mpnn") {
    Rng rng(12);
    Graph g = random_connected_graph(6, 0.4, rng);
    MpnnConfig cfg = small_cfg(2);
    MpnnModel model(cfg, rng);
    RewiredDiffusion p(g, 3, RewiringMap{}, 3, 3, rng);
    GraphOperator op(g, cfg.shift);
    Tape t;
    Tensor h0 = t.constant(testing::random_matrix(6, 3, rng));
    const Matrix tel = mpnn_tel(t, model, op, h0, p, 1.0).value();
    CHECK(max_abs_diff(tel, model.forward(t, op, h0).back().value()) == 0.0);
    CHECK_THROWS(mpnn_tel(t, model, op, h0, p, 1.5));
}
