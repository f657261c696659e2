#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "topox/cwl.hpp"
#include "topox/errors.hpp"
#include "topox/experiments.hpp"
#include "topox/kernels.hpp"
#include "topox/lifting.hpp"
#include "topox/oversquash.hpp"
#include "topox/rng.hpp"
#include "topox/spectral.hpp"
#include "topox/synth.hpp"

namespace topox::cli {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    if (std::abs(x) < 1e-12) x = 0.0;
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

std::vector<int> int_list(const json& v) {
    if (v.is_number_integer()) return {v.get<int>()};
    std::vector<int> out;
    std::stringstream ss(v.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("expected a comma-separated integer list, got '" + v.get<std::string>() + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

std::vector<std::string> str_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

int positive(const json& p, const char* key) {
    const int v = p.at(key).get<int>();
    if (v <= 0) throw ConfigError(std::string(key) + " must be positive");
    return v;
}

std::uint64_t seed_of(const json& p) { return p.at("seed").get<std::uint64_t>(); }

json envelope(const std::string& command, const json& params, json result) {
    return json{{"tool", "topox"},
                {"version", TOPOX_VERSION},
                {"command", command},
                {"config", params},
                {"result", std::move(result)}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

// Writes <out>/<stem>.csv and <out>/<stem>.json; the CSV also goes to stdout.
void emit(const std::string& out_dir, const std::string& stem, const std::string& csv, const json& report) {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir + "/" + stem + ".csv", csv);
    write_text(out_dir + "/" + stem + ".json", report.dump(2) + "\n");
    std::cout << csv;
}

// Runs jobs on up to max_threads() workers, each single-threaded.
template <class Job, class Result>
std::vector<Result> fan_out(const std::vector<Job>& jobs, Result (*fn)(const Job&)) {
    std::vector<Result> results(jobs.size());
    const int prev = kernels::max_threads();
    const int workers = std::max(1, std::min<int>(prev, static_cast<int>(jobs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = fn(jobs[i]);
        return results;
    }
    kernels::set_max_threads(1);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < jobs.size();) {
                try {
                    results[i] = fn(jobs[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    kernels::set_max_threads(prev);
    if (err) std::rethrow_exception(err);
    return results;
}

// ---- lift ----

void cmd_lift(const json& p, const std::string& out) {
    const Graph g = graph_from_spec(p.at("graph").get<std::string>());
    LiftConfig lc;
    const std::string mode = p.at("mode").get<std::string>();
    if (mode == "rings")
        lc.mode = LiftConfig::Mode::rings;
    else if (mode == "cliques")
        lc.mode = LiftConfig::Mode::cliques;
    else
        throw ConfigError("mode must be rings or cliques");
    lc.max_ring_size = p.at("max_ring").get<int>();
    lc.max_clique_dim = p.at("max_dim").get<int>();
    const CellComplex c = lift(g, lc);

    std::ostringstream csv;
    csv << "dim,index,vertices\n";
    for (int v = 0; v < c.n_nodes(); ++v) csv << "0," << v << "," << v << "\n";
    for (int e = 0; e < c.n_edges(); ++e)
        csv << "1," << e << "," << c.graph.edges()[e].first << " " << c.graph.edges()[e].second << "\n";
    for (int r = 0; r < c.n_rings(); ++r) {
        csv << "2," << r << ",";
        for (std::size_t i = 0; i < c.rings[r].size(); ++i) csv << (i ? " " : "") << c.rings[r][i];
        csv << "\n";
    }
    json res{{"cells", {c.n_nodes(), c.n_edges(), c.n_rings()}}, {"complex", complex_to_json(c)}};
    emit(out, "lift", csv.str(), envelope("lift", p, res));
}

// ---- spectra ----

void cmd_spectra(const json& p, const std::string& out) {
    const std::string op = p.at("operator").get<std::string>();
    const std::string spec = p.at("graph").get<std::string>();
    json res;
    SpectralDecomposition d;
    if (op == "normalized") {
        const Graph g = graph_from_spec(spec);
        d = eigh(normalized_laplacian(g));
        const SpectralGap gap = spectral_gap(g);
        res["lambda1"] = gap.lambda1;
        res["disconnected"] = gap.disconnected;
        if (!gap.disconnected) {
            const auto [lo, hi] = cheeger_bounds(g);
            res["cheeger_lower"] = lo;
            res["cheeger_upper"] = hi;
            if (g.n_nodes() <= kCheegerMaxNodes) res["cheeger_exact"] = cheeger_constant_exact(g);
        }
    } else {
        const CellComplex c = complex_from_spec(spec, p.at("max_ring").get<int>());
        const HodgeLaplacians h = hodge_laplacians(c);
        const Matrix* m = nullptr;
        if (op == "l0") m = &h.l0;
        else if (op == "l1") m = &h.l1;
        else if (op == "l1_down") m = &h.l1_down;
        else if (op == "l1_up") m = &h.l1_up;
        else if (op == "l2") m = &h.l2;
        else throw ConfigError("operator must be normalized, l0, l1, l1_down, l1_up or l2");
        if (m->rows() == 0) throw ConfigError("operator " + op + " is empty for this complex");
        d = eigh(*m);
    }
    res["kernel_dim"] = d.kernel_dim();
    res["eigenvalues"] = d.values;
    std::ostringstream csv;
    csv << "index,eigenvalue\n";
    for (std::size_t i = 0; i < d.values.size(); ++i) csv << i << "," << fmt(d.values[i]) << "\n";
    emit(out, "spectra", csv.str(), envelope("spectra", p, res));
}

// ---- hodge ----

std::vector<double> load_signal(const std::string& spec, int n, std::uint64_t seed) {
    std::vector<double> x;
    if (spec == "random") {
        Rng rng(seed);
        for (int i = 0; i < n; ++i) x.push_back(rng.normal());
        return x;
    }
    std::istringstream in(read_file(spec));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        try {
            x.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ConfigError("signal file: bad value '" + line + "'");
        }
    }
    if (static_cast<int>(x.size()) != n)
        throw ConfigError("signal has " + std::to_string(x.size()) + " entries, complex has " + std::to_string(n) +
                          " edges");
    return x;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void cmd_hodge(const json& p, const std::string& out) {
    const CellComplex c = complex_from_spec(p.at("complex").get<std::string>(), p.at("max_ring").get<int>());
    if (c.n_edges() == 0) throw ConfigError("complex has no edges");
    const std::vector<double> x = load_signal(p.at("signal").get<std::string>(), c.n_edges(), seed_of(p));
    const HodgeSpectra s = hodge_spectra(c);
    const HodgeSplit h = hodge_decompose(x, s);

    double recon = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        recon = std::max(recon, std::abs(h.irrotational[i] + h.solenoidal[i] + h.harmonic[i] - x[i]));
    json res{{"betti_1", s.harmonic_basis.cols()},
             {"norm", norm2(x)},
             {"irrotational_norm", norm2(h.irrotational)},
             {"solenoidal_norm", norm2(h.solenoidal)},
             {"harmonic_norm", norm2(h.harmonic)},
             {"reconstruction_error", recon},
             {"lambda_max", s.lambda_max}};
    const int k_h = p.at("approx_k").get<int>();
    if (k_h > 0) {
        const HodgeLaplacians lap = hodge_laplacians(c);
        HarmonicMode approx{HarmonicMode::Kind::approx, p.at("eps").get<double>(), k_h};
        const Matrix pa = harmonic_projector(s, lap.l1, approx);
        const Matrix pe = harmonic_projector(s, lap.l1, HarmonicMode{});
        res["approx_projector_error"] = max_abs_diff(pa, pe);
    }

    std::ostringstream csv;
    csv << "edge,u,v,signal,irrotational,solenoidal,harmonic\n";
    for (int e = 0; e < c.n_edges(); ++e)
        csv << e << "," << c.graph.edges()[e].first << "," << c.graph.edges()[e].second << "," << fmt(x[e]) << ","
            << fmt(h.irrotational[e]) << "," << fmt(h.solenoidal[e]) << "," << fmt(h.harmonic[e]) << "\n";
    emit(out, "hodge", csv.str(), envelope("hodge", p, res));
}

// ---- oversquash ----

std::vector<std::pair<int, int>> parse_pairs(const std::string& s, int n) {
    std::vector<std::pair<int, int>> pairs;
    if (s == "all") {
        for (int v = 0; v < n; ++v)
            for (int u = v + 1; u < n; ++u) pairs.emplace_back(v, u);
        return pairs;
    }
    for (const auto& tok : str_list(s)) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw ConfigError("pairs: expected v:u, got '" + tok + "'");
        int v, u;
        try {
            v = std::stoi(tok.substr(0, colon));
            u = std::stoi(tok.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("pairs: expected v:u, got '" + tok + "'");
        }
        if (v < 0 || u < 0 || v >= n || u >= n) throw ConfigError("pairs: node out of range in '" + tok + "'");
        pairs.emplace_back(v, u);
    }
    return pairs;
}

void cmd_oversquash(const json& p, const std::string& out) {
    const Graph g = graph_from_spec(p.at("graph").get<std::string>());
    if (!g.is_connected()) throw ConfigError("oversquash needs a connected graph");
    MpnnConfig mc;
    mc.layers = p.at("layers").get<int>();
    mc.width = positive(p, "width");
    mc.c_r = p.at("c_r").get<double>();
    mc.c_a = p.at("c_a").get<double>();
    mc.act = parse_activation(p.at("activation").get<std::string>());
    mc.weight_clamp = p.at("weight_clamp").get<double>();
    const int seeds = positive(p, "seeds");
    Rng rng(seed_of(p));
    Rng model_rng = rng.split();
    const MpnnModel model(mc, model_rng);
    Matrix h0(g.n_nodes(), mc.width);
    for (double& v : h0.values()) v = rng.normal();

    const ResistanceOracle oracle(g);
    std::vector<double> obs, commute;
    std::ostringstream csv;
    csv << "v,u,distance,resistance,commute_time,access_time,sensitivity_bound,empirical_sensitivity,"
           "obstruction\n";
    for (auto [v, u] : parse_pairs(p.at("pairs").get<std::string>(), g.n_nodes())) {
        const SensitivityReport sr = sensitivity_bound(mc, g, v, u, mc.layers, &model);
        const double emp = empirical_sensitivity(model, g, h0, v, u);
        const ObstructionReport o = mean_obstruction(mc, g, v, u, seeds, seed_of(p));
        obs.push_back(o.symmetric_obstruction);
        commute.push_back(oracle.commute_time(v, u));
        csv << v << "," << u << "," << g.bfs_distances(v)[u] << "," << fmt(oracle.resistance(v, u)) << ","
            << fmt(commute.back()) << "," << fmt(oracle.access_time(u, v)) << "," << fmt(sr.bound) << ","
            << fmt(emp) << "," << fmt(o.symmetric_obstruction) << "\n";
    }
    json res{{"pairs", obs.size()}, {"total_resistance", oracle.total_resistance()}};
    if (obs.size() >= 2) res["spearman_obstruction_commute"] = spearman(obs, commute);
    emit(out, "oversquash", csv.str(), envelope("oversquash", p, res));
}

// ---- transfer ----

struct TransferJob {
    TransferRunConfig cfg;
};
struct TransferOutcome {
    ExperimentReport report;
};

TransferOutcome run_transfer_job(const TransferJob& j) { return {run_transfer(j.cfg)}; }

void cmd_transfer(const json& p, const std::string& out) {
    TransferRunConfig base;
    base.epochs = p.at("epochs").get<int>();
    base.n_train = positive(p, "n_train");
    base.n_test = positive(p, "n_test");
    base.lr = p.at("lr").get<double>();
    base.batch = positive(p, "batch");
    base.c_r = p.at("c_r").get<double>();
    base.c_a = p.at("c_a").get<double>();
    base.patience = p.at("patience").get<int>();
    const std::string variant = p.at("variant").get<std::string>();
    if (variant == "gcn")
        base.variant = MpnnConfig::Variant::gcn;
    else if (variant == "gat")
        base.variant = MpnnConfig::Variant::gat;
    else
        throw ConfigError("variant must be gcn or gat");
    if (base.epochs < 0) throw ConfigError("epochs must be non-negative");

    std::vector<TransferJob> jobs;
    const int seeds = positive(p, "seeds");
    for (const auto& task : str_list(p.at("task").get<std::string>()))
        for (int r : int_list(p.at("r")))
            for (int hidden : int_list(p.at("hidden")))
                for (int s = 0; s < seeds; ++s) {
                    if (r < 3) throw ConfigError("r must be at least 3");
                    if (hidden <= 0) throw ConfigError("hidden must be positive");
                    TransferJob j{base};
                    j.cfg.task = parse_transfer_task(task);
                    j.cfg.r = r;
                    j.cfg.hidden = hidden;
                    j.cfg.seed = seed_of(p) + s;
                    jobs.push_back(j);
                }
    const auto results = fan_out(jobs, run_transfer_job);

    std::ostringstream csv, summary;
    csv << "task,r,hidden,seed,epoch,train_loss,train_acc,test_acc,lr\n";
    summary << "task,r,hidden,seed,final_train_acc,final_test_acc,epochs_run\n";
    json runs = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& c = jobs[i].cfg;
        const auto& rep = results[i].report;
        const std::string key = to_string(c.task) + "," + std::to_string(c.r) + "," + std::to_string(c.hidden) +
                                "," + std::to_string(c.seed);
        for (const auto& e : rep.epochs)
            csv << key << "," << e.epoch << "," << fmt(e.train_loss) << "," << fmt(e.train_acc) << ","
                << fmt(e.test_acc) << "," << fmt(e.lr) << "\n";
        summary << key << "," << fmt(rep.final_train_acc) << "," << fmt(rep.final_test_acc) << ","
                << (rep.epochs.empty() ? 0 : rep.epochs.back().epoch) << "\n";
        json run = report_json(rep);
        run["task"] = to_string(c.task);
        run["r"] = c.r;
        run["hidden"] = c.hidden;
        run["seed"] = c.seed;
        runs.push_back(run);
    }
    std::filesystem::create_directories(out);
    write_text(out + "/transfer_summary.csv", summary.str());
    emit(out, "transfer", csv.str(), envelope("transfer", p, json{{"runs", runs}}));
}

// ---- flow ----

struct FlowOutcome {
    ExperimentReport report;
};
FlowOutcome run_flow_job(const FlowRunConfig& c) { return {run_flow(c)}; }

void cmd_flow(const json& p, const std::string& out) {
    FlowRunConfig base = default_flow_config();
    base.epochs = p.at("epochs").get<int>();
    base.lr = p.at("lr").get<double>();
    base.batch = positive(p, "batch");
    base.n_train = positive(p, "n_train");
    base.n_test = positive(p, "n_test");
    base.patience = p.at("patience").get<int>();
    base.flow.n_points = p.at("n_points").get<int>();
    base.san.k_down = positive(p, "k_down");
    base.san.k_up = positive(p, "k_up");
    base.san.heads = positive(p, "heads");
    base.readout = parse_readout(p.at("readout").get<std::string>());
    const std::string harm = p.at("harmonic").get<std::string>();
    if (harm == "off") {
        base.san.harmonic = false;
    } else if (harm == "exact" || harm == "approx") {
        base.san.harmonic = true;
        base.harmonic.kind = harm == "exact" ? HarmonicMode::Kind::exact : HarmonicMode::Kind::approx;
    } else {
        throw ConfigError("harmonic must be exact, approx or off");
    }
    std::vector<FlowRunConfig> jobs;
    for (int s = 0; s < positive(p, "seeds"); ++s) {
        jobs.push_back(base);
        jobs.back().seed = seed_of(p) + s;
    }
    const auto results = fan_out(jobs, run_flow_job);

    std::ostringstream csv;
    csv << "seed,epoch,train_loss,train_acc,test_acc,lr\n";
    json runs = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        for (const auto& e : results[i].report.epochs)
            csv << jobs[i].seed << "," << e.epoch << "," << fmt(e.train_loss) << "," << fmt(e.train_acc) << ","
                << fmt(e.test_acc) << "," << fmt(e.lr) << "\n";
        json run = report_json(results[i].report);
        run["seed"] = jobs[i].seed;
        runs.push_back(run);
    }
    emit(out, "flow", csv.str(), envelope("flow", p, json{{"runs", runs}}));
}

// ---- cinpp-demo ----

void cmd_cinpp_demo(const json& p, const std::string& out) {
    const CinppDemoResult r = run_cinpp_demo(seed_of(p), p.at("epochs").get<int>(), positive(p, "hidden"));
    std::ostringstream csv;
    csv << "model,separation_acc,toy_train_acc,toy_test_acc\n";
    csv << "cinpp," << fmt(r.cinpp_separation_acc) << "," << fmt(r.cinpp_toy.final_train_acc) << ","
        << fmt(r.cinpp_toy.final_test_acc) << "\n";
    csv << "gcn," << fmt(r.gcn_separation_acc) << "," << fmt(r.gcn_toy.final_train_acc) << ","
        << fmt(r.gcn_toy.final_test_acc) << "\n";
    json res{{"cinpp_separation_acc", r.cinpp_separation_acc},
             {"gcn_separation_acc", r.gcn_separation_acc},
             {"cinpp_toy", report_json(r.cinpp_toy)},
             {"gcn_toy", report_json(r.gcn_toy)}};
    emit(out, "cinpp-demo", csv.str(), envelope("cinpp-demo", p, res));
}

// ---- wl ----

void cmd_wl(const json& p, const std::string& out) {
    const int max_ring = p.at("max_ring").get<int>();
    const std::string sa = p.at("a").get<std::string>(), sb = p.at("b").get<std::string>();
    const CellComplex a = complex_from_spec(sa, max_ring), b = complex_from_spec(sb, max_ring);
    std::ostringstream csv;
    csv << "complex,use_lower,rounds,classes_nodes,classes_edges,classes_rings\n";
    json res;
    for (bool lower : {true, false}) {
        CwlOptions opt{p.at("max_rounds").get<int>(), lower};
        for (const auto& [name, c] : {std::pair<const char*, const CellComplex*>{"a", &a}, {"b", &b}}) {
            const CwlResult r = cwl_coloring(*c, opt);
            csv << name << "," << (lower ? 1 : 0) << "," << r.rounds << "," << r.classes[0] << "," << r.classes[1]
                << "," << r.classes[2] << "\n";
        }
        res[lower ? "distinguishes_with_lower" : "distinguishes_without_lower"] = cwl_distinguishes(a, b, opt);
    }
    emit(out, "wl", csv.str(), envelope("wl", p, res));
}

// ---- synth ----

void cmd_synth(const json& p, const std::string& out) {
    const std::string task = p.at("task").get<std::string>();
    const int n_train = positive(p, "n_train"), n_test = positive(p, "n_test");
    Rng rng(seed_of(p));
    std::ostringstream csv;
    json res;
    std::string dataset;
    if (task == "flow") {
        FlowConfig fc;
        fc.n_points = p.at("n_points").get<int>();
        const FlowDataset d = make_flow_dataset(fc, n_train, n_test, rng);
        dataset = flow_dataset_json(d);
        csv << "split,index,label,path_length\n";
        for (const auto* split : {&d.train, &d.test})
            for (std::size_t i = 0; i < split->size(); ++i)
                csv << (split == &d.train ? "train," : "test,") << i << "," << (*split)[i].label << ","
                    << (*split)[i].path.size() - 1 << "\n";
        res["cells"] = {d.complex->n_nodes(), d.complex->n_edges(), d.complex->n_rings()};
    } else {
        const TransferTask t = parse_transfer_task(task);
        const int r = p.at("r").get<int>();
        const TransferDataset d = make_transfer_dataset(t, r, n_train, n_test, rng);
        dataset = transfer_dataset_json(d);
        csv << "split,index,label,source,target\n";
        for (const auto* split : {&d.train, &d.test})
            for (std::size_t i = 0; i < split->size(); ++i)
                csv << (split == &d.train ? "train," : "test,") << i << "," << (*split)[i].label << ","
                    << (*split)[i].source << "," << (*split)[i].target << "\n";
        res["distance"] = transfer_distance(t, r);
        res["computed_entry"] = computed_transfer_entry(t, r);
        res["closed_form_entry"] = closed_form_entry(t, r);
        const auto& first = d.train.front();
        res["resistance"] = effective_resistance(*first.graph, first.source, first.target);
    }
    std::filesystem::create_directories(out);
    write_text(out + "/synth_dataset.json", dataset);
    emit(out, "synth", csv.str(), envelope("synth", p, res));
}

}  // namespace

const std::vector<CommandSpec>& commands() {
    static const std::vector<CommandSpec> cmds{
        {"lift", "Lift a graph to a cell complex (induced cycles or cliques)",
         {{"graph", "", "graph spec or file"},
          {"mode", "rings", "rings | cliques"},
          {"max_ring", 6, "longest ring kept"},
          {"max_dim", 2, "clique lift dimension"}},
         cmd_lift},
        {"spectra", "Eigenvalues of a graph or Hodge Laplacian",
         {{"graph", "", "graph spec or file"},
          {"operator", "normalized", "normalized | l0 | l1 | l1_down | l1_up | l2"},
          {"max_ring", 6, "ring lift length for Hodge operators (0: none)"}},
         cmd_spectra},
        {"hodge", "Hodge decomposition of an edge signal",
         {{"complex", "", "complex spec or file"},
          {"signal", "random", "file with one value per edge, or random"},
          {"max_ring", 6, "ring lift length (0: none)"},
          {"approx_k", 200, "steps of the approximate harmonic projector (0: skip)"},
          {"eps", 0.0, "step size of the approximate projector (<= 0: 1/lambda_max)"},
          {"seed", 1, "seed for random signals"}},
         cmd_hodge},
        {"oversquash", "Pairwise sensitivity, resistance and obstruction report",
         {{"graph", "", "graph spec or file"},
          {"pairs", "all", "all, or v:u list"},
          {"layers", 4, "message-passing depth"},
          {"width", 8, "hidden width"},
          {"c_r", 1.0, "residual weight"},
          {"c_a", 1.0, "aggregation weight"},
          {"activation", "tanh", "relu | leaky_relu | tanh | identity"},
          {"weight_clamp", 0.5, "max |weight| (0: unclamped)"},
          {"seeds", 4, "models averaged per obstruction"},
          {"seed", 1, "seed"}},
         cmd_oversquash},
        {"transfer", "Graph transfer task training over r and hidden sweeps",
         {{"task", "ring", "ring | crossed_ring | clique_path, comma-separated"},
          {"r", "5", "source-target parameter list"},
          {"hidden", "64", "hidden width list"},
          {"epochs", 100, "epochs"},
          {"n_train", 1000, "training instances"},
          {"n_test", 200, "test instances"},
          {"lr", 1e-3, "learning rate"},
          {"batch", 8, "batch size"},
          {"c_r", 0.2, "residual weight"},
          {"c_a", 1.0, "aggregation weight"},
          {"patience", 10, "plateau epochs before halving the learning rate"},
          {"variant", "gcn", "gcn | gat"},
          {"seeds", 1, "independent runs per setting (seed, seed+1, ...)"},
          {"seed", 1, "first seed"}},
         cmd_transfer},
        {"flow", "SAN on the synthetic two-hole flow task",
         {{"epochs", 40, "epochs"},
          {"lr", 0.01, "learning rate"},
          {"batch", 32, "batch size"},
          {"n_train", 1000, "training trajectories"},
          {"n_test", 200, "test trajectories"},
          {"n_points", 400, "points in the unit square"},
          {"k_down", 3, "lower attention hops"},
          {"k_up", 3, "upper attention hops"},
          {"heads", 1, "attention heads"},
          {"readout", "sum", "sum | mean | max"},
          {"harmonic", "exact", "exact | approx | off"},
          {"patience", 10, "plateau epochs before halving the learning rate"},
          {"seeds", 1, "independent runs"},
          {"seed", 1, "first seed"}},
         cmd_flow},
        {"cinpp-demo", "CIN++ against GCN on C6 vs 2xC3 and a ring-size toy task",
         {{"epochs", 60, "epochs"}, {"hidden", 16, "hidden width"}, {"seed", 1, "seed"}},
         cmd_cinpp_demo},
        {"wl", "Cellular WL refinement with and without lower adjacencies",
         {{"a", "cycle:6", "first complex spec or file"},
          {"b", "cycles:3,3", "second complex spec or file"},
          {"max_ring", 6, "ring lift length"},
          {"max_rounds", 50, "refinement round cap"}},
         cmd_wl},
        {"synth", "Generate a transfer or flow dataset",
         {{"task", "ring", "ring | crossed_ring | clique_path | flow"},
          {"r", 5, "transfer parameter"},
          {"n_train", 1000, "training instances"},
          {"n_test", 200, "test instances"},
          {"n_points", 400, "flow points"},
          {"seed", 1, "seed"}},
         cmd_synth},
    };
    return cmds;
}

json merge_params(const CommandSpec& cmd, const json& file_cfg,
                  const std::vector<std::pair<std::string, std::string>>& overrides) {
    json p = json::object();
    for (const auto& f : cmd.flags) p[f.name] = f.def;
    if (!p.contains("seed")) p["seed"] = 1;
    if (!file_cfg.is_null()) {
        if (!file_cfg.is_object()) throw ConfigError("config file must hold a JSON object");
        for (const auto& [k, v] : file_cfg.items()) {
            if (!p.contains(k)) throw ConfigError("unknown config key '" + k + "' for " + cmd.name);
            const json& def = p[k];
            const bool ok = def.is_number_integer() ? v.is_number_integer()
                            : def.is_number()       ? v.is_number()
                                                    : v.is_string() || v.is_number_integer();
            if (!ok) throw ConfigError("config key '" + k + "' has the wrong type");
            if (def.is_string() && v.is_number_integer())
                p[k] = std::to_string(v.get<long long>());
            else
                p[k] = def.is_number_float() ? json(v.get<double>()) : v;
        }
    }
    for (const auto& [k, text] : overrides) {
        const json& def = p.at(k);
        try {
            std::size_t used = 0;
            if (def.is_number_integer()) {
                const long long v = std::stoll(text, &used);
                if (used != text.size()) throw std::invalid_argument(text);
                p[k] = v;
            } else if (def.is_number()) {
                const double v = std::stod(text, &used);
                if (used != text.size()) throw std::invalid_argument(text);
                p[k] = v;
            } else {
                p[k] = text;
            }
        } catch (const std::exception&) {
            throw ConfigError("--" + k + ": cannot parse '" + text + "'");
        }
    }
    for (const auto& [k, v] : p.items())
        if (v.is_string() && v.get<std::string>().empty()) throw ConfigError("--" + k + " is required");
    return p;
}

Graph graph_from_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon != std::string::npos && !std::filesystem::exists(spec)) {
        const std::string kind = spec.substr(0, colon);
        const std::vector<int> args = int_list(json(spec.substr(colon + 1)));
        auto one = [&] {
            if (args.size() != 1) throw ConfigError("graph spec '" + spec + "' takes one size");
            return args[0];
        };
        try {
            if (kind == "path") return path_graph(one());
            if (kind == "cycle") return cycle_graph(one());
            if (kind == "complete") return complete_graph(one());
            if (kind == "star") return star_graph(one());
            if (kind == "barbell") return barbell_graph(one());
            if (kind == "cycles") {
                std::vector<Graph> parts;
                for (int n : args) parts.push_back(cycle_graph(n));
                std::vector<const Graph*> ptrs;
                for (const auto& g : parts) ptrs.push_back(&g);
                return disjoint_union(ptrs);
            }
            if (kind == "ring" || kind == "crossed_ring" || kind == "clique_path")
                return transfer_topology(parse_transfer_task(kind), one()).graph;
        } catch (const std::invalid_argument& e) {
            throw ConfigError("graph spec '" + spec + "': " + e.what());
        }
        throw ConfigError("unknown graph kind '" + kind + "'");
    }
    return load_complex_any(spec).graph;
}

CellComplex complex_from_spec(const std::string& spec, int max_ring) {
    const bool json_file = spec.size() > 5 && spec.substr(spec.size() - 5) == ".json" && std::filesystem::exists(spec);
    if (json_file) {
        CellComplex c = load_complex(spec);
        if (c.n_rings() > 0 || max_ring == 0) return c;
        return structural_lift(c.graph, max_ring);
    }
    const Graph g = graph_from_spec(spec);
    if (max_ring == 0) return build_complex(g, {});
    return structural_lift(g, max_ring);
}

}  // namespace topox::cli
