#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "topox/mpnn.hpp"
#include "topox/san.hpp"
#include "topox/synth.hpp"
#include "topox/train.hpp"

namespace topox {

struct TransferRunConfig {
    TransferTask task = TransferTask::ring;
    int r = 5;
    std::size_t hidden = 64;
    int epochs = 100;
    int n_train = 1000;
    int n_test = 200;
    std::uint64_t seed = 1;
    MpnnConfig::Variant variant = MpnnConfig::Variant::gcn;
    Activation act = Activation::relu;
    ShiftKind shift = ShiftKind::sym_norm;
    double c_r = 0.2;
    double c_a = 1.0;
    bool bias = false;
    double lr = 1e-3;
    std::size_t batch = 8;
    int patience = 10;
};
// Depth equals the source-target distance; the prediction is read at the source node.
ExperimentReport run_transfer(const TransferRunConfig& cfg);

struct FlowRunConfig {
    FlowConfig flow;
    int n_train = 1000;
    int n_test = 200;
    int epochs = 40;
    double lr = 0.01;
    std::size_t batch = 32;
    int patience = 10;
    std::uint64_t seed = 1;
    SanConfig san;  // in_dim forced to 1
    Readout readout = Readout::sum;
    HarmonicMode harmonic;
};
FlowRunConfig default_flow_config();
ExperimentReport run_flow(const FlowRunConfig& cfg);

struct CinppDemoResult {
    double cinpp_separation_acc = 0.0;
    double gcn_separation_acc = 0.0;
    ExperimentReport cinpp_toy;
    ExperimentReport gcn_toy;
};
// C6 vs 2xC3 separation plus a ring-size toy classification (disjoint cycles, label =
// whether some cycle has length >= 6), CIN++ against a GCN of equal width.
CinppDemoResult run_cinpp_demo(std::uint64_t seed, int epochs, std::size_t hidden);

nlohmann::json report_json(const ExperimentReport& r);

}  // namespace topox
