#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "topox/autodiff.hpp"

namespace topox {

struct TrainConfig {
    int epochs = 100;
    std::size_t batch_size = 32;
    std::size_t eval_batch = 256;
    double lr = 1e-3;
    double weight_decay = 0.0;
    int patience = 10;         // epochs without train-loss improvement before halving
    double lr_factor = 0.5;
    double min_lr = 1e-5;      // stop once lr falls to this
    double min_delta = 1e-6;
    std::uint64_t seed = 1;
    bool coalesce = true;      // merge samples with equal fingerprints inside a batch
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double lr = 0.0;
};

struct ExperimentReport {
    std::vector<EpochMetrics> epochs;
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
    double wall_seconds = 0.0;
    bool early_stopped = false;
    std::string metrics_csv() const;
};

// Classification task over indexed samples. `forward` returns one logit row per
// requested index, in order.
struct ClassificationTask {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    ParamList params;
    std::function<Tensor(Tape&, const std::vector<int>& idx, bool train)> forward;
    std::function<int(int idx, bool train)> label;
    // Optional: equal fingerprints (within a split) must mean equal inputs and labels.
    std::function<std::uint64_t(int idx, bool train)> fingerprint;
    // Optional hook after each optimizer step (e.g. weight clamping).
    std::function<void()> after_step;
};

double evaluate_accuracy(const ClassificationTask& task, bool train, std::size_t batch);
// Loss over the batch; with coalescing, duplicates are evaluated once and weighted.
Tensor batch_loss(Tape& t, const ClassificationTask& task, const std::vector<int>& idx, bool coalesce);
ExperimentReport train(ClassificationTask& task, const TrainConfig& cfg);

}  // namespace topox
