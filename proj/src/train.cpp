#include "topox/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "topox/errors.hpp"
#include "topox/kernels.hpp"
#include "topox/rng.hpp"

namespace topox {

std::string ExperimentReport::metrics_csv() const {
    std::ostringstream os;
    os << "epoch,train_loss,train_acc,test_acc,lr\n" << std::setprecision(10);
    for (const auto& e : epochs)
        os << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.test_acc << ',' << e.lr << '\n';
    return os.str();
}

namespace {

int argmax_row(const Matrix& m, std::size_t r) {
    int best = 0;
    for (std::size_t j = 1; j < m.cols(); ++j)
        if (m(r, j) > m(r, best)) best = static_cast<int>(j);
    return best;
}

}  // namespace

double evaluate_accuracy(const ClassificationTask& task, bool train, std::size_t batch) {
    const std::size_t n = train ? task.n_train : task.n_test;
    if (n == 0) return 0.0;
    // Samples sharing a fingerprint are evaluated once and counted with multiplicity.
    std::vector<int> uniq;
    std::vector<std::size_t> count;
    if (task.fingerprint) {
        std::map<std::uint64_t, std::size_t> slot;
        for (std::size_t i = 0; i < n; ++i) {
            auto [it, fresh] = slot.emplace(task.fingerprint(static_cast<int>(i), train), uniq.size());
            if (fresh) {
                uniq.push_back(static_cast<int>(i));
                count.push_back(1);
            } else {
                ++count[it->second];
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) uniq.push_back(static_cast<int>(i));
        count.assign(n, 1);
    }
    std::size_t correct = 0;
    for (std::size_t start = 0; start < uniq.size(); start += batch) {
        const std::size_t end = std::min(uniq.size(), start + batch);
        std::vector<int> idx(uniq.begin() + start, uniq.begin() + end);
        Tape t;
        const Matrix& out = task.forward(t, idx, train).value();
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (argmax_row(out, i) == task.label(idx[i], train)) correct += count[start + i];
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

Tensor batch_loss(Tape& t, const ClassificationTask& task, const std::vector<int>& idx, bool coalesce) {
    std::vector<int> uniq;
    std::vector<double> weight;
    if (coalesce && task.fingerprint) {
        std::map<std::uint64_t, std::size_t> slot;
        for (int i : idx) {
            auto [it, fresh] = slot.emplace(task.fingerprint(i, true), uniq.size());
            if (fresh) {
                uniq.push_back(i);
                weight.push_back(1.0);
            } else {
                weight[it->second] += 1.0;
            }
        }
    } else {
        uniq = idx;
        weight.assign(idx.size(), 1.0);
    }
    std::vector<int> labels;
    for (int i : uniq) labels.push_back(task.label(i, true));
    return ad::cross_entropy(task.forward(t, uniq, true), labels, weight);
}

ExperimentReport train(ClassificationTask& task, const TrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    kernels::retain_heap();
    ExperimentReport rep;
    Adam opt(task.params, AdamConfig{.lr = cfg.lr, .weight_decay = cfg.weight_decay});
    Rng rng(cfg.seed ^ 0x7a11ULL);

    auto record = [&](int epoch, double loss) {
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = loss;
        m.train_acc = evaluate_accuracy(task, true, cfg.eval_batch);
        m.test_acc = evaluate_accuracy(task, false, cfg.eval_batch);
        m.lr = opt.lr();
        rep.epochs.push_back(m);
    };

    record(0, std::nan(""));
    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::vector<int> order = rng.permutation(static_cast<int>(task.n_train));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<int> idx(order.begin() + start, order.begin() + std::min(order.size(), start + cfg.batch_size));
            opt.zero_grad();
            Tape t;
            Tensor loss = batch_loss(t, task, idx, cfg.coalesce);
            const double l = loss.value()(0, 0);
            if (!std::isfinite(l)) throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
            t.backward(loss);
            opt.step();
            if (task.after_step) task.after_step();
            loss_sum += l * static_cast<double>(idx.size());
        }
        const double epoch_loss = task.n_train ? loss_sum / static_cast<double>(task.n_train) : 0.0;
        record(epoch, epoch_loss);
        if (epoch_loss < best - cfg.min_delta) {
            best = epoch_loss;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            opt.set_lr(opt.lr() * cfg.lr_factor);
            stale = 0;
        }
        if (opt.lr() <= cfg.min_lr) {
            rep.early_stopped = true;
            break;
        }
    }
    rep.final_train_acc = rep.epochs.back().train_acc;
    rep.final_test_acc = rep.epochs.back().test_acc;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace topox
