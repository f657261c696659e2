#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "topox/kernels.hpp"
#include "topox/matrix.hpp"

namespace topox {

class Rng;

// Trainable matrix with a persistent gradient accumulator.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
    void zero_grad() { grad.fill(0.0); }
};
using ParamPtr = std::shared_ptr<Parameter>;
using ParamList = std::vector<ParamPtr>;

ParamPtr make_param(std::string name, Matrix value);
// U(-a, a) with a = gain * sqrt(6 / (fan_in + fan_out)).
Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, double gain, Rng& rng);
void zero_grads(const ParamList& ps);
ParamList deep_copy(const ParamList& ps);

class Tape;

// Handle to a node recorded on a Tape.
struct Tensor {
    Tape* tape = nullptr;
    int id = -1;
    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    bool requires_grad() const;
    bool valid() const { return tape != nullptr && id >= 0; }
};

// Records a forward computation; single-threaded.
class Tape {
public:
    Tensor constant(Matrix v);
    Tensor leaf(Matrix v);  // input that receives a gradient
    Tensor param(const ParamPtr& p);

    // Reverse sweep from a 1x1 loss; parameter gradients accumulate additively.
    void backward(const Tensor& loss);
    // Vector-Jacobian product with the given seed; parameters are left untouched.
    void vjp(const Tensor& out, const Matrix& seed);
    // Gradient of the last sweep (zeros when the node was not reached).
    Matrix grad(const Tensor& t) const;

    std::size_t size() const { return nodes_.size(); }

    // Op construction interface.
    using BackwardFn = std::function<void(Tape&, int self)>;
    Tensor record(Matrix value, std::vector<int> parents, BackwardFn fn);
    const Matrix& value(int id) const { return nodes_[id].value; }
    const Matrix& grad_ref(int id) const { return nodes_[id].grad; }
    bool requires_grad(int id) const { return nodes_[id].requires_grad; }
    // grad[id] += g (allocating on first use).
    void accumulate(int id, const Matrix& g);
    void accumulate_row(int id, std::size_t row, std::span<const double> g);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::vector<int> parents;
        BackwardFn backward;
        ParamPtr param;
    };
    void sweep(int root, const Matrix& seed, bool to_params);
    std::vector<Node> nodes_;
};

namespace ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_row(const Tensor& a, const Tensor& bias);  // bias is 1 x cols, broadcast over rows
Tensor mul(const Tensor& a, const Tensor& b);         // elementwise
Tensor mul_rows(const Tensor& a, const Tensor& s);    // s is rows x 1
Tensor scale(const Tensor& a, double s);
Tensor scale_by(const Tensor& a, const Tensor& s);    // s is 1 x 1
Tensor add_scalar(const Tensor& a, double s);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor row_gather(const Tensor& a, const std::vector<int>& idx);
Tensor scatter_add(const Tensor& a, const std::vector<int>& idx, std::size_t n_rows);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// Softmax of an n x 1 score column within each segment.
Tensor segment_softmax(const Tensor& scores, const std::vector<int>& segment, std::size_t n_segments);
Tensor sum_rows(const Tensor& a);   // 1 x cols
Tensor mean_rows(const Tensor& a);  // 1 x cols; zeros for 0 rows
Tensor max_rows(const Tensor& a);   // 1 x cols; zeros for 0 rows
Tensor sum_all(const Tensor& a);    // 1 x 1
Tensor spmm(std::shared_ptr<const SparseMatrix> s, std::shared_ptr<const SparseMatrix> st, const Tensor& a);
// Elementwise base^theta on positive entries of a constant base, 0 elsewhere.
Tensor pow_exponent(const Matrix& base, const Tensor& theta);
// Weighted mean of per-row cross entropies; weights default to 1.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels, const std::vector<double>& weights = {});
Tensor mse(const Tensor& pred, const Matrix& target);

}  // namespace ad

enum class Activation { relu, leaky_relu, tanh, identity };
Activation parse_activation(const std::string& s);
std::string to_string(Activation a);
Tensor activate(const Tensor& x, Activation a);
double activation_lipschitz(Activation a);

struct Dense {
    ParamPtr w;  // d_in x d_out
    ParamPtr b;  // 1 x d_out, may be null
    Tensor forward(Tape& t, const Tensor& x) const;
};
Dense make_dense(const std::string& name, std::size_t d_in, std::size_t d_out, Rng& rng, bool bias = true,
                 double gain = 1.4142135623730951);

class Mlp {
public:
    Mlp() = default;
    // dims = {d_in, h1, ..., d_out}; activation after every layer except
    // (unless final_activation) the last.
    Mlp(const std::string& name, const std::vector<std::size_t>& dims, Activation act, Rng& rng,
        bool final_activation = false);
    Tensor forward(Tape& t, const Tensor& x) const;
    ParamList params() const;
    std::size_t param_count() const;
    std::vector<Dense>& layers() { return layers_; }
    const std::vector<Dense>& layers() const { return layers_; }
    Activation activation() const { return act_; }
    bool final_activation() const { return final_act_; }

private:
    std::vector<Dense> layers_;
    Activation act_ = Activation::relu;
    bool final_act_ = false;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 added to the gradient
};

class Adam {
public:
    Adam(ParamList params, AdamConfig cfg);
    // Throws NumericError on non-finite gradients.
    void step();
    void zero_grad() { zero_grads(params_); }
    double lr() const { return cfg_.lr; }
    void set_lr(double lr) { cfg_.lr = lr; }
    long steps() const { return t_; }

private:
    ParamList params_;
    AdamConfig cfg_;
    std::vector<Matrix> m_, v_;
    long t_ = 0;
};

// One VJP per output component: J(i, j) = d out(v, i) / d input(u, j).
Matrix jacobian(Tape& tape, const Tensor& out, std::size_t v, const Tensor& input, std::size_t u);
double l1_norm(const Matrix& m);

void save_checkpoint(const ParamList& ps, const std::string& path);
void load_checkpoint(const ParamList& ps, const std::string& path);
std::string checkpoint_json(const ParamList& ps);

}  // namespace topox
