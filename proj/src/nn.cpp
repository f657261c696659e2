#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "topox/autodiff.hpp"
#include "topox/errors.hpp"
#include "topox/rng.hpp"

namespace topox {

ParamPtr make_param(std::string name, Matrix value) {
    return std::make_shared<Parameter>(std::move(name), std::move(value));
}

Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, double gain, Rng& rng) {
    const double a = gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (double& x : m.values()) x = rng.uniform(-a, a);
    return m;
}

void zero_grads(const ParamList& ps) {
    for (const auto& p : ps) p->zero_grad();
}

ParamList deep_copy(const ParamList& ps) {
    ParamList out;
    for (const auto& p : ps) out.push_back(std::make_shared<Parameter>(*p));
    return out;
}

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "?";
}

Tensor activate(const Tensor& x, Activation a) {
    switch (a) {
        case Activation::relu: return ad::relu(x);
        case Activation::leaky_relu: return ad::leaky_relu(x, 0.2);
        case Activation::tanh: return ad::tanh(x);
        case Activation::identity: return x;
    }
    return x;
}

double activation_lipschitz(Activation) { return 1.0; }

Tensor Dense::forward(Tape& t, const Tensor& x) const {
    Tensor y = ad::matmul(x, t.param(w));
    if (b) y = ad::add_row(y, t.param(b));
    return y;
}

Dense make_dense(const std::string& name, std::size_t d_in, std::size_t d_out, Rng& rng, bool bias, double gain) {
    Dense d;
    d.w = make_param(name + ".w", xavier_uniform(d_in, d_out, gain, rng));
    if (bias) d.b = make_param(name + ".b", Matrix(1, d_out));
    return d;
}

Mlp::Mlp(const std::string& name, const std::vector<std::size_t>& dims, Activation act, Rng& rng,
         bool final_activation)
    : act_(act), final_act_(final_activation) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        layers_.push_back(make_dense(name + "." + std::to_string(i), dims[i], dims[i + 1], rng));
}

Tensor Mlp::forward(Tape& t, const Tensor& x) const {
    Tensor h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = layers_[i].forward(t, h);
        if (i + 1 < layers_.size() || final_act_) h = activate(h, act_);
    }
    return h;
}

ParamList Mlp::params() const {
    ParamList ps;
    for (const auto& l : layers_) {
        ps.push_back(l.w);
        if (l.b) ps.push_back(l.b);
    }
    return ps;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params()) n += p->value.size();
    return n;
}

Adam::Adam(ParamList params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void Adam::step() {
    for (const auto& p : params_)
        for (double g : p->grad.values())
            if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in parameter '" + p->name + "'");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        double* m = m_[i].data();
        double* v = v_[i].data();
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad.data()[k] + cfg_.weight_decay * p.value.data()[k];
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
            p.value.data()[k] -= cfg_.lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg_.eps);
        }
    }
}

Matrix jacobian(Tape& tape, const Tensor& out, std::size_t v, const Tensor& input, std::size_t u) {
    const std::size_t p = out.cols();
    Matrix j(p, input.cols());
    for (std::size_t i = 0; i < p; ++i) {
        Matrix seed(out.rows(), p);
        seed(v, i) = 1.0;
        tape.vjp(out, seed);
        const Matrix g = tape.grad(input);
        for (std::size_t c = 0; c < input.cols(); ++c) j(i, c) = g(u, c);
    }
    return j;
}

double l1_norm(const Matrix& m) {
    double s = 0.0;
    for (double x : m.values()) s += std::abs(x);
    return s;
}

std::string checkpoint_json(const ParamList& ps) {
    nlohmann::json j;
    j["params"] = nlohmann::json::array();
    for (const auto& p : ps)
        j["params"].push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()},
                               {"values", p->value.values()}});
    return j.dump();
}

void save_checkpoint(const ParamList& ps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
    out << checkpoint_json(ps) << "\n";
}

void load_checkpoint(const ParamList& ps, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    const auto& arr = j.at("params");
    if (arr.size() != ps.size()) throw ConfigError("checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto& e = arr[i];
        const std::size_t r = e.at("rows"), c = e.at("cols");
        if (r != ps[i]->value.rows() || c != ps[i]->value.cols())
            throw ConfigError("checkpoint: shape mismatch for '" + ps[i]->name + "'");
        ps[i]->value = Matrix(r, c, e.at("values").get<std::vector<double>>());
    }
}

}  // namespace topox
