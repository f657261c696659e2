#include "topox/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace topox {

const Matrix& Tensor::value() const { return tape->value(id); }
bool Tensor::requires_grad() const { return tape->requires_grad(id); }

Tensor Tape::constant(Matrix v) {
    Node n;
    n.value = std::move(v);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::leaf(Matrix v) {
    Node n;
    n.value = std::move(v);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::param(const ParamPtr& p) {
    Node n;
    n.value = p->value;
    n.requires_grad = true;
    n.param = p;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::record(Matrix value, std::vector<int> parents, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    for (int p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
    if (n.requires_grad) {
        n.parents = std::move(parents);
        n.backward = std::move(fn);
    }
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.grad.same_shape(n.value))
        n.grad = g;
    else
        n.grad += g;
}

void Tape::accumulate_row(int id, std::size_t row, std::span<const double> g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.grad.same_shape(n.value)) n.grad = Matrix(n.value.rows(), n.value.cols());
    auto dst = n.grad.row_span(row);
    for (std::size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
}

void Tape::sweep(int root, const Matrix& seed, bool to_params) {
    if (!nodes_[root].value.same_shape(seed))
        throw std::invalid_argument("backward: seed shape " + seed.shape_str() + " does not match output " +
                                    nodes_[root].value.shape_str());
    for (auto& n : nodes_) n.grad = Matrix();
    if (!nodes_[root].requires_grad) return;
    nodes_[root].grad = seed;
    for (int id = root; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.requires_grad || n.grad.empty()) continue;
        if (n.backward) n.backward(*this, id);
        if (to_params && n.param) n.param->grad += n.grad;
    }
}

void Tape::backward(const Tensor& loss) {
    const Matrix& v = nodes_[loss.id].value;
    if (v.rows() != 1 || v.cols() != 1)
        throw std::invalid_argument("backward: loss must be a scalar, got " + v.shape_str());
    sweep(loss.id, Matrix(1, 1, 1.0), true);
}

void Tape::vjp(const Tensor& out, const Matrix& seed) { sweep(out.id, seed, false); }

Matrix Tape::grad(const Tensor& t) const {
    const Node& n = nodes_[t.id];
    if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
    return n.grad;
}

namespace ad {

namespace {

void need(bool ok, const std::string& op, const Tensor& a, const Tensor& b) {
    if (!ok) throw std::invalid_argument(op + ": shape mismatch " + a.value().shape_str() + " vs " + b.value().shape_str());
}

Tape& tape_of(const Tensor& a, const Tensor& b) {
    if (a.tape != b.tape) throw std::invalid_argument("tensors recorded on different tapes");
    return *a.tape;
}

template <class F>
Tensor unary(const Tensor& a, Matrix out, F deriv) {
    return a.tape->record(std::move(out), {a.id}, [a, deriv](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        const Matrix& x = t.value(a.id);
        const Matrix& y = t.value(self);
        Matrix d(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) d.data()[i] = g.data()[i] * deriv(x.data()[i], y.data()[i]);
        t.accumulate(a.id, d);
    });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    need(a.cols() == b.rows(), "matmul", a, b);
    Tape& t = tape_of(a, b);
    return t.record(kernels::matmul(a.value(), b.value()), {a.id, b.id}, [a, b](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        if (t.requires_grad(a.id)) t.accumulate(a.id, kernels::matmul_nt(g, t.value(b.id)));
        if (t.requires_grad(b.id)) t.accumulate(b.id, kernels::matmul_tn(t.value(a.id), g));
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    need(a.value().same_shape(b.value()), "add", a, b);
    Tape& t = tape_of(a, b);
    return t.record(a.value() + b.value(), {a.id, b.id}, [a, b](Tape& t, int self) {
        const Matrix g = t.grad_ref(self);
        t.accumulate(a.id, g);
        t.accumulate(b.id, g);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    need(a.value().same_shape(b.value()), "sub", a, b);
    Tape& t = tape_of(a, b);
    return t.record(a.value() - b.value(), {a.id, b.id}, [a, b](Tape& t, int self) {
        const Matrix g = t.grad_ref(self);
        t.accumulate(a.id, g);
        t.accumulate(b.id, g * -1.0);
    });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
    need(bias.rows() == 1 && bias.cols() == a.cols(), "add_row", a, bias);
    Tape& t = tape_of(a, bias);
    Matrix out = a.value();
    const Matrix& b = bias.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b(0, c);
    return t.record(std::move(out), {a.id, bias.id}, [a, bias](Tape& t, int self) {
        const Matrix g = t.grad_ref(self);
        t.accumulate(a.id, g);
        if (t.requires_grad(bias.id)) {
            Matrix gb(1, g.cols());
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
            t.accumulate(bias.id, gb);
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    need(a.value().same_shape(b.value()), "mul", a, b);
    Tape& t = tape_of(a, b);
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
    return t.record(std::move(out), {a.id, b.id}, [a, b](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        Matrix ga(g.rows(), g.cols()), gb(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data()[i] = g.data()[i] * t.value(b.id).data()[i];
            gb.data()[i] = g.data()[i] * t.value(a.id).data()[i];
        }
        t.accumulate(a.id, ga);
        t.accumulate(b.id, gb);
    });
}

Tensor mul_rows(const Tensor& a, const Tensor& s) {
    need(s.cols() == 1 && s.rows() == a.rows(), "mul_rows", a, s);
    Tape& t = tape_of(a, s);
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= s.value()(r, 0);
    return t.record(std::move(out), {a.id, s.id}, [a, s](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        const Matrix& av = t.value(a.id);
        const Matrix& sv = t.value(s.id);
        Matrix ga(g.rows(), g.cols()), gs(g.rows(), 1);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) {
                ga(r, c) = g(r, c) * sv(r, 0);
                gs(r, 0) += g(r, c) * av(r, c);
            }
        t.accumulate(a.id, ga);
        t.accumulate(s.id, gs);
    });
}

Tensor scale(const Tensor& a, double s) {
    return a.tape->record(a.value() * s, {a.id}, [a, s](Tape& t, int self) { t.accumulate(a.id, t.grad_ref(self) * s); });
}

Tensor scale_by(const Tensor& a, const Tensor& s) {
    need(s.rows() == 1 && s.cols() == 1, "scale_by", a, s);
    Tape& t = tape_of(a, s);
    return t.record(a.value() * s.value()(0, 0), {a.id, s.id}, [a, s](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        t.accumulate(a.id, g * t.value(s.id)(0, 0));
        if (t.requires_grad(s.id)) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g.data()[i] * t.value(a.id).data()[i];
            t.accumulate(s.id, Matrix(1, 1, acc));
        }
    });
}

Tensor add_scalar(const Tensor& a, double s) {
    Matrix out = a.value();
    for (double& x : out.values()) x += s;
    return a.tape->record(std::move(out), {a.id}, [a](Tape& t, int self) { t.accumulate(a.id, t.grad_ref(self)); });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const std::size_t rows = parts[0].rows();
    std::size_t cols = 0;
    std::vector<int> ids;
    for (const auto& p : parts) {
        need(p.rows() == rows, "concat_cols", parts[0], p);
        tape_of(parts[0], p);
        cols += p.cols();
        ids.push_back(p.id);
    }
    Matrix out(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        const Matrix& v = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < v.cols(); ++c) out(r, off + c) = v(r, c);
        off += v.cols();
    }
    return parts[0].tape->record(std::move(out), ids, [ids](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        std::size_t off = 0;
        for (int id : ids) {
            const std::size_t w = t.value(id).cols();
            if (t.requires_grad(id)) {
                Matrix gi(g.rows(), w);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < w; ++c) gi(r, c) = g(r, off + c);
                t.accumulate(id, gi);
            }
            off += w;
        }
    });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols()) throw std::invalid_argument("slice_cols: bad range");
    Matrix out(a.rows(), end - begin);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = a.value()(r, c);
    return a.tape->record(std::move(out), {a.id}, [a, begin, end](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        Matrix ga(t.value(a.id).rows(), t.value(a.id).cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = begin; c < end; ++c) ga(r, c) = g(r, c - begin);
        t.accumulate(a.id, ga);
    });
}

Tensor row_gather(const Tensor& a, const std::vector<int>& idx) {
    const Matrix& v = a.value();
    Matrix out(idx.size(), v.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= v.rows())
            throw std::out_of_range("row_gather: index " + std::to_string(idx[i]) + " out of range");
        auto src = v.row_span(idx[i]);
        std::copy(src.begin(), src.end(), out.row_span(i).begin());
    }
    return a.tape->record(std::move(out), {a.id}, [a, idx](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        Matrix ga(t.value(a.id).rows(), t.value(a.id).cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = g.row_span(i);
            auto dst = ga.row_span(idx[i]);
            for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
        }
        t.accumulate(a.id, ga);
    });
}

Tensor scatter_add(const Tensor& a, const std::vector<int>& idx, std::size_t n_rows) {
    const Matrix& v = a.value();
    if (idx.size() != v.rows()) throw std::invalid_argument("scatter_add: index count must equal row count");
    Matrix out(n_rows, v.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= n_rows)
            throw std::out_of_range("scatter_add: index " + std::to_string(idx[i]) + " out of range");
        auto src = v.row_span(i);
        auto dst = out.row_span(idx[i]);
        for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
    return a.tape->record(std::move(out), {a.id}, [a, idx](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        Matrix ga(idx.size(), g.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = g.row_span(idx[i]);
            std::copy(src.begin(), src.end(), ga.row_span(i).begin());
        }
        t.accumulate(a.id, ga);
    });
}

Tensor relu(const Tensor& a) {
    Matrix out = a.value();
    for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
    return unary(a, std::move(out), [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    Matrix out = a.value();
    for (double& x : out.values()) x = x > 0.0 ? x : slope * x;
    return unary(a, std::move(out), [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor tanh(const Tensor& a) {
    Matrix out = a.value();
    for (double& x : out.values()) x = std::tanh(x);
    return unary(a, std::move(out), [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
    Matrix out = a.value();
    for (double& x : out.values()) x = 1.0 / (1.0 + std::exp(-x));
    return unary(a, std::move(out), [](double, double y) { return y * (1.0 - y); });
}

Tensor segment_softmax(const Tensor& scores, const std::vector<int>& segment, std::size_t n_segments) {
    const Matrix& s = scores.value();
    if (s.cols() != 1 || segment.size() != s.rows())
        throw std::invalid_argument("segment_softmax: expects an n x 1 score column and n segment ids");
    std::vector<double> mx(n_segments, -std::numeric_limits<double>::infinity()), den(n_segments, 0.0);
    for (std::size_t i = 0; i < segment.size(); ++i) {
        if (segment[i] < 0 || static_cast<std::size_t>(segment[i]) >= n_segments)
            throw std::out_of_range("segment_softmax: segment id out of range");
        mx[segment[i]] = std::max(mx[segment[i]], s(i, 0));
    }
    Matrix out(s.rows(), 1);
    for (std::size_t i = 0; i < segment.size(); ++i) {
        out(i, 0) = std::exp(s(i, 0) - mx[segment[i]]);
        den[segment[i]] += out(i, 0);
    }
    for (std::size_t i = 0; i < segment.size(); ++i) out(i, 0) /= den[segment[i]];
    return scores.tape->record(std::move(out), {scores.id}, [scores, segment, n_segments](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        const Matrix& y = t.value(self);
        std::vector<double> dotp(n_segments, 0.0);
        for (std::size_t i = 0; i < segment.size(); ++i) dotp[segment[i]] += g(i, 0) * y(i, 0);
        Matrix gs(segment.size(), 1);
        for (std::size_t i = 0; i < segment.size(); ++i) gs(i, 0) = y(i, 0) * (g(i, 0) - dotp[segment[i]]);
        t.accumulate(scores.id, gs);
    });
}

Tensor sum_rows(const Tensor& a) {
    const Matrix& v = a.value();
    Matrix out(1, v.cols());
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = 0; c < v.cols(); ++c) out(0, c) += v(r, c);
    return a.tape->record(std::move(out), {a.id}, [a](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        Matrix ga(t.value(a.id).rows(), g.cols());
        for (std::size_t r = 0; r < ga.rows(); ++r)
            for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) = g(0, c);
        t.accumulate(a.id, ga);
    });
}

Tensor mean_rows(const Tensor& a) {
    const std::size_t n = a.rows();
    return scale(sum_rows(a), n ? 1.0 / static_cast<double>(n) : 0.0);
}

Tensor max_rows(const Tensor& a) {
    const Matrix& v = a.value();
    Matrix out(1, v.cols());
    std::vector<std::size_t> arg(v.cols(), 0);
    for (std::size_t c = 0; c < v.cols(); ++c) {
        if (v.rows() == 0) continue;
        double best = v(0, c);
        for (std::size_t r = 1; r < v.rows(); ++r)
            if (v(r, c) > best) {
                best = v(r, c);
                arg[c] = r;
            }
        out(0, c) = best;
    }
    return a.tape->record(std::move(out), {a.id}, [a, arg](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        Matrix ga(t.value(a.id).rows(), g.cols());
        if (ga.rows() == 0) return;
        for (std::size_t c = 0; c < g.cols(); ++c) ga(arg[c], c) = g(0, c);
        t.accumulate(a.id, ga);
    });
}

Tensor sum_all(const Tensor& a) {
    return a.tape->record(Matrix(1, 1, a.value().sum()), {a.id}, [a](Tape& t, int self) {
        const Matrix& v = t.value(a.id);
        t.accumulate(a.id, Matrix(v.rows(), v.cols(), t.grad_ref(self)(0, 0)));
    });
}

Tensor spmm(std::shared_ptr<const SparseMatrix> s, std::shared_ptr<const SparseMatrix> st, const Tensor& a) {
    if (s->cols != a.rows()) throw std::invalid_argument("spmm: shape mismatch");
    return a.tape->record(kernels::spmm(*s, a.value()), {a.id}, [st, a](Tape& t, int self) {
        t.accumulate(a.id, kernels::spmm(*st, t.grad_ref(self)));
    });
}

Tensor pow_exponent(const Matrix& base, const Tensor& theta) {
    if (theta.rows() != 1 || theta.cols() != 1) throw std::invalid_argument("pow_exponent: theta must be 1x1");
    const double th = theta.value()(0, 0);
    Matrix out(base.rows(), base.cols());
    for (std::size_t i = 0; i < base.size(); ++i)
        out.data()[i] = base.data()[i] > 0.0 ? std::pow(base.data()[i], th) : 0.0;
    return theta.tape->record(std::move(out), {theta.id}, [base, theta](Tape& t, int self) {
        const Matrix& g = t.grad_ref(self);
        const Matrix& y = t.value(self);
        double acc = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i)
            if (base.data()[i] > 0.0) acc += g.data()[i] * y.data()[i] * std::log(base.data()[i]);
        t.accumulate(theta.id, Matrix(1, 1, acc));
    });
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels, const std::vector<double>& weights) {
    const Matrix& z = logits.value();
    if (labels.size() != z.rows()) throw std::invalid_argument("cross_entropy: one label per row required");
    if (!weights.empty() && weights.size() != z.rows())
        throw std::invalid_argument("cross_entropy: one weight per row required");
    std::vector<double> w = weights.empty() ? std::vector<double>(z.rows(), 1.0) : weights;
    double wsum = 0.0;
    for (double x : w) wsum += x;
    if (wsum <= 0.0) throw std::invalid_argument("cross_entropy: weights must sum to a positive value");
    Matrix probs(z.rows(), z.cols());
    double loss = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= z.cols())
            throw std::out_of_range("cross_entropy: label out of range");
        double mx = z(r, 0);
        for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(r, c));
        double se = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) se += std::exp(z(r, c) - mx);
        const double lse = mx + std::log(se);
        for (std::size_t c = 0; c < z.cols(); ++c) probs(r, c) = std::exp(z(r, c) - lse);
        loss += w[r] * (lse - z(r, labels[r]));
    }
    return logits.tape->record(Matrix(1, 1, loss / wsum), {logits.id},
                               [logits, labels, w, wsum, probs](Tape& t, int self) {
                                   const double g = t.grad_ref(self)(0, 0);
                                   Matrix gz = probs;
                                   for (std::size_t r = 0; r < gz.rows(); ++r) {
                                       gz(r, labels[r]) -= 1.0;
                                       for (std::size_t c = 0; c < gz.cols(); ++c) gz(r, c) *= g * w[r] / wsum;
                                   }
                                   t.accumulate(logits.id, gz);
                               });
}

Tensor mse(const Tensor& pred, const Matrix& target) {
    if (!pred.value().same_shape(target)) throw std::invalid_argument("mse: shape mismatch");
    const std::size_t n = target.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred.value().data()[i] - target.data()[i];
        loss += d * d;
    }
    const double inv = n ? 1.0 / static_cast<double>(n) : 0.0;
    return pred.tape->record(Matrix(1, 1, loss * inv), {pred.id}, [pred, target, inv](Tape& t, int self) {
        const double g = t.grad_ref(self)(0, 0);
        Matrix gp = t.value(pred.id) - target;
        gp *= 2.0 * inv * g;
        t.accumulate(pred.id, gp);
    });
}

}  // namespace ad
}  // namespace topox
