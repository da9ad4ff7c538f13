#include "causalbound/tape.hpp"

#include <cmath>

#include "causalbound/kernels.hpp"

namespace causalbound::ad {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

double Var::scalar() const {
    const Matrix& v = value();
    if (v.rows() != 1 || v.cols() != 1) throw NonScalarLoss("Var::scalar on non-1x1 value");
    return v(0, 0);
}

Var Tape::leaf(Matrix value) {
    Matrix g(value.rows(), value.cols(), 0.0);
    nodes_.push_back({std::move(value), std::move(g), {}, nullptr});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::make_node(Matrix value, std::vector<int> inputs,
                    std::function<void(Tape&, int)> backward) {
    Matrix g(value.rows(), value.cols(), 0.0);
    nodes_.push_back({std::move(value), std::move(g), std::move(inputs), std::move(backward)});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw NonScalarLoss("backward: loss from another tape");
    const Matrix& v = nodes_[loss.id].val;
    if (v.rows() != 1 || v.cols() != 1) throw NonScalarLoss("backward requires a scalar loss");
    nodes_[loss.id].grad(0, 0) += 1.0;
    for (int id = loss.id; id >= 0; --id)
        if (nodes_[id].bwd) nodes_[id].bwd(*this, id);
}

namespace {

enum class BroadcastKind { none, row, col };

BroadcastKind broadcast_kind(const Matrix& a, const Matrix& b) {
    if (a.same_shape(b)) return BroadcastKind::none;
    if (b.rows() == 1 && b.cols() == a.cols()) return BroadcastKind::row;
    if (b.cols() == 1 && b.rows() == a.rows()) return BroadcastKind::col;
    throw ShapeMismatch("add/sub: incompatible shapes");
}

// accumulate upstream gradient into a broadcast operand
void reduce_into(Matrix& gb, const Matrix& gout, BroadcastKind bk, double sign) {
    if (bk == BroadcastKind::row) {
        for (int i = 0; i < gout.rows(); ++i)
            for (int j = 0; j < gout.cols(); ++j) gb(0, j) += sign * gout(i, j);
    } else if (bk == BroadcastKind::col) {
        for (int i = 0; i < gout.rows(); ++i)
            for (int j = 0; j < gout.cols(); ++j) gb(i, 0) += sign * gout(i, j);
    } else {
        kernels::ew_axpy(gb.data(), gout.data(), sign, gout.size());
    }
}

Var add_sub(Var a, Var b, double sign) {
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    BroadcastKind bk = broadcast_kind(av, bv);
    Matrix out(av.rows(), av.cols());
    if (bk == BroadcastKind::none) {
        if (sign > 0) kernels::ew_add(out.data(), av.data(), bv.data(), out.size());
        else kernels::ew_sub(out.data(), av.data(), bv.data(), out.size());
    } else {
        for (int i = 0; i < av.rows(); ++i)
            for (int j = 0; j < av.cols(); ++j) {
                double bij = bk == BroadcastKind::row ? bv(0, j) : bv(i, 0);
                out(i, j) = av(i, j) + sign * bij;
            }
    }
    int aid = a.id, bid = b.id;
    return a.tape->make_node(std::move(out), {aid, bid}, [aid, bid, bk, sign](Tape& t, int self) {
        const Matrix& gout = t.grad(self);
        kernels::ew_axpy(t.grad(aid).data(), gout.data(), 1.0, gout.size());
        reduce_into(t.grad(bid), gout, bk, sign);
    });
}

}  // namespace

Var add(Var a, Var b) { return add_sub(a, b, 1.0); }
Var sub(Var a, Var b) { return add_sub(a, b, -1.0); }

Var mul(Var a, Var b) {
    check_same_shape(a.value(), b.value(), "mul");
    Matrix out(a.rows(), a.cols());
    kernels::ew_mul(out.data(), a.value().data(), b.value().data(), out.size());
    int aid = a.id, bid = b.id;
    return a.tape->make_node(std::move(out), {aid, bid}, [aid, bid](Tape& t, int self) {
        const Matrix& gout = t.grad(self);
        const Matrix& av = t.value(aid);
        const Matrix& bv = t.value(bid);
        Matrix& ga = t.grad(aid);
        Matrix& gb = t.grad(bid);
        for (size_t i = 0; i < gout.size(); ++i) {
            ga[i] += gout[i] * bv[i];
            gb[i] += gout[i] * av[i];
        }
    });
}

Var matmul(Var a, Var b) {
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (av.cols() != bv.rows()) throw ShapeMismatch("matmul: inner dimensions differ");
    Matrix out(av.rows(), bv.cols());
    kernels::matmul(out.data(), av.data(), bv.data(), av.rows(), av.cols(), bv.cols());
    int aid = a.id, bid = b.id;
    return a.tape->make_node(std::move(out), {aid, bid}, [aid, bid](Tape& t, int self) {
        const Matrix& gout = t.grad(self);
        const Matrix& av2 = t.value(aid);
        const Matrix& bv2 = t.value(bid);
        // dA += G * B^T ; dB += A^T * G
        kernels::matmul_a_bt(t.grad(aid).data(), gout.data(), bv2.data(), gout.rows(), gout.cols(),
                             bv2.rows(), true);
        kernels::matmul_at_b(t.grad(bid).data(), av2.data(), gout.data(), av2.cols(), av2.rows(),
                             gout.cols(), true);
    });
}

Var scalar_mul(Var a, double s) {
    Matrix out(a.rows(), a.cols());
    kernels::ew_scale(out.data(), a.value().data(), s, out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid, s](Tape& t, int self) {
        kernels::ew_axpy(t.grad(aid).data(), t.grad(self).data(), s, t.grad(self).size());
    });
}

Var add_scalar(Var a, double s) {
    Matrix out(a.rows(), a.cols());
    const Matrix& av = a.value();
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + s;
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        kernels::ew_axpy(t.grad(aid).data(), t.grad(self).data(), 1.0, t.grad(self).size());
    });
}

Var tanh_op(Var a) {
    Matrix out(a.rows(), a.cols());
    kernels::ew_tanh(out.data(), a.value().data(), out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& y = t.value(self);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * (1.0 - y[i] * y[i]);
    });
}

Var relu(Var a) {
    Matrix out(a.rows(), a.cols());
    kernels::ew_relu(out.data(), a.value().data(), out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& x = t.value(aid);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < gout.size(); ++i)
            if (x[i] > 0.0) ga[i] += gout[i];
    });
}

Var exp_op(Var a) {
    Matrix out(a.rows(), a.cols());
    kernels::ew_exp(out.data(), a.value().data(), out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& y = t.value(self);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * y[i];
    });
}

Var log_op(Var a) {
    const Matrix& av = a.value();
    for (size_t i = 0; i < av.size(); ++i)
        if (!(av[i] > 0.0)) throw DomainError("log of non-positive value");
    Matrix out(a.rows(), a.cols());
    kernels::ew_log(out.data(), av.data(), out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& x = t.value(aid);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] / x[i];
    });
}

Var sqrt_op(Var a) {
    const Matrix& av = a.value();
    for (size_t i = 0; i < av.size(); ++i)
        if (av[i] < 0.0) throw DomainError("sqrt of negative value");
    Matrix out(a.rows(), a.cols());
    kernels::ew_sqrt(out.data(), av.data(), out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& y = t.value(self);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        // subgradient 0 at y == 0 (paired with a clamp floor upstream)
        for (size_t i = 0; i < gout.size(); ++i)
            if (y[i] > 0.0) ga[i] += gout[i] * 0.5 / y[i];
    });
}

Var sigmoid(Var a) {
    Matrix out(a.rows(), a.cols());
    kernels::ew_sigmoid(out.data(), a.value().data(), out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& y = t.value(self);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * y[i] * (1.0 - y[i]);
    });
}

Var clamp(Var a, double lo, double hi) {
    Matrix out(a.rows(), a.cols());
    kernels::ew_clamp(out.data(), a.value().data(), lo, hi, out.size());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid, lo, hi](Tape& t, int self) {
        const Matrix& x = t.value(aid);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < gout.size(); ++i)
            if (x[i] > lo && x[i] < hi) ga[i] += gout[i];
    });
}

Var sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = kernels::reduce_sum(a.value().data(), a.rows(), a.cols());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        double g = t.grad(self)(0, 0);
        Matrix& ga = t.grad(aid);
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
}

Var mean(Var a) { return scalar_mul(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var logsumexp_rows(Var a) {
    Matrix out(a.rows(), 1);
    kernels::row_logsumexp(out.data(), a.value().data(), a.rows(), a.cols());
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& x = t.value(aid);
        const Matrix& lse = t.value(self);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (int i = 0; i < x.rows(); ++i) {
            double gi = gout(i, 0);
            if (gi == 0.0) continue;
            for (int j = 0; j < x.cols(); ++j)
                ga(i, j) += gi * kernels::fast_exp(x(i, j) - lse(i, 0));
        }
    });
}

Var logsumexp_cols(Var a) {
    Matrix xt = a.value().transposed();
    Matrix lse_t(xt.rows(), 1);
    kernels::row_logsumexp(lse_t.data(), xt.data(), xt.rows(), xt.cols());
    Matrix out(1, a.cols());
    for (int j = 0; j < a.cols(); ++j) out(0, j) = lse_t(j, 0);
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& x = t.value(aid);
        const Matrix& lse = t.value(self);
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (int j = 0; j < x.cols(); ++j) {
            double gj = gout(0, j);
            if (gj == 0.0) continue;
            for (int i = 0; i < x.rows(); ++i)
                ga(i, j) += gj * kernels::fast_exp(x(i, j) - lse(0, j));
        }
    });
}

Var concat_cols(const std::vector<Var>& vs) {
    if (vs.empty()) throw ShapeMismatch("concat_cols: empty input");
    int n = vs[0].rows();
    int total = 0;
    for (const Var& v : vs) {
        if (v.rows() != n) throw ShapeMismatch("concat_cols: row counts differ");
        total += v.cols();
    }
    Matrix out(n, total);
    std::vector<int> ids;
    std::vector<int> offsets;
    int off = 0;
    for (const Var& v : vs) {
        offsets.push_back(off);
        ids.push_back(v.id);
        const Matrix& m = v.value();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m.cols(); ++j) out(i, off + j) = m(i, j);
        off += m.cols();
    }
    return vs[0].tape->make_node(std::move(out), ids, [ids, offsets](Tape& t, int self) {
        const Matrix& gout = t.grad(self);
        for (size_t k = 0; k < ids.size(); ++k) {
            Matrix& g = t.grad(ids[k]);
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) g(i, j) += gout(i, offsets[k] + j);
        }
    });
}

Var slice_cols(Var a, int c0, int c1) {
    if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw ShapeMismatch("slice_cols: bad range");
    Matrix out(a.rows(), c1 - c0);
    const Matrix& av = a.value();
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = av(i, c0 + j);
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid, c0](Tape& t, int self) {
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (int i = 0; i < gout.rows(); ++i)
            for (int j = 0; j < gout.cols(); ++j) ga(i, c0 + j) += gout(i, j);
    });
}

Var transpose(Var a) {
    Matrix out = a.value().transposed();
    int aid = a.id;
    return a.tape->make_node(std::move(out), {aid}, [aid](Tape& t, int self) {
        const Matrix& gout = t.grad(self);
        Matrix& ga = t.grad(aid);
        for (int i = 0; i < gout.rows(); ++i)
            for (int j = 0; j < gout.cols(); ++j) ga(j, i) += gout(i, j);
    });
}

Var detach(Var a) { return a.tape->leaf(a.value()); }

}  // namespace causalbound::ad
