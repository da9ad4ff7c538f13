#include "causalbound/param_store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "causalbound/kernels.hpp"

namespace causalbound::ad {

int ParamStore::add(const std::string& name, Matrix init) {
    if (index_.count(name)) throw std::runtime_error("duplicate parameter: " + name);
    int id = static_cast<int>(entries_.size());
    index_[name] = id;
    Matrix g(init.rows(), init.cols(), 0.0);
    entries_.push_back({name, std::move(init), std::move(g)});
    return id;
}

int ParamStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
    return it->second;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) e.grad.fill(0.0);
}

double ParamStore::grad_norm() const {
    double sq = 0.0;
    for (const auto& e : entries_)
        for (size_t i = 0; i < e.grad.size(); ++i) sq += e.grad[i] * e.grad[i];
    return std::sqrt(sq);
}

std::vector<Matrix> ParamStore::snapshot() const {
    std::vector<Matrix> snap;
    snap.reserve(entries_.size());
    for (const auto& e : entries_) snap.push_back(e.value);
    return snap;
}

void ParamStore::restore(const std::vector<Matrix>& snap) {
    if (snap.size() != entries_.size()) throw std::runtime_error("snapshot size mismatch");
    for (size_t i = 0; i < snap.size(); ++i) {
        check_same_shape(entries_[i].value, snap[i], "ParamStore::restore");
        entries_[i].value = snap[i];
    }
}

void ParamStore::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "causalbound-params v1\n";
    char buf[64];
    for (const auto& e : entries_) {
        out << "param " << e.name << " " << e.value.rows() << " " << e.value.cols() << "\n";
        for (int r = 0; r < e.value.rows(); ++r) {
            for (int c = 0; c < e.value.cols(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", e.value(r, c));
                out << buf << (c + 1 == e.value.cols() ? "" : " ");
            }
            out << "\n";
        }
    }
}

namespace {

void parse_checkpoint(std::istream& in, const std::string& path,
                      const std::function<void(const std::string&, Matrix&&)>& sink) {
    std::string header;
    std::getline(in, header);
    if (header != "causalbound-params v1")
        throw std::runtime_error("bad checkpoint header in " + path);
    std::string tok;
    while (in >> tok) {
        if (tok != "param") throw std::runtime_error("bad checkpoint record in " + path);
        std::string name;
        int rows, cols;
        if (!(in >> name >> rows >> cols))
            throw std::runtime_error("truncated checkpoint in " + path);
        Matrix m(rows, cols);
        for (size_t i = 0; i < m.size(); ++i)
            if (!(in >> m[i])) throw std::runtime_error("truncated checkpoint in " + path);
        sink(name, std::move(m));
    }
}

}  // namespace

ParamStore ParamStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    ParamStore store;
    parse_checkpoint(in, path, [&](const std::string& name, Matrix&& m) {
        store.add(name, std::move(m));
    });
    return store;
}

void ParamStore::load_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    parse_checkpoint(in, path, [&](const std::string& name, Matrix&& m) {
        Matrix& dst = value(name);
        check_same_shape(dst, m, "load_values");
        dst = std::move(m);
    });
}

Var param_leaf(Tape& tape, ParamStore& store, int index) {
    ParamStore* sp = &store;
    return tape.make_node(store.value(index), {}, [sp, index](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        Matrix& slot = sp->grad(index);
        kernels::ew_axpy(slot.data(), g.data(), 1.0, g.size());
    });
}

void AdamOptimizer::reset() {
    m_.clear();
    v_.clear();
    t_ = 0;
}

void AdamOptimizer::step(ParamStore& store) {
    if (m_.empty()) {
        for (int i = 0; i < store.count(); ++i) {
            m_.emplace_back(store.value(i).rows(), store.value(i).cols(), 0.0);
            v_.emplace_back(store.value(i).rows(), store.value(i).cols(), 0.0);
        }
    }
    double scale = 1.0;
    if (cfg_.clip > 0.0) {
        double norm = store.grad_norm();
        if (norm > cfg_.clip) scale = cfg_.clip / norm;
    }
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (int p = 0; p < store.count(); ++p) {
        Matrix& th = store.value(p);
        const Matrix& g = store.grad(p);
        Matrix& m = m_[p];
        Matrix& v = v_[p];
        for (size_t i = 0; i < th.size(); ++i) {
            double gi = g[i] * scale;
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            th[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
    store.zero_grads();
    store.bump_step();
}

void sgd_adam_step(ParamStore& store, double lr, double clip) {
    auto opt = std::static_pointer_cast<AdamOptimizer>(store.builtin_adam_);
    if (!opt) {
        opt = std::make_shared<AdamOptimizer>(AdamConfig{});
        store.builtin_adam_ = opt;
    }
    opt->config().lr = lr;
    opt->config().clip = clip;
    opt->step(store);
}

}  // namespace causalbound::ad
