#include "causalbound/gcm.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "causalbound/kernels.hpp"

namespace causalbound {

namespace {

const char* family_name(NodeFamily f) { return f == NodeFamily::mlp ? "mlp" : "linear"; }
const char* act_name(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

double logit(double u) {
    u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
    return std::log(u / (1.0 - u));
}

}  // namespace

GenerativeSCM::GenerativeSCM(CausalGraph graph, NodeFunctionSpec default_spec,
                             std::map<std::string, OutputKind> output_kinds,
                             int latent_dim_per_component, uint64_t init_seed)
    : graph_(std::move(graph)),
      latent_dim_per_component_(latent_dim_per_component),
      default_spec_(default_spec) {
    graph_.validate();
    partition_ = c2_components(graph_);
    order_ = topological_order(graph_);

    std::map<std::string, int> col_of;
    for (size_t i = 0; i < order_.size(); ++i) col_of[order_[i]] = static_cast<int>(i);

    // latent layout: component blocks first, then binary threshold columns
    std::vector<int> comp_offset(partition_.components.size(), 0);
    int off = 0;
    for (size_t c = 0; c < partition_.components.size(); ++c) {
        comp_offset[c] = off;
        int width = latent_dim_per_component_ > 0
                        ? latent_dim_per_component_
                        : static_cast<int>(partition_.components[c].size());
        off += width;
    }

    for (size_t i = 0; i < order_.size(); ++i) {
        NodeInfo info;
        info.name = order_[i];
        info.spec = default_spec_;
        auto kit = output_kinds.find(info.name);
        info.kind = kit == output_kinds.end() ? OutputKind::continuous : kit->second;
        for (const auto& p : parents(graph_, info.name)) info.parent_cols.push_back(col_of[p]);
        info.component = partition_.component_of.at(info.name);
        info.latent_offset = comp_offset[info.component];
        info.latent_width = latent_dim_per_component_ > 0
                                ? latent_dim_per_component_
                                : static_cast<int>(partition_.components[info.component].size());
        if (info.kind == OutputKind::binary) info.threshold_col = off++;
        info.input_dim = static_cast<int>(info.parent_cols.size()) + info.latent_width;
        if (graph_.kind_of(info.name) == NodeKind::treatment)
            treatment_idx_ = static_cast<int>(i);
        if (graph_.kind_of(info.name) == NodeKind::outcome) outcome_idx_ = static_cast<int>(i);
        nodes_.push_back(std::move(info));
    }
    latent_total_ = off;
    init_params(init_seed);
}

void GenerativeSCM::set_node_spec(const std::string& node, NodeFunctionSpec spec) {
    for (auto& info : nodes_)
        if (info.name == node) {
            info.spec = spec;
            return;
        }
    throw UnknownNodeError("unknown node: " + node);
}

OutputKind GenerativeSCM::output_kind(const std::string& node) const {
    for (const auto& info : nodes_)
        if (info.name == node) return info.kind;
    throw UnknownNodeError("unknown node: " + node);
}

void GenerativeSCM::init_params(uint64_t seed) {
    params_ = ad::ParamStore();
    Rng root(seed);
    int pidx = 0;
    auto glorot = [&](int rows, int cols, int fan_in, int fan_out) {
        Rng r = root.child(pidx++);
        double lim = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(rows, cols);
        for (size_t i = 0; i < w.size(); ++i) w[i] = r.uniform(-lim, lim);
        return w;
    };
    for (auto& info : nodes_) {
        const auto& s = info.spec;
        if (s.family == NodeFamily::linear) {
            params_.add(info.name + ".w", glorot(info.input_dim, 1, info.input_dim, 1));
            params_.add(info.name + ".b", Matrix(1, 1, 0.0));
        } else {
            int in = info.input_dim;
            for (int l = 0; l < s.hidden_layers; ++l) {
                params_.add(info.name + ".W" + std::to_string(l),
                            glorot(in, s.hidden_width, in, s.hidden_width));
                params_.add(info.name + ".b" + std::to_string(l),
                            Matrix(1, s.hidden_width, 0.0));
                in = s.hidden_width;
            }
            params_.add(info.name + ".Wout", glorot(in, 1, in, 1));
            params_.add(info.name + ".bout", Matrix(1, 1, 0.0));
        }
    }
}

LatentBatch GenerativeSCM::draw_latents(int n, uint64_t seed) const {
    Rng rng(seed);
    LatentBatch lat;
    lat.u = Matrix(n, latent_total_);
    for (size_t i = 0; i < lat.u.size(); ++i) lat.u[i] = rng.uniform_open();
    return lat;
}

Matrix GenerativeSCM::node_forward_plain(const NodeInfo& info, const Matrix& inputs) const {
    const auto& s = info.spec;
    const int n = inputs.rows();
    if (s.family == NodeFamily::linear) {
        const Matrix& w = params_.value(info.name + ".w");
        double b = params_.value(info.name + ".b")(0, 0);
        Matrix out(n, 1);
        kernels::matmul(out.data(), inputs.data(), w.data(), n, inputs.cols(), 1);
        for (int i = 0; i < n; ++i) out(i, 0) += b;
        return out;
    }
    Matrix h = inputs;
    for (int l = 0; l < s.hidden_layers; ++l) {
        const Matrix& w = params_.value(info.name + ".W" + std::to_string(l));
        const Matrix& b = params_.value(info.name + ".b" + std::to_string(l));
        Matrix z(n, w.cols());
        kernels::matmul(z.data(), h.data(), w.data(), n, h.cols(), w.cols());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < z.cols(); ++j) z(i, j) += b(0, j);
        if (s.activation == Activation::tanh)
            kernels::ew_tanh(z.data(), z.data(), z.size());
        else
            kernels::ew_relu(z.data(), z.data(), z.size());
        h = std::move(z);
    }
    const Matrix& w = params_.value(info.name + ".Wout");
    double b = params_.value(info.name + ".bout")(0, 0);
    Matrix out(n, 1);
    kernels::matmul(out.data(), h.data(), w.data(), n, h.cols(), 1);
    for (int i = 0; i < n; ++i) out(i, 0) += b;
    return out;
}

Matrix GenerativeSCM::evaluate(const LatentBatch& latents, EvalMode mode,
                               const Matrix* forced_treatment) const {
    const int n = latents.n();
    if (latents.u.cols() != latent_total_)
        throw ShapeMismatch("latent batch width does not match the model");
    Matrix out(n, static_cast<int>(nodes_.size()));
    Matrix col(n, 1);
    for (size_t k = 0; k < nodes_.size(); ++k) {
        const NodeInfo& info = nodes_[k];
        if (static_cast<int>(k) == treatment_idx_ && forced_treatment) {
            if (forced_treatment->rows() == 1) {
                double t = (*forced_treatment)(0, 0);
                for (int i = 0; i < n; ++i) col(i, 0) = t;
            } else {
                if (forced_treatment->rows() != n)
                    throw ShapeMismatch("forced treatment length != latent count");
                for (int i = 0; i < n; ++i) col(i, 0) = (*forced_treatment)(i, 0);
            }
        } else {
            Matrix inputs(n, info.input_dim);
            int c = 0;
            for (int pc : info.parent_cols) {
                for (int i = 0; i < n; ++i) inputs(i, c) = out(i, pc);
                ++c;
            }
            for (int l = 0; l < info.latent_width; ++l) {
                for (int i = 0; i < n; ++i)
                    inputs(i, c) = latents.u(i, info.latent_offset + l) - 0.5;
                ++c;
            }
            col = node_forward_plain(info, inputs);
            if (info.kind == OutputKind::binary) {
                for (int i = 0; i < n; ++i) {
                    double lu = logit(latents.u(i, info.threshold_col));
                    if (mode == EvalMode::training) {
                        double z = (col(i, 0) - lu) / binary_tau_;
                        col(i, 0) = 1.0 / (1.0 + kernels::fast_exp(-z));
                    } else {
                        col(i, 0) = col(i, 0) > lu ? 1.0 : 0.0;
                    }
                }
            }
        }
        for (int i = 0; i < n; ++i) out(i, static_cast<int>(k)) = col(i, 0);
    }
    return out;
}

Dataset GenerativeSCM::sample(int n, uint64_t seed, EvalMode mode) const {
    return sample_with_latents(n, seed, mode).first;
}

std::pair<Dataset, LatentBatch> GenerativeSCM::sample_with_latents(int n, uint64_t seed,
                                                                   EvalMode mode) const {
    LatentBatch lat = draw_latents(n, seed);
    Dataset data;
    data.values = evaluate(lat, mode, nullptr);
    data.columns = order_;
    data.seed = seed;
    data.source = "model";
    return {std::move(data), std::move(lat)};
}

Matrix GenerativeSCM::intervene(double t, const LatentBatch& latents, EvalMode mode) const {
    Matrix tm(1, 1, t);
    return intervene(tm, latents, mode);
}

Matrix GenerativeSCM::intervene(const Matrix& t_column, const LatentBatch& latents,
                                EvalMode mode) const {
    Matrix all = evaluate(latents, mode, &t_column);
    return all.col(outcome_idx_);
}

Matrix GenerativeSCM::response_curve(const LatentBatch& latents,
                                     const std::vector<double>& t_grid, EvalMode mode) const {
    if (t_grid.empty()) throw std::invalid_argument("response_curve: empty grid");
    Matrix out(static_cast<int>(t_grid.size()), latents.n());
    for (size_t k = 0; k < t_grid.size(); ++k) {
        Matrix y = intervene(t_grid[k], latents, mode);
        for (int i = 0; i < latents.n(); ++i) out(static_cast<int>(k), i) = y(i, 0);
    }
    return out;
}

ad::Var GenerativeSCM::node_forward_tape(ad::Tape& tape, const NodeInfo& info, ad::Var inputs) {
    using namespace ad;
    const auto& s = info.spec;
    if (s.family == NodeFamily::linear) {
        Var w = param_leaf(tape, params_, params_.index_of(info.name + ".w"));
        Var b = param_leaf(tape, params_, params_.index_of(info.name + ".b"));
        Var z = matmul(inputs, w);
        Matrix ones(z.rows(), 1, 1.0);
        return add(z, matmul(tape.leaf(ones), b));
    }
    Var h = inputs;
    for (int l = 0; l < s.hidden_layers; ++l) {
        Var w = param_leaf(tape, params_, params_.index_of(info.name + ".W" + std::to_string(l)));
        Var b = param_leaf(tape, params_, params_.index_of(info.name + ".b" + std::to_string(l)));
        Var z = add(matmul(h, w), b);  // row broadcast
        h = s.activation == Activation::tanh ? tanh_op(z) : relu(z);
    }
    Var w = param_leaf(tape, params_, params_.index_of(info.name + ".Wout"));
    Var b = param_leaf(tape, params_, params_.index_of(info.name + ".bout"));
    Var z = matmul(h, w);
    Matrix ones(z.rows(), 1, 1.0);
    return add(z, matmul(tape.leaf(ones), b));
}

GenerativeSCM::TapeEval GenerativeSCM::evaluate_tape(
    ad::Tape& tape, const LatentBatch& latents, const std::optional<ad::Var>& forced_treatment) {
    using namespace ad;
    const int n = latents.n();
    if (latents.u.cols() != latent_total_)
        throw ShapeMismatch("latent batch width does not match the model");
    TapeEval ev;
    ev.columns.reserve(nodes_.size());
    for (size_t k = 0; k < nodes_.size(); ++k) {
        const NodeInfo& info = nodes_[k];
        Var col{};
        if (static_cast<int>(k) == treatment_idx_ && forced_treatment) {
            col = *forced_treatment;
            if (col.rows() != n || col.cols() != 1)
                throw ShapeMismatch("forced treatment Var must be n x 1");
        } else {
            std::vector<Var> parts;
            for (int pc : info.parent_cols) parts.push_back(ev.columns[pc]);
            if (info.latent_width > 0) {
                Matrix ublock(n, info.latent_width);
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < info.latent_width; ++l)
                        ublock(i, l) = latents.u(i, info.latent_offset + l) - 0.5;
                parts.push_back(tape.leaf(ublock));
            }
            Var inputs = parts.size() == 1 ? parts[0] : concat_cols(parts);
            col = node_forward_tape(tape, info, inputs);
            if (info.kind == OutputKind::binary) {
                // relaxed threshold: sigmoid((logit - logit(u)) / tau)
                Matrix lu(n, 1);
                for (int i = 0; i < n; ++i) lu(i, 0) = logit(latents.u(i, info.threshold_col));
                col = sigmoid(scalar_mul(sub(col, tape.leaf(lu)), 1.0 / binary_tau_));
            }
        }
        ev.columns.push_back(col);
    }
    ev.all = concat_cols(ev.columns);
    ev.treatment = ev.columns[treatment_idx_];
    ev.outcome = ev.columns[outcome_idx_];
    return ev;
}

void GenerativeSCM::save_checkpoint(const std::string& path_prefix) const {
    params_.save(path_prefix + ".params");
    nlohmann::json spec;
    spec["latent_dim_per_component"] = latent_dim_per_component_;
    spec["binary_temperature"] = binary_tau_;
    spec["graph"] = graph_.to_text();
    for (const auto& info : nodes_) {
        nlohmann::json ns;
        ns["family"] = family_name(info.spec.family);
        ns["hidden_layers"] = info.spec.hidden_layers;
        ns["hidden_width"] = info.spec.hidden_width;
        ns["activation"] = act_name(info.spec.activation);
        ns["output"] = info.kind == OutputKind::binary ? "binary" : "continuous";
        spec["nodes"][info.name] = ns;
    }
    std::ofstream out(path_prefix + ".spec.json");
    if (!out) throw std::runtime_error("cannot write checkpoint sidecar");
    out << spec.dump(2) << "\n";
}

void GenerativeSCM::load_checkpoint(const std::string& path_prefix) {
    params_.load_values(path_prefix + ".params");
}

}  // namespace causalbound
