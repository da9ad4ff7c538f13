#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalbound/dataset.hpp"
#include "causalbound/graph.hpp"
#include "causalbound/param_store.hpp"
#include "causalbound/rng.hpp"
#include "causalbound/tape.hpp"

namespace causalbound {

enum class NodeFamily { mlp, linear };
enum class Activation { tanh, relu };
enum class OutputKind { continuous, binary };
enum class EvalMode { training, evaluation };

struct NodeFunctionSpec {
    NodeFamily family = NodeFamily::mlp;
    int hidden_layers = 2;
    int hidden_width = 16;
    Activation activation = Activation::tanh;
};

/// Uniform latent draws: one block per bidirected component (shared by its
/// member nodes within a sample), plus one private threshold column per
/// binary node for the relaxed Bernoulli comparison.
struct LatentBatch {
    Matrix u;  // n x total_dim, entries in (0, 1)
    int n() const { return u.rows(); }
};

/// Generative SCM constrained by a causal graph: one parameterized function
/// per observed node, consuming its observed parents and its component's
/// latent block. Node evaluation follows the topological order; a hard
/// intervention replaces the treatment's function output by a constant.
class GenerativeSCM {
  public:
    GenerativeSCM(CausalGraph graph, NodeFunctionSpec default_spec,
                  std::map<std::string, OutputKind> output_kinds = {},
                  int latent_dim_per_component = 0,  // 0 = component size
                  uint64_t init_seed = 1);

    void set_node_spec(const std::string& node, NodeFunctionSpec spec);
    void init_params(uint64_t seed);  // re-draws all weights

    const CausalGraph& graph() const { return graph_; }
    const C2Partition& partition() const { return partition_; }
    const std::vector<std::string>& order() const { return order_; }
    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }
    OutputKind output_kind(const std::string& node) const;
    int latent_dim() const { return latent_total_; }
    double binary_temperature() const { return binary_tau_; }
    void set_binary_temperature(double tau) { binary_tau_ = tau; }

    LatentBatch draw_latents(int n, uint64_t seed) const;

    /// Columns follow the topological order.
    Dataset sample(int n, uint64_t seed, EvalMode mode = EvalMode::evaluation) const;
    std::pair<Dataset, LatentBatch> sample_with_latents(
        int n, uint64_t seed, EvalMode mode = EvalMode::evaluation) const;

    /// Full evaluation; forced_treatment (n x 1 or 1 x 1) bypasses f_T.
    Matrix evaluate(const LatentBatch& latents, EvalMode mode,
                    const Matrix* forced_treatment = nullptr) const;

    /// Outcome column under do(T = t) with the given latents.
    Matrix intervene(double t, const LatentBatch& latents,
                     EvalMode mode = EvalMode::evaluation) const;
    Matrix intervene(const Matrix& t_column, const LatentBatch& latents,
                     EvalMode mode = EvalMode::evaluation) const;

    /// Row k = outcomes under do(T = grid[k]); |grid| x n.
    Matrix response_curve(const LatentBatch& latents, const std::vector<double>& t_grid,
                          EvalMode mode = EvalMode::evaluation) const;

    struct TapeEval {
        std::vector<ad::Var> columns;  // per node, topological order
        ad::Var all;                   // n x d
        ad::Var outcome;
        ad::Var treatment;
    };
    /// Differentiable evaluation (training mode: binary nodes emit the
    /// temperature-relaxed sigmoid). forced_treatment must be n x 1.
    TapeEval evaluate_tape(ad::Tape& tape, const LatentBatch& latents,
                           const std::optional<ad::Var>& forced_treatment = std::nullopt);

    int treatment_index() const { return treatment_idx_; }
    int outcome_index() const { return outcome_idx_; }

    /// Checkpoint = ParamStore file + a JSON sidecar of the specs.
    void save_checkpoint(const std::string& path_prefix) const;
    void load_checkpoint(const std::string& path_prefix);

  private:
    struct NodeInfo {
        std::string name;
        NodeFunctionSpec spec;
        OutputKind kind;
        std::vector<int> parent_cols;  // indices into the topo-order columns
        int component = -1;
        int latent_offset = 0, latent_width = 0;
        int threshold_col = -1;  // binary nodes only
        int input_dim = 0;
    };

    Matrix node_forward_plain(const NodeInfo& info, const Matrix& inputs) const;
    ad::Var node_forward_tape(ad::Tape& tape, const NodeInfo& info, ad::Var inputs);

    CausalGraph graph_;
    C2Partition partition_;
    std::vector<std::string> order_;
    std::vector<NodeInfo> nodes_;  // topo order
    ad::ParamStore params_;
    int latent_total_ = 0;
    int treatment_idx_ = -1, outcome_idx_ = -1;
    int latent_dim_per_component_ = 0;
    double binary_tau_ = 0.5;
    NodeFunctionSpec default_spec_;
};

}  // namespace causalbound
