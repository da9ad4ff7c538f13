#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causalbound {

struct GraphError : std::runtime_error {
    explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};
struct CycleError : GraphError {
    explicit CycleError(const std::string& what) : GraphError(what) {}
};
struct UnknownNodeError : GraphError {
    explicit UnknownNodeError(const std::string& what) : GraphError(what) {}
};
struct GraphParseError : GraphError {
    GraphParseError(int line, const std::string& what)
        : GraphError("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

enum class NodeKind { treatment, outcome, covariate };

const char* to_string(NodeKind k);

/// Causal graph over named observed nodes: a DAG of directed edges plus
/// bidirected edges standing for shared latent confounders. Immutable after
/// validate(); safe to share across threads.
class CausalGraph {
  public:
    struct Node {
        std::string name;
        NodeKind kind;
    };

    void add_node(const std::string& name, NodeKind kind);
    void add_edge(const std::string& parent, const std::string& child);
    void add_bidirected(const std::string& a, const std::string& b);

    /// Checks all structural invariants; throws GraphError/CycleError.
    void validate() const;

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::pair<std::string, std::string>>& directed_edges() const {
        return directed_;
    }
    const std::vector<std::pair<std::string, std::string>>& bidirected_edges() const {
        return bidirected_;
    }

    bool has_node(const std::string& name) const { return index_.count(name) > 0; }
    int index_of(const std::string& name) const;
    NodeKind kind_of(const std::string& name) const;
    const std::string& treatment() const;
    const std::string& outcome() const;

    /// Text format: one declaration per line, `node <name> <kind>`,
    /// `edge <parent> <child>`, `bidir <a> <b>`; `#` starts a comment.
    static CausalGraph parse(const std::string& text);
    static CausalGraph load(const std::string& path);
    std::string to_text() const;
    void save(const std::string& path) const;

  private:
    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, std::string>> directed_;
    std::vector<std::pair<std::string, std::string>> bidirected_;
    std::unordered_map<std::string, int> index_;
};

/// Deterministic topological order: ties broken by lexicographic node name.
std::vector<std::string> topological_order(const CausalGraph& g);

/// Directed parents of v, ordered by topological position.
std::vector<std::string> parents(const CausalGraph& g, const std::string& v);

struct C2Partition {
    std::vector<std::vector<std::string>> components;      // each sorted by topo position
    std::unordered_map<std::string, int> component_of;     // node name -> index
};

/// Connected components of the bidirected subgraph; nodes without bidirected
/// edges form singletons. Component order follows the topological position of
/// each component's earliest node, so downstream latent layouts are stable.
C2Partition c2_components(const CausalGraph& g);

}  // namespace causalbound
