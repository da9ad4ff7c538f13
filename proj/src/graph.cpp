#include "causalbound/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace causalbound {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::treatment: return "treatment";
        case NodeKind::outcome: return "outcome";
        case NodeKind::covariate: return "covariate";
    }
    return "?";
}

void CausalGraph::add_node(const std::string& name, NodeKind kind) {
    if (index_.count(name)) throw GraphError("duplicate node: " + name);
    index_[name] = static_cast<int>(nodes_.size());
    nodes_.push_back({name, kind});
}

void CausalGraph::add_edge(const std::string& parent, const std::string& child) {
    directed_.emplace_back(parent, child);
}

void CausalGraph::add_bidirected(const std::string& a, const std::string& b) {
    bidirected_.emplace_back(a, b);
}

int CausalGraph::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UnknownNodeError("unknown node: " + name);
    return it->second;
}

NodeKind CausalGraph::kind_of(const std::string& name) const {
    return nodes_[index_of(name)].kind;
}

const std::string& CausalGraph::treatment() const {
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::treatment) return n.name;
    throw GraphError("graph has no treatment node");
}

const std::string& CausalGraph::outcome() const {
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::outcome) return n.name;
    throw GraphError("graph has no outcome node");
}

void CausalGraph::validate() const {
    int n_treat = 0, n_out = 0;
    for (const auto& n : nodes_) {
        if (n.kind == NodeKind::treatment) ++n_treat;
        if (n.kind == NodeKind::outcome) ++n_out;
    }
    if (n_treat != 1) throw GraphError("expected exactly one treatment node, got " +
                                       std::to_string(n_treat));
    if (n_out != 1) throw GraphError("expected exactly one outcome node, got " +
                                     std::to_string(n_out));

    std::set<std::pair<std::string, std::string>> seen_dir;
    for (const auto& [p, c] : directed_) {
        index_of(p);
        index_of(c);
        if (p == c) throw GraphError("self-loop on " + p);
        if (!seen_dir.insert({p, c}).second) throw GraphError("duplicate edge " + p + " -> " + c);
    }
    std::set<std::pair<std::string, std::string>> seen_bi;
    for (const auto& [a, b] : bidirected_) {
        index_of(a);
        index_of(b);
        if (a == b) throw GraphError("bidirected self-loop on " + a);
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        if (!seen_bi.insert(key).second)
            throw GraphError("duplicate bidirected edge " + a + " <-> " + b);
    }
    topological_order(*this);  // throws CycleError on a directed cycle
}

std::vector<std::string> topological_order(const CausalGraph& g) {
    const int n = g.size();
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> out(n);
    for (const auto& [p, c] : g.directed_edges()) {
        out[g.index_of(p)].push_back(g.index_of(c));
        ++indeg[g.index_of(c)];
    }
    // min-heap on node name for the deterministic tie-break
    auto cmp = [&](int a, int b) { return g.nodes()[a].name > g.nodes()[b].name; };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push(i);

    std::vector<std::string> order;
    order.reserve(n);
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(g.nodes()[v].name);
        for (int c : out[v])
            if (--indeg[c] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != n)
        throw CycleError("directed subgraph contains a cycle");
    return order;
}

std::vector<std::string> parents(const CausalGraph& g, const std::string& v) {
    g.index_of(v);
    auto order = topological_order(g);
    std::unordered_map<std::string, int> pos;
    for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);

    std::vector<std::string> ps;
    for (const auto& [p, c] : g.directed_edges())
        if (c == v) ps.push_back(p);
    std::sort(ps.begin(), ps.end(), [&](const std::string& a, const std::string& b) {
        return pos[a] < pos[b];
    });
    return ps;
}

C2Partition c2_components(const CausalGraph& g) {
    const int n = g.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : g.bidirected_edges()) {
        adj[g.index_of(a)].push_back(g.index_of(b));
        adj[g.index_of(b)].push_back(g.index_of(a));
    }

    auto order = topological_order(g);
    std::unordered_map<std::string, int> pos;
    for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);

    C2Partition part;
    // visit nodes in topological position order so component indices are stable
    for (const auto& name : order) {
        int root = g.index_of(name);
        if (comp[root] >= 0) continue;
        int id = static_cast<int>(part.components.size());
        std::vector<int> stack{root};
        comp[root] = id;
        std::vector<std::string> members;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            members.push_back(g.nodes()[v].name);
            for (int w : adj[v])
                if (comp[w] < 0) {
                    comp[w] = id;
                    stack.push_back(w);
                }
        }
        std::sort(members.begin(), members.end(), [&](const std::string& a, const std::string& b) {
            return pos[a] < pos[b];
        });
        part.components.push_back(std::move(members));
    }
    for (int i = 0; i < n; ++i) part.component_of[g.nodes()[i].name] = comp[i];
    return part;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream iss(s);
    std::vector<std::string> out;
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

CausalGraph CausalGraph::parse(const std::string& text) {
    CausalGraph g;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        try {
            if (toks[0] == "node") {
                if (toks.size() != 3) throw GraphError("expected: node <name> <kind>");
                NodeKind k;
                if (toks[2] == "treatment") k = NodeKind::treatment;
                else if (toks[2] == "outcome") k = NodeKind::outcome;
                else if (toks[2] == "covariate") k = NodeKind::covariate;
                else throw GraphError("unknown node kind: " + toks[2]);
                g.add_node(toks[1], k);
            } else if (toks[0] == "edge") {
                if (toks.size() != 3) throw GraphError("expected: edge <parent> <child>");
                g.add_edge(toks[1], toks[2]);
            } else if (toks[0] == "bidir") {
                if (toks.size() != 3) throw GraphError("expected: bidir <a> <b>");
                g.add_bidirected(toks[1], toks[2]);
            } else {
                throw GraphError("unknown declaration: " + toks[0]);
            }
        } catch (const GraphParseError&) {
            throw;
        } catch (const GraphError& e) {
            throw GraphParseError(lineno, e.what());
        }
    }
    try {
        g.validate();
    } catch (const GraphError& e) {
        throw GraphParseError(lineno, e.what());
    }
    return g;
}

CausalGraph CausalGraph::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open graph file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string CausalGraph::to_text() const {
    std::ostringstream out;
    for (const auto& n : nodes_) out << "node " << n.name << " " << to_string(n.kind) << "\n";
    for (const auto& [p, c] : directed_) out << "edge " << p << " " << c << "\n";
    for (const auto& [a, b] : bidirected_) out << "bidir " << a << " " << b << "\n";
    return out.str();
}

void CausalGraph::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write graph file: " + path);
    out << to_text();
}

}  // namespace causalbound
