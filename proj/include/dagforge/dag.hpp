#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dagforge {

// Directed acyclic graph on node_count labeled nodes. adj(i, j) == 1 encodes
// the edge i -> j. Graphs produced by this library are acyclic by
// construction; anything read from outside goes through validated_dag().
struct Dag {
    int node_count = 0;
    Eigen::MatrixXi adj;

    Dag() = default;
    explicit Dag(int d) : node_count(d), adj(Eigen::MatrixXi::Zero(d, d)) {}

    bool has_edge(int i, int j) const { return adj(i, j) != 0; }
    int edge_count() const { return adj.sum(); }

    std::vector<int> parents(int j) const {
        std::vector<int> out;
        for (int i = 0; i < node_count; ++i)
            if (adj(i, j) != 0) out.push_back(i);
        return out;
    }

    std::vector<int> children(int i) const {
        std::vector<int> out;
        for (int j = 0; j < node_count; ++j)
            if (adj(i, j) != 0) out.push_back(j);
        return out;
    }

    bool operator==(const Dag& other) const {
        return node_count == other.node_count && adj == other.adj;
    }
};

// Weighted digraph; weights(i, j) != 0 encodes edge i -> j with that
// coefficient. The structure is not required to be acyclic here (it holds the
// raw output of the continuous ablation), but structure() of anything meant
// as a causal estimate should be.
struct WeightedGraph {
    int node_count = 0;
    Eigen::MatrixXd weights;

    WeightedGraph() = default;
    explicit WeightedGraph(int d) : node_count(d), weights(Eigen::MatrixXd::Zero(d, d)) {}

    Dag structure() const {
        Dag g(node_count);
        for (int i = 0; i < node_count; ++i)
            for (int j = 0; j < node_count; ++j)
                g.adj(i, j) = weights(i, j) != 0.0 ? 1 : 0;
        return g;
    }
};

// Kahn elimination. O(d^2); fine for the matrix representation used here.
inline bool is_acyclic(const Eigen::MatrixXi& adj) {
    const int d = static_cast<int>(adj.rows());
    if (adj.cols() != d) return false;
    std::vector<int> indeg(d, 0);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (adj(i, j) != 0) ++indeg[j];
    std::vector<char> removed(d, 0);
    int eliminated = 0;
    bool progress = true;
    while (progress) {
        progress = false;
        for (int v = 0; v < d; ++v) {
            if (!removed[v] && indeg[v] == 0) {
                removed[v] = 1;
                ++eliminated;
                progress = true;
                for (int j = 0; j < d; ++j)
                    if (adj(v, j) != 0) --indeg[j];
            }
        }
    }
    return eliminated == d;
}

inline bool is_acyclic(const Dag& g) { return is_acyclic(g.adj); }

// Topological order, smallest node index first among ready nodes so the
// result is deterministic. Throws if a cycle is present.
inline std::vector<int> topological_order(const Dag& g) {
    const int d = g.node_count;
    std::vector<int> indeg(d, 0), order;
    order.reserve(d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (g.adj(i, j) != 0) ++indeg[j];
    std::vector<char> placed(d, 0);
    for (int step = 0; step < d; ++step) {
        int pick = -1;
        for (int v = 0; v < d; ++v)
            if (!placed[v] && indeg[v] == 0) { pick = v; break; }
        if (pick < 0) throw std::invalid_argument("topological_order: graph has a cycle");
        placed[pick] = 1;
        order.push_back(pick);
        for (int j = 0; j < d; ++j)
            if (g.adj(pick, j) != 0) --indeg[j];
    }
    return order;
}

// reach(i, j) == 1 iff a directed path i -> ... -> j exists (length >= 1).
inline Eigen::MatrixXi reachability(const Dag& g) {
    const int d = g.node_count;
    Eigen::MatrixXi reach = g.adj;
    // DFS from each source over the adjacency matrix.
    for (int s = 0; s < d; ++s) {
        std::vector<char> seen(d, 0);
        std::vector<int> stack;
        for (int j = 0; j < d; ++j)
            if (g.adj(s, j) != 0) { stack.push_back(j); seen[j] = 1; }
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            reach(s, v) = 1;
            for (int j = 0; j < d; ++j)
                if (g.adj(v, j) != 0 && !seen[j]) { seen[j] = 1; stack.push_back(j); }
        }
    }
    return reach;
}

// Number of ancestors of each node (nodes with a directed path into it).
inline std::vector<int> ancestor_counts(const Dag& g) {
    Eigen::MatrixXi reach = reachability(g);
    std::vector<int> counts(g.node_count, 0);
    for (int j = 0; j < g.node_count; ++j) {
        int c = 0;
        for (int i = 0; i < g.node_count; ++i)
            if (i != j && reach(i, j) != 0) ++c;
        counts[j] = c;
    }
    return counts;
}

// Checks an untrusted adjacency matrix: square, binary, hollow diagonal,
// acyclic. Used by the CSV loader and anywhere else input crosses the API.
inline Dag validated_dag(const Eigen::MatrixXi& adj) {
    const int d = static_cast<int>(adj.rows());
    if (adj.cols() != d)
        throw std::invalid_argument("adjacency matrix must be square, got " +
                                    std::to_string(adj.rows()) + "x" + std::to_string(adj.cols()));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const int v = adj(i, j);
            if (v != 0 && v != 1)
                throw std::invalid_argument("adjacency entries must be 0 or 1, found " +
                                            std::to_string(v) + " at (" + std::to_string(i) +
                                            "," + std::to_string(j) + ")");
            if (i == j && v != 0)
                throw std::invalid_argument("self-loop at node " + std::to_string(i));
        }
    }
    if (!is_acyclic(adj)) throw std::invalid_argument("adjacency matrix contains a cycle");
    Dag g(d);
    g.adj = adj;
    return g;
}

// Every labeled DAG on d nodes (1, 3, 25, 543 for d = 1..4). Exhaustive over
// the 2^(d(d-1)) orientations of ordered pairs, so d is capped where that is
// still instant.
inline std::vector<Dag> enumerate_dags(int d) {
    if (d < 1) throw std::invalid_argument("enumerate_dags: d must be >= 1");
    if (d > 4) throw std::invalid_argument("enumerate_dags: d > 4 is not tractable by enumeration");
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) slots.emplace_back(i, j);
    std::vector<Dag> out;
    const std::uint64_t total = 1ULL << slots.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        Dag g(d);
        for (std::size_t t = 0; t < slots.size(); ++t)
            if (mask >> t & 1ULL) g.adj(slots[t].first, slots[t].second) = 1;
        if (is_acyclic(g)) out.push_back(std::move(g));
    }
    return out;
}

}  // namespace dagforge
