#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/regression.hpp"

namespace dagforge {

struct PruneConfig {
    double threshold = 0.3;  // |weight| cutoff for prune_threshold
    double alpha = 0.05;     // significance level for prune_ci
};

// OLS coefficients of each node on its parents (intercept included, not
// stored), written onto the graph's support. Rank-deficient parent sets take
// the minimum-norm solution rather than failing.
inline WeightedGraph estimate_weights(const Dataset& data, const Dag& g) {
    if (g.node_count != data.variable_count())
        throw std::invalid_argument("estimate_weights: dimension mismatch");
    WeightedGraph w;
    w.node_count = g.node_count;
    w.weights = Eigen::MatrixXd::Zero(g.node_count, g.node_count);
    std::vector<int> parents;
    for (int i = 0; i < g.node_count; ++i) {
        parents.clear();
        for (int j = 0; j < g.node_count; ++j)
            if (g.adj(j, i) != 0) parents.push_back(j);
        if (parents.empty()) continue;
        const OlsFit fit = ols_fit(data, i, parents);
        for (std::size_t a = 0; a < parents.size(); ++a)
            w.weights(parents[a], i) = fit.coef(static_cast<Eigen::Index>(a));
    }
    return w;
}

// Keep edges with |weight| >= delta (boundary survives). A subgraph of a DAG,
// so acyclicity is free.
inline Dag prune_threshold(const WeightedGraph& w, double delta) {
    Dag g(w.node_count);
    for (int i = 0; i < w.node_count; ++i)
        for (int j = 0; j < w.node_count; ++j)
            if (i != j && std::abs(w.weights(i, j)) >= delta) g.adj(i, j) = 1;
    return g;
}

// Two-sided p-value of the Fisher-z partial-correlation test:
//   z = 1/2 sqrt(n - |cond| - 3) ln((1+r)/(1-r)),  p = erfc(|z| / sqrt 2).
// |r| >= 1 (collinearity) is treated as maximal dependence: p = 0.
inline double fisher_z_pvalue(double r, long n, int cond_size) {
    if (std::abs(r) >= 1.0) return 0.0;
    const double dof = static_cast<double>(n) - cond_size - 3.0;
    if (dof <= 0.0) return 1.0;  // too few samples to test: never significant
    const double z = 0.5 * std::sqrt(dof) * std::log((1.0 + r) / (1.0 - r));
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Remove each edge j -> i whose Fisher-z test of (X_i, X_j) given the other
// parents of i fails to reject independence (p > alpha). Every test for node i
// conditions on the parent set as it stood on entry — the snapshot makes the
// outcome independent of edge iteration order — and j itself is excluded from
// the conditioning set.
inline Dag prune_ci(const Dataset& data, const Dag& g, double alpha) {
    if (g.node_count != data.variable_count())
        throw std::invalid_argument("prune_ci: dimension mismatch");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("prune_ci: alpha must lie in [0, 1]");
    Dag out = g;
    std::vector<int> parents, given;
    for (int i = 0; i < g.node_count; ++i) {
        parents.clear();
        for (int j = 0; j < g.node_count; ++j)
            if (g.adj(j, i) != 0) parents.push_back(j);
        if (parents.empty()) continue;
        for (int j : parents) {
            given.clear();
            for (int other : parents)
                if (other != j) given.push_back(other);
            const double r = partial_correlation(data, i, j, given);
            if (fisher_z_pvalue(r, data.sample_count(), static_cast<int>(given.size())) > alpha)
                out.adj(j, i) = 0;
        }
    }
    return out;
}

}  // namespace dagforge
