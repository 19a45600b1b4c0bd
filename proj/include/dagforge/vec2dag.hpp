#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dagforge/dag.hpp"

namespace dagforge {

// Flat parameterization of a digraph on d nodes: the first d entries are node
// potentials p, the remaining d(d-1)/2 entries fill the strict upper triangle
// of the edge-potential matrix row by row (E_12, E_13, ..., E_23, ...).
// An edge i -> j exists iff the symmetrized edge potential is positive AND
// p_i < p_j; the strict inequality makes ties produce no edge, which is what
// guarantees acyclicity for every input vector.
struct PotentialVec {
    int node_count = 0;
    Eigen::VectorXd values;

    static Eigen::Index dim_for(int d) {
        return static_cast<Eigen::Index>(d) * (d + 1) / 2;
    }
};

// Validating factory for vectors that cross an API boundary. Internal hot
// paths build PotentialVec directly (the sampler cannot produce a bad one).
inline PotentialVec make_potential_vec(int d, Eigen::VectorXd values) {
    if (d < 1) throw std::invalid_argument("PotentialVec: node_count must be >= 1");
    if (values.size() != PotentialVec::dim_for(d))
        throw std::invalid_argument("PotentialVec: expected length " +
                                    std::to_string(PotentialVec::dim_for(d)) + " for d=" +
                                    std::to_string(d) + ", got " + std::to_string(values.size()));
    if (!values.allFinite())
        throw std::invalid_argument("PotentialVec: entries must be finite");
    return PotentialVec{d, std::move(values)};
}

inline Eigen::VectorXd node_potentials(const PotentialVec& z) {
    return z.values.head(z.node_count);
}

// Strictly upper-triangular edge-potential matrix; zeros elsewhere.
inline Eigen::MatrixXd edge_potentials(const PotentialVec& z) {
    const int d = z.node_count;
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
    Eigen::Index idx = d;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) e(i, j) = z.values(idx++);
    return e;
}

// The map from vector to DAG. For each unordered pair {i, j} the edge
// potential decides whether the pair is adjacent, and the node potentials
// orient it from the lower-potential node to the higher one. Equal node
// potentials or a non-positive edge potential leave the pair unconnected, so
// any orientation conflict is impossible and the output never has a cycle:
// every edge strictly increases p.
inline Dag vec_to_dag(const PotentialVec& z) {
    const int d = z.node_count;
    Dag g(d);
    const auto& v = z.values;
    Eigen::Index idx = d;
    for (int i = 0; i < d; ++i) {
        const double pi = v(i);
        for (int j = i + 1; j < d; ++j, ++idx) {
            if (v(idx) > 0.0) {
                const double pj = v(j);
                if (pi < pj)
                    g.adj(i, j) = 1;
                else if (pj < pi)
                    g.adj(j, i) = 1;
            }
        }
    }
    return g;
}

// Right inverse of vec_to_dag up to graph equality: builds a vector whose
// image is exactly `g`. Node potentials are ancestor counts rescaled into
// [-eps/2, eps/2]; adjacent pairs get edge potential +eps/2, everything else
// -eps/2. Adjacent nodes always differ in ancestor count (a parent's ancestor
// set is a strict subset of its child's), so the orientation survives the
// rescaling. A graph with no edges has all ancestor counts equal; the
// degenerate normalization maps them all to -eps/2.
inline PotentialVec dag_to_vec(const Dag& g, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("dag_to_vec: eps must be positive");
    if (!is_acyclic(g)) throw std::invalid_argument("dag_to_vec: input graph has a cycle");
    const int d = g.node_count;
    Eigen::VectorXd v(PotentialVec::dim_for(d));

    const std::vector<int> an = ancestor_counts(g);
    int lo = an[0], hi = an[0];
    for (int c : an) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    if (hi == lo) {
        for (int i = 0; i < d; ++i) v(i) = -eps / 2.0;
    } else {
        for (int i = 0; i < d; ++i)
            v(i) = (static_cast<double>(an[i] - lo) / (hi - lo)) * eps - eps / 2.0;
    }

    Eigen::Index idx = d;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j, ++idx) {
            const bool adjacent = g.adj(i, j) != 0 || g.adj(j, i) != 0;
            v(idx) = adjacent ? eps / 2.0 : -eps / 2.0;
        }
    return PotentialVec{d, std::move(v)};
}

}  // namespace dagforge
