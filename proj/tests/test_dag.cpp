#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dagforge/common.hpp"
#include "dagforge/dag.hpp"
#include "dagforge/vec2dag.hpp"

using namespace dagforge;

namespace {

Dag chain3() {
    Dag g(3);
    g.adj(0, 1) = 1;
    g.adj(1, 2) = 1;
    return g;
}

PotentialVec random_vec(int d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    PotentialVec z;
    z.node_count = d;
    z.values.resize(PotentialVec::dim_for(d));
    for (Eigen::Index i = 0; i < z.values.size(); ++i) z.values[i] = gauss(rng);
    return z;
}

}  // namespace

TEST_CASE("is_acyclic and topological_order basics") {
    Dag g = chain3();
    CHECK(is_acyclic(g));
    CHECK(topological_order(g) == std::vector<int>{0, 1, 2});

    g.adj(2, 0) = 1;  // close the cycle
    CHECK_FALSE(is_acyclic(g));
    CHECK_THROWS_AS(topological_order(g), std::invalid_argument);
}

TEST_CASE("topological_order breaks ties by smallest index") {
    // 2 -> 0 and 2 -> 1; 0 and 1 are both free after 2.
    Dag g(3);
    g.adj(2, 0) = 1;
    g.adj(2, 1) = 1;
    CHECK(topological_order(g) == std::vector<int>{2, 0, 1});
}

TEST_CASE("validated_dag rejects bad matrices") {
    Eigen::MatrixXi rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(validated_dag(rect), std::invalid_argument);

    Eigen::MatrixXi selfloop = Eigen::MatrixXi::Zero(2, 2);
    selfloop(0, 0) = 1;
    CHECK_THROWS_AS(validated_dag(selfloop), std::invalid_argument);

    Eigen::MatrixXi nonbinary = Eigen::MatrixXi::Zero(2, 2);
    nonbinary(0, 1) = 2;
    CHECK_THROWS_AS(validated_dag(nonbinary), std::invalid_argument);

    Eigen::MatrixXi cyc = Eigen::MatrixXi::Zero(2, 2);
    cyc(0, 1) = 1;
    cyc(1, 0) = 1;
    CHECK_THROWS_AS(validated_dag(cyc), std::invalid_argument);
}

TEST_CASE("reachability and ancestor_counts on a diamond") {
    // 0 -> 1, 0 -> 2, 1 -> 3, 2 -> 3
    Dag g(4);
    g.adj(0, 1) = g.adj(0, 2) = g.adj(1, 3) = g.adj(2, 3) = 1;
    const Eigen::MatrixXi reach = reachability(g);
    CHECK(reach(0, 3) == 1);
    CHECK(reach(3, 0) == 0);
    CHECK(reach(1, 2) == 0);
    CHECK(ancestor_counts(g) == std::vector<int>{0, 1, 1, 3});
}

// [DERIVED] 1, 3, 25, 543 labeled DAGs on 1..4 nodes (OEIS A003024).
TEST_CASE("enumerate_dags counts match the labeled-DAG sequence") {
    CHECK(enumerate_dags(1).size() == 1);
    CHECK(enumerate_dags(2).size() == 3);
    CHECK(enumerate_dags(3).size() == 25);
    CHECK(enumerate_dags(4).size() == 543);
    CHECK_THROWS_AS(enumerate_dags(5), std::invalid_argument);

    for (const Dag& g : enumerate_dags(3)) CHECK(is_acyclic(g));
}

TEST_CASE("make_potential_vec validates its input") {
    CHECK_THROWS_AS(make_potential_vec(0, Eigen::VectorXd::Zero(0)), std::invalid_argument);
    CHECK_THROWS_AS(make_potential_vec(3, Eigen::VectorXd::Zero(5)), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(6);
    bad[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_potential_vec(3, bad), std::invalid_argument);
}

// [DERIVED] p = (0.5, -1, 2), E slots (1.0, -0.3, 0.2) row-major above the
// diagonal. Symmetrized positives: (0,1) and (1,2). Potentials order the
// pairs as 1 -> 0 (since -1 < 0.5) and 1 -> 2 (since -1 < 2).
TEST_CASE("vec_to_dag hand-computed example") {
    Eigen::VectorXd values(6);
    values << 0.5, -1.0, 2.0, 1.0, -0.3, 0.2;
    const Dag g = vec_to_dag(make_potential_vec(3, values));
    Dag expect(3);
    expect.adj(1, 0) = 1;
    expect.adj(1, 2) = 1;
    CHECK(g == expect);
}

TEST_CASE("equal potentials produce no edge regardless of edge strength") {
    Eigen::VectorXd values(3);
    values << 0.7, 0.7, 100.0;  // d = 2: p = (0.7, 0.7), E slot huge
    const Dag g = vec_to_dag(make_potential_vec(2, values));
    CHECK(g.edge_count() == 0);
}

// [DERIVED] chain 0 -> 1 -> 2 with eps = 1: ancestor counts (0, 1, 2)
// rescale to (-0.5, 0, 0.5); all three edge slots keyed by adjacency.
TEST_CASE("dag_to_vec chain example") {
    const PotentialVec z = dag_to_vec(chain3(), 1.0);
    Eigen::VectorXd expect(6);
    expect << -0.5, 0.0, 0.5, 0.5, -0.5, 0.5;
    CHECK(z.values.isApprox(expect, 1e-12));
}

TEST_CASE("dag_to_vec validates input") {
    CHECK_THROWS_AS(dag_to_vec(chain3(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dag_to_vec(chain3(), -1.0), std::invalid_argument);
    Dag cyc(2);
    cyc.adj(0, 1) = cyc.adj(1, 0) = 1;
    CHECK_THROWS_AS(dag_to_vec(cyc, 1.0), std::invalid_argument);
}

TEST_CASE("dag_to_vec of the empty graph pins every potential to -eps/2") {
    const Dag g(4);
    const PotentialVec z = dag_to_vec(g, 2.0);
    for (int i = 0; i < 4; ++i) CHECK(z.values[i] == -1.0);
    CHECK(vec_to_dag(z).edge_count() == 0);
}

TEST_CASE("roundtrip vec_to_dag(dag_to_vec(g)) is exact on all small DAGs") {
    for (int d = 2; d <= 4; ++d) {
        for (const Dag& g : enumerate_dags(d)) {
            for (double eps : {0.1, 1.0, 10.0}) {
                CHECK(vec_to_dag(dag_to_vec(g, eps)) == g);
            }
        }
    }
}

TEST_CASE("random vectors always map to acyclic graphs") {
    Rng rng = make_rng(20240816);
    for (int d = 2; d <= 8; ++d) {
        for (int trial = 0; trial < 200; ++trial) {
            const Dag g = vec_to_dag(random_vec(d, rng, 2.0));
            REQUIRE(is_acyclic(g));
        }
    }
}

TEST_CASE("scaling z by a positive constant preserves the graph") {
    Rng rng = make_rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const PotentialVec z = random_vec(5, rng);
        const Dag base = vec_to_dag(z);
        for (double alpha : {1e-3, 0.5, 7.0, 1e4}) {
            PotentialVec scaled = z;
            scaled.values *= alpha;
            CHECK(vec_to_dag(scaled) == base);
        }
    }
}
