#include "napmg/topology.hpp"

#include <doctest.h>

#include <set>
#include <stdexcept>

using namespace napmg;

TEST_CASE("one full node") {
    const Topology topo(16, 16);
    CHECK(topo.num_nodes() == 1);
    for (int r = 0; r < 16; ++r) CHECK(topo.node_of(r) == 0);
}

TEST_CASE("contiguous mapping") {
    const Topology topo(64, 16);
    CHECK(topo.num_nodes() == 4);
    CHECK(topo.node_of(17) == 1);
    CHECK(topo.local_rank(17) == 1);
    CHECK(topo.node_of(0) == 0);
    CHECK(topo.node_of(63) == 3);
}

TEST_CASE("ppn=1 puts every rank on its own node") {
    const Topology topo(5, 1);
    CHECK(topo.num_nodes() == 5);
    for (int r = 0; r < 5; ++r) {
        CHECK(topo.node_of(r) == r);
        CHECK(topo.local_rank(r) == 0);
    }
    CHECK_FALSE(topo.same_node(0, 1));
}

TEST_CASE("ranks_on partitions the ranks") {
    const Topology topo(10, 4); // last node has 2 ranks
    std::set<int> seen;
    for (int n = 0; n < topo.num_nodes(); ++n) {
        const auto ranks = topo.ranks_on(n);
        if (n + 1 < topo.num_nodes())
            CHECK(static_cast<int>(ranks.size()) == 4);
        for (int r : ranks) {
            CHECK(topo.node_of(r) == n);
            CHECK(seen.insert(r).second); // pairwise disjoint
        }
    }
    CHECK(static_cast<int>(seen.size()) == 10);
    CHECK(topo.ranks_on_count(2) == 2);
}

TEST_CASE("nth_rank_on wraps modulo the node size") {
    const Topology topo(10, 4);
    CHECK(topo.nth_rank_on(0, 5) == 1);
    CHECK(topo.nth_rank_on(2, 3) == 9); // last node holds {8, 9}
}

TEST_CASE("range checks") {
    const Topology topo(4, 2);
    CHECK_THROWS_AS(topo.node_of(4), std::out_of_range);
    CHECK_THROWS_AS(topo.node_of(-1), std::out_of_range);
    CHECK_THROWS_AS(topo.ranks_on(2), std::out_of_range);
    CHECK_THROWS_AS(Topology(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(Topology(1, 0), std::invalid_argument);
}
