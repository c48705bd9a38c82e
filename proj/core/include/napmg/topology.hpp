#pragma once

#include <vector>

namespace napmg {

/// Simulated machine layout: ranks map contiguously onto nodes with a fixed
/// number of processes per node (rank r lives on node r / ppn). The last node
/// may be partially filled. Only the intra- vs inter-node distinction is
/// modeled; sockets are not.
struct Topology {
    int num_procs = 1;
    int ppn = 1;

    Topology() = default;
    Topology(int num_procs, int ppn);

    int num_nodes() const { return (num_procs + ppn - 1) / ppn; }

    int node_of(int rank) const;
    int local_rank(int rank) const;
    std::vector<int> ranks_on(int node) const;
    int ranks_on_count(int node) const;
    bool same_node(int a, int b) const { return node_of(a) == node_of(b); }

    /// k-th rank of a node, k taken modulo the node's actual rank count.
    int nth_rank_on(int node, int k) const;
};

} // namespace napmg
