#include "napmg/topology.hpp"
#include <algorithm>

#include <stdexcept>
#include <string>

namespace napmg {

Topology::Topology(int num_procs_, int ppn_) : num_procs(num_procs_), ppn(ppn_) {
    if (num_procs < 1) throw std::invalid_argument("topology: num_procs must be >= 1");
    if (ppn < 1) throw std::invalid_argument("topology: ppn must be >= 1");
}

int Topology::node_of(int rank) const {
    if (rank < 0 || rank >= num_procs)
        throw std::out_of_range("topology: rank " + std::to_string(rank) + " out of range");
    return rank / ppn;
}

int Topology::local_rank(int rank) const {
    if (rank < 0 || rank >= num_procs)
        throw std::out_of_range("topology: rank " + std::to_string(rank) + " out of range");
    return rank % ppn;
}

int Topology::ranks_on_count(int node) const {
    if (node < 0 || node >= num_nodes())
        throw std::out_of_range("topology: node " + std::to_string(node) + " out of range");
    const int first = node * ppn;
    const int last = std::min((node + 1) * ppn, num_procs);
    return last - first;
}

std::vector<int> Topology::ranks_on(int node) const {
    const int count = ranks_on_count(node);
    std::vector<int> out(count);
    for (int i = 0; i < count; ++i) out[i] = node * ppn + i;
    return out;
}

int Topology::nth_rank_on(int node, int k) const {
    const int count = ranks_on_count(node);
    return node * ppn + (k % count);
}

} // namespace napmg
