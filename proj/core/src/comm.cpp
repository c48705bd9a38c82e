#include "napmg/comm.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace napmg {

namespace {

void sort_edges(std::vector<std::vector<PatternEdge>>& edges) {
    for (auto& per_rank : edges)
        std::sort(per_rank.begin(), per_rank.end(),
                  [](const PatternEdge& a, const PatternEdge& b) { return a.peer < b.peer; });
}

} // namespace

CommPattern CommPattern::from_needs(const std::vector<std::vector<index_t>>& needs,
                                    const RowPartition& owners, const Topology& topo) {
    if (static_cast<int>(needs.size()) != topo.num_procs ||
        owners.num_procs() != topo.num_procs)
        throw std::invalid_argument("comm pattern: rank count mismatch");

    CommPattern p;
    p.num_procs = topo.num_procs;
    p.send.resize(p.num_procs);
    p.recv.resize(p.num_procs);

    for (int r = 0; r < p.num_procs; ++r) {
        std::vector<index_t> sorted = needs[r];
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

        std::map<int, std::vector<index_t>> by_owner;
        for (index_t idx : sorted) {
            const int owner = owners.owner_of(idx);
            if (owner == r)
                throw std::invalid_argument("comm pattern: rank lists its own index as a need");
            by_owner[owner].push_back(idx);
        }
        for (auto& [owner, indices] : by_owner) {
            const bool inter = !topo.same_node(owner, r);
            p.recv[r].push_back({owner, indices, inter});
            p.send[owner].push_back({r, std::move(indices), inter});
        }
    }
    sort_edges(p.send);
    sort_edges(p.recv);
    return p;
}

CommPattern CommPattern::mirrored() const {
    CommPattern m;
    m.num_procs = num_procs;
    m.send = recv;
    m.recv = send;
    return m;
}

bool CommPattern::empty() const {
    for (const auto& edges : send)
        if (!edges.empty()) return false;
    return true;
}

std::size_t CommPattern::total_edges(bool inter_only) const {
    std::size_t n = 0;
    for (const auto& edges : send)
        for (const auto& e : edges)
            if (!inter_only || e.inter_node) ++n;
    return n;
}

CommPattern comm_pattern(const PartitionedMatrix& m, const Topology& topo) {
    return CommPattern::from_needs(m.column_needs(), m.cols, topo);
}

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::standard: return "standard";
        case Strategy::nap2: return "nap2";
        case Strategy::nap3: return "nap3";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "standard") return Strategy::standard;
    if (name == "nap2") return Strategy::nap2;
    if (name == "nap3") return Strategy::nap3;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

const char* to_string(StepClass c) {
    switch (c) {
        case StepClass::gather: return "gather";
        case StepClass::main: return "main";
        case StepClass::scatter: return "scatter";
    }
    return "?";
}

namespace {

/// Accumulates transfers keyed by (step, src, dst) so every builder emits one
/// transfer per step and rank pair, in deterministic order.
class TransferMap {
public:
    void add(StepClass step, int src, int dst, bool inter, const ScheduleItem& item) {
        Transfer& t = map_[{static_cast<int>(step), src, dst}];
        t.step = step;
        t.src = src;
        t.dst = dst;
        t.inter_node = inter;
        t.items.push_back(item);
    }

    std::vector<Transfer> finalize() {
        std::vector<Transfer> out;
        out.reserve(map_.size());
        for (auto& [key, t] : map_) {
            (void)key;
            std::sort(t.items.begin(), t.items.end(),
                      [](const ScheduleItem& a, const ScheduleItem& b) {
                          return std::tie(a.source, a.final_dest) < std::tie(b.source, b.final_dest);
                      });
            out.push_back(std::move(t));
        }
        return out;
    }

private:
    std::map<std::tuple<int, int, int>, Transfer> map_;
};

} // namespace

CommSchedule build_standard(const CommPattern& pattern, const Topology& topo) {
    (void)topo;
    TransferMap tm;
    for (int q = 0; q < pattern.num_procs; ++q)
        for (const PatternEdge& e : pattern.send[q])
            tm.add(StepClass::main, q, e.peer, e.inter_node, {q, e.peer, e.indices});
    return {Strategy::standard, pattern.num_procs, tm.finalize()};
}

CommSchedule build_nap2(const CommPattern& pattern, const Topology& topo) {
    TransferMap tm;
    for (int q = 0; q < pattern.num_procs; ++q) {
        for (const PatternEdge& e : pattern.send[q]) {
            if (!e.inter_node) {
                tm.add(StepClass::main, q, e.peer, false, {q, e.peer, e.indices});
                continue;
            }
            const int dst_node = topo.node_of(e.peer);
            const int rep = topo.nth_rank_on(dst_node, topo.node_of(q) % topo.ppn);
            tm.add(StepClass::main, q, rep, true, {q, e.peer, e.indices});
            if (e.peer != rep)
                tm.add(StepClass::scatter, rep, e.peer, false, {q, e.peer, e.indices});
        }
    }
    return {Strategy::nap2, pattern.num_procs, tm.finalize()};
}

CommSchedule build_nap3(const CommPattern& pattern, const Topology& topo) {
    TransferMap tm;
    for (int q = 0; q < pattern.num_procs; ++q) {
        for (const PatternEdge& e : pattern.send[q]) {
            if (!e.inter_node) {
                tm.add(StepClass::main, q, e.peer, false, {q, e.peer, e.indices});
                continue;
            }
            const int src_node = topo.node_of(q);
            const int dst_node = topo.node_of(e.peer);
            const int gatherer = topo.nth_rank_on(src_node, dst_node % topo.ppn);
            const int rep = topo.nth_rank_on(dst_node, src_node % topo.ppn);
            const ScheduleItem item{q, e.peer, e.indices};
            if (q != gatherer) tm.add(StepClass::gather, q, gatherer, false, item);
            tm.add(StepClass::main, gatherer, rep, true, item);
            if (e.peer != rep) tm.add(StepClass::scatter, rep, e.peer, false, item);
        }
    }
    return {Strategy::nap3, pattern.num_procs, tm.finalize()};
}

CommSchedule build_schedule(Strategy s, const CommPattern& pattern, const Topology& topo) {
    switch (s) {
        case Strategy::standard: return build_standard(pattern, topo);
        case Strategy::nap2: return build_nap2(pattern, topo);
        case Strategy::nap3: return build_nap3(pattern, topo);
    }
    throw std::logic_error("build_schedule: bad strategy");
}

std::size_t MessageLog::count(bool inter_node) const {
    std::size_t n = 0;
    for (const auto& e : entries)
        if (e.inter_node == inter_node) ++n;
    return n;
}

std::size_t MessageLog::bytes(bool inter_node) const {
    std::size_t n = 0;
    for (const auto& e : entries)
        if (e.inter_node == inter_node) n += e.bytes;
    return n;
}

std::string MessageLog::to_csv() const {
    std::ostringstream out;
    out << "step_class,src,dst,bytes,inter_node\n";
    for (const auto& e : entries)
        out << to_string(e.step) << "," << e.src << "," << e.dst << "," << e.bytes << ","
            << (e.inter_node ? 1 : 0) << "\n";
    return out.str();
}

namespace {

/// Distinct (source, index) pairs carried by a transfer; duplicated data for
/// several destinations is charged once.
std::vector<std::pair<int, index_t>> distinct_payload(const Transfer& t) {
    std::vector<std::pair<int, index_t>> keys;
    for (const ScheduleItem& item : t.items)
        for (index_t idx : item.indices) keys.emplace_back(item.source, idx);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

std::size_t vector_bytes(const Transfer& t) {
    return distinct_payload(t).size() * kVectorItemBytes;
}

std::size_t matrix_bytes(const Transfer& t, const RowSizeFn& row_nnz) {
    std::size_t bytes = 0;
    for (const auto& [source, row] : distinct_payload(t))
        bytes += kRowHeaderBytes + kMatrixNonzeroBytes * static_cast<std::size_t>(row_nnz(source, row));
    return bytes;
}

// Step-ordered execution with custody: a rank may forward only data it
// originated or has already received. The staged map per rank holds relayed
// values keyed by (source, index).
template <typename Value, typename Fetch, typename Bytes>
auto run_schedule(const CommSchedule& schedule, const Fetch& fetch, const Bytes& bytes_of,
                  MessageLog* log) {
    std::vector<std::map<std::pair<int, index_t>, Value>> staged(schedule.num_procs);
    std::vector<std::vector<std::tuple<int, index_t, Value>>> delivered(schedule.num_procs);

    for (const Transfer& t : schedule.transfers) {
        if (t.src == t.dst) throw std::logic_error("schedule: self transfer");
        for (const ScheduleItem& item : t.items) {
            for (index_t idx : item.indices) {
                const std::pair<int, index_t> key{item.source, idx};
                Value value;
                if (item.source == t.src) {
                    value = fetch(t.src, idx);
                } else {
                    auto it = staged[t.src].find(key);
                    if (it == staged[t.src].end())
                        throw std::logic_error("schedule: transfer forwards data its source never received");
                    value = it->second;
                }
                if (item.final_dest == t.dst)
                    delivered[t.dst].emplace_back(item.source, idx, value);
                else
                    staged[t.dst].emplace(key, std::move(value));
            }
        }
        if (log) log->entries.push_back({t.step, t.src, t.dst, bytes_of(t), t.inter_node});
    }
    for (auto& per_rank : delivered)
        std::sort(per_rank.begin(), per_rank.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
        });
    return delivered;
}

void check_demand(const CommPattern& pattern,
                  const std::vector<std::vector<std::pair<int, index_t>>>& got) {
    for (int r = 0; r < pattern.num_procs; ++r) {
        std::vector<std::pair<int, index_t>> expected;
        for (const PatternEdge& e : pattern.recv[r])
            for (index_t idx : e.indices) expected.emplace_back(e.peer, idx);
        std::sort(expected.begin(), expected.end());
        if (expected != got[r])
            throw std::logic_error("schedule delivery does not match pattern demand at rank " +
                                   std::to_string(r));
    }
}

} // namespace

std::vector<std::vector<VectorDelivery>> execute_vector(const CommSchedule& schedule,
                                                        const CommPattern& pattern,
                                                        const VectorProvider& provider,
                                                        MessageLog* log) {
    auto delivered = run_schedule<double>(schedule, provider, &vector_bytes, log);

    std::vector<std::vector<std::pair<int, index_t>>> keys(schedule.num_procs);
    std::vector<std::vector<VectorDelivery>> out(schedule.num_procs);
    for (int r = 0; r < schedule.num_procs; ++r) {
        keys[r].reserve(delivered[r].size());
        out[r].reserve(delivered[r].size());
        for (const auto& [source, idx, value] : delivered[r]) {
            keys[r].emplace_back(source, idx);
            out[r].push_back({source, idx, value});
        }
    }
    check_demand(pattern, keys);
    return out;
}

std::vector<std::vector<MatrixDelivery>> execute_matrix(const CommSchedule& schedule,
                                                        const CommPattern& pattern,
                                                        const RowProvider& provider,
                                                        MessageLog* log) {
    using Row = std::vector<std::pair<index_t, double>>;
    auto bytes_of = [&provider](const Transfer& t) {
        return matrix_bytes(t, [&provider](int rank, index_t row) {
            return static_cast<index_t>(provider(rank, row).size());
        });
    };
    auto delivered = run_schedule<Row>(schedule, provider, bytes_of, log);

    std::vector<std::vector<std::pair<int, index_t>>> keys(schedule.num_procs);
    std::vector<std::vector<MatrixDelivery>> out(schedule.num_procs);
    for (int r = 0; r < schedule.num_procs; ++r) {
        keys[r].reserve(delivered[r].size());
        out[r].reserve(delivered[r].size());
        for (auto& [source, row, entries] : delivered[r]) {
            keys[r].emplace_back(source, row);
            out[r].push_back({source, {row, std::move(entries)}});
        }
    }
    check_demand(pattern, keys);
    return out;
}

MessageLog vector_log(const CommSchedule& schedule) {
    MessageLog log;
    log.entries.reserve(schedule.transfers.size());
    for (const Transfer& t : schedule.transfers)
        log.entries.push_back({t.step, t.src, t.dst, vector_bytes(t), t.inter_node});
    return log;
}

MessageLog matrix_log(const CommSchedule& schedule, const RowSizeFn& row_nnz) {
    MessageLog log;
    log.entries.reserve(schedule.transfers.size());
    for (const Transfer& t : schedule.transfers)
        log.entries.push_back({t.step, t.src, t.dst, matrix_bytes(t, row_nnz), t.inter_node});
    return log;
}

CommCounters counters_from(const MessageLog& log, const Topology& topo) {
    CommCounters c;
    c.ppn = topo.ppn;

    std::map<int, std::set<int>> rank_peers, rank_peer_nodes, node_peer_nodes;
    std::map<std::pair<int, int>, std::size_t> rank_pair_bytes, node_pair_bytes;
    std::map<int, std::size_t> node_sent, node_recv;

    for (const LogEntry& e : log.entries) {
        if (!e.inter_node) {
            ++c.intra_count;
            c.intra_bytes += e.bytes;
            if (e.step != StepClass::main) {
                ++c.intra_extra_count;
                c.intra_extra_bytes += e.bytes;
            }
            continue;
        }
        ++c.inter_count;
        c.inter_bytes += e.bytes;
        c.max_message_bytes = std::max(c.max_message_bytes, e.bytes);

        const int sn = topo.node_of(e.src);
        const int dn = topo.node_of(e.dst);
        rank_peers[e.src].insert(e.dst);
        rank_peers[e.dst].insert(e.src);
        rank_peer_nodes[e.src].insert(dn);
        rank_peer_nodes[e.dst].insert(sn);
        node_peer_nodes[sn].insert(dn);
        node_peer_nodes[dn].insert(sn);
        rank_pair_bytes[{e.src, e.dst}] += e.bytes;
        node_pair_bytes[{sn, dn}] += e.bytes;
        node_sent[sn] += e.bytes;
        node_recv[dn] += e.bytes;
    }

    for (const auto& [r, peers] : rank_peers) {
        (void)r;
        c.n_proc = std::max(c.n_proc, static_cast<int>(peers.size()));
    }
    for (const auto& [r, nodes] : rank_peer_nodes) {
        (void)r;
        c.n_proc2node = std::max(c.n_proc2node, static_cast<int>(nodes.size()));
    }
    for (const auto& [n, nodes] : node_peer_nodes) {
        (void)n;
        c.n_node2node = std::max(c.n_node2node, static_cast<int>(nodes.size()));
    }
    for (const auto& [pair, bytes] : rank_pair_bytes) {
        (void)pair;
        c.s_proc = std::max(c.s_proc, bytes);
    }
    for (const auto& [pair, bytes] : node_pair_bytes) {
        (void)pair;
        c.s_node2node = std::max(c.s_node2node, bytes);
    }
    for (const auto& [n, bytes] : node_sent) {
        (void)n;
        c.s_node = std::max(c.s_node, bytes);
    }
    for (const auto& [n, bytes] : node_recv) {
        (void)n;
        c.s_node = std::max(c.s_node, bytes);
    }
    return c;
}

} // namespace napmg
