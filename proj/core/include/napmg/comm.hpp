#pragma once

#include "napmg/partition.hpp"
#include "napmg/topology.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace napmg {

// Simulated wire sizes. Every vector payload entry is charged one value plus
// one index annotation, in every strategy, so byte totals stay comparable
// across strategies. Matrix rows are charged per nonzero plus a row header.
inline constexpr std::size_t kValueBytes = 8;
inline constexpr std::size_t kIndexBytes = 4;
inline constexpr std::size_t kVectorItemBytes = kValueBytes + kIndexBytes;
inline constexpr std::size_t kMatrixNonzeroBytes = 12;
inline constexpr std::size_t kRowHeaderBytes = 8;

/// One directed requirement: `peer` and this rank exchange exactly the listed
/// global indices (sorted, duplicate-free).
struct PatternEdge {
    int peer = -1;
    std::vector<index_t> indices;
    bool inter_node = false;
    bool operator==(const PatternEdge&) const = default;
};

/// Who needs what from whom. recv[r] lists, per owning peer, the global
/// indices rank r must receive; send[r] is the exact mirror. Ranks never
/// appear in their own edge lists.
struct CommPattern {
    int num_procs = 0;
    std::vector<std::vector<PatternEdge>> send;
    std::vector<std::vector<PatternEdge>> recv;

    /// Pattern from per-rank needed global indices, ownership resolved
    /// through `owners`. Indices a rank owns itself must not appear in its
    /// needs.
    static CommPattern from_needs(const std::vector<std::vector<index_t>>& needs,
                                  const RowPartition& owners, const Topology& topo);

    /// Swaps send/recv roles: the reverse-direction pattern used when data
    /// flows from requesters back to owners (transpose products, restriction).
    CommPattern mirrored() const;

    bool empty() const;
    std::size_t total_edges(bool inter_only = false) const;
    bool operator==(const CommPattern&) const = default;
};

/// Vector-exchange pattern of a distributed matrix: each rank receives the
/// values of its off-process columns from their owners.
CommPattern comm_pattern(const PartitionedMatrix& m, const Topology& topo);

enum class Strategy { standard, nap2, nap3 };
const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

enum class StepClass { gather, main, scatter };
const char* to_string(StepClass c);

/// A unit of payload inside a transfer: `indices` of data originating at rank
/// `source`, ultimately for rank `final_dest`. The same (source, index) datum
/// listed for several destinations is carried (and charged) once per
/// transfer.
struct ScheduleItem {
    int source = -1;
    int final_dest = -1;
    std::vector<index_t> indices;
    bool operator==(const ScheduleItem&) const = default;
};

struct Transfer {
    StepClass step = StepClass::main;
    int src = -1;
    int dst = -1;
    bool inter_node = false;
    std::vector<ScheduleItem> items;
    bool operator==(const Transfer&) const = default;
};

/// An executable multi-step plan. Steps run in class order
/// (gather, main, scatter); transfers are sorted by (step, src, dst).
struct CommSchedule {
    Strategy strategy = Strategy::standard;
    int num_procs = 0;
    std::vector<Transfer> transfers;
    bool operator==(const CommSchedule&) const = default;
};

/// Direct sends, one transfer per pattern edge.
CommSchedule build_standard(const CommPattern& pattern, const Topology& topo);

/// Two-step node-aware plan: each rank merges and deduplicates its outgoing
/// data per destination node and sends one message to that node's
/// representative rank (local rank = source node id mod ppn), which then
/// redistributes locally. Intra-node edges stay as direct sends.
CommSchedule build_nap2(const CommPattern& pattern, const Topology& topo);

/// Three-step node-aware plan: per ordered node pair (n, m), data is first
/// gathered on n's local rank (m mod ppn), crosses the network in a single
/// message to m's local rank (n mod ppn), and is scattered on m. Intra-node
/// edges stay as direct sends.
CommSchedule build_nap3(const CommPattern& pattern, const Topology& topo);

CommSchedule build_schedule(Strategy s, const CommPattern& pattern, const Topology& topo);

struct LogEntry {
    StepClass step = StepClass::main;
    int src = -1;
    int dst = -1;
    std::size_t bytes = 0;
    bool inter_node = false;
    bool operator==(const LogEntry&) const = default;
};

/// Record of every executed (or statically sized) transfer.
struct MessageLog {
    std::vector<LogEntry> entries;

    std::size_t count(bool inter_node) const;
    std::size_t bytes(bool inter_node) const;
    /// CSV with header `step_class,src,dst,bytes,inter_node`.
    std::string to_csv() const;
};

/// Delivered vector datum: the value of global `index` originating at rank
/// `source`.
struct VectorDelivery {
    int source = -1;
    index_t index = -1;
    double value = 0.0;
};

/// value of `index` held by `rank` (the owner in forward exchanges, the
/// contributor in reverse exchanges)
using VectorProvider = std::function<double(int rank, index_t index)>;

/// Runs the schedule step by step with custody checking: a transfer may only
/// forward data its source rank originated or already received. Returns, per
/// rank, exactly the deliveries its pattern demands (sorted by source then
/// index); any shortfall or excess throws.
std::vector<std::vector<VectorDelivery>> execute_vector(const CommSchedule& schedule,
                                                        const CommPattern& pattern,
                                                        const VectorProvider& provider,
                                                        MessageLog* log = nullptr);

struct RowFragment {
    index_t row = -1;
    std::vector<std::pair<index_t, double>> entries;
};

struct MatrixDelivery {
    int source = -1;
    RowFragment fragment;
};

using RowProvider = std::function<std::vector<std::pair<index_t, double>>(int rank, index_t row)>;

/// Matrix-row exchange over the same schedules; indices are row ids and each
/// delivery carries the full (global column, value) list of that row.
std::vector<std::vector<MatrixDelivery>> execute_matrix(const CommSchedule& schedule,
                                                        const CommPattern& pattern,
                                                        const RowProvider& provider,
                                                        MessageLog* log = nullptr);

/// Static log of a vector exchange (payload sizes do not depend on values).
MessageLog vector_log(const CommSchedule& schedule);

/// nonzero count of row `row` originating at `rank`
using RowSizeFn = std::function<index_t(int rank, index_t row)>;

/// Static log of a matrix exchange given per-row nonzero counts.
MessageLog matrix_log(const CommSchedule& schedule, const RowSizeFn& row_nnz);

/// Counters feeding the performance models, all computed from inter-node
/// transfers: n_proc / n_proc2node are per-rank distinct-partner maxima,
/// n_node2node the per-node distinct partner-node maximum, s_proc /
/// s_node2node per directed rank-pair / node-pair byte maxima, and s_node the
/// per-node max of sent vs received bytes. Defined so that at ppn = 1 all
/// three strategy models evaluate identically. Gather/scatter steps are
/// tallied separately as intra-node extras.
struct CommCounters {
    int n_proc = 0;
    int n_proc2node = 0;
    int n_node2node = 0;
    std::size_t s_proc = 0;
    std::size_t s_node = 0;
    std::size_t s_node2node = 0;
    std::size_t intra_extra_count = 0;
    std::size_t intra_extra_bytes = 0;
    std::size_t max_message_bytes = 0;
    int ppn = 1;
    std::size_t inter_count = 0;
    std::size_t inter_bytes = 0;
    std::size_t intra_count = 0;
    std::size_t intra_bytes = 0;

    bool no_communication() const { return inter_count == 0 && intra_extra_count == 0; }
    bool operator==(const CommCounters&) const = default;
};

CommCounters counters_from(const MessageLog& log, const Topology& topo);

} // namespace napmg
