#pragma once

#include "napmg/comm.hpp"

#include <optional>
#include <string>

namespace napmg {

/// Hardware constants for one message protocol class. Latencies are seconds,
/// rates bytes per second.
struct ProtocolParams {
    double alpha = 4e-6;        // inter-node latency
    double alpha_local = 6e-7;  // intra-node latency
    double rate_nid = 1.25e9;   // NID injection rate
    double rate_proc = 2.5e8;   // per-process transport rate
    double rate_local = 5e9;    // intra-node transport rate
};

/// Full model parameter set: one ProtocolParams per protocol class, selected
/// by the largest single inter-node message in a schedule
/// (< short_max -> short, < eager_max -> eager, else rendezvous).
struct ModelParams {
    ProtocolParams short_protocol;
    ProtocolParams eager_protocol;
    ProtocolParams rendezvous_protocol;
    std::size_t short_max = 512;
    std::size_t eager_max = 8192;

    const ProtocolParams& for_size(std::size_t max_message_bytes) const;
    void validate() const;

    static ModelParams defaults() { return {}; }

    /// Key-value file: `short.alpha = 4e-6`, bare keys (`alpha = ...`) apply
    /// to all three classes, `threshold.short_max` / `threshold.eager_max`
    /// set the protocol limits, and `model_counters = pattern|schedule` is
    /// reported through `counters_mode_out`. Unknown keys throw with the line
    /// number.
    static ModelParams from_file(const std::string& path, std::string* counters_mode_out = nullptr);
};

/// Max-rate node send cost: T = alpha*n + ppn*s / min(R_N, ppn*R_b).
/// Evaluated through the adjusted form with s_node = ppn*s so the balanced
/// case of the adjusted model reproduces it bit for bit.
double max_rate(double n_messages, double s_bytes, int ppn, const ProtocolParams& p);

/// Load-imbalance-aware variant: T = alpha*n + max(s_node/R_N, s_proc/R_b).
double max_rate_adjusted(double n_messages, double s_node, double s_proc, const ProtocolParams& p);

/// Intra-node postal cost: T = alpha_local*n + s/R_local.
double postal(double n_messages, double s_bytes, const ProtocolParams& p);

struct ModelEstimate {
    Strategy strategy = Strategy::standard;
    double total = 0.0;
    double latency = 0.0;
    double bandwidth = 0.0;
    double intra = 0.0;
};

/// T = alpha*n_proc + max(s_node/R_N, s_proc/R_b). All models return exactly
/// zero for schedules with no inter-node communication.
ModelEstimate model_standard(const CommCounters& c, const ModelParams& params);

/// T = alpha*n_proc2node + max(s_node/R_N, s_proc/R_b)
///     + alpha_local*(ppn-1) + s_proc/R_local (redistribution upper bound;
/// zero when ppn = 1).
ModelEstimate model_nap2(const CommCounters& c, const ModelParams& params);

/// T = alpha*n_node2node/ppn + max(s_node/R_N, s_node2node/R_b)
///     + 2*(alpha_local*(ppn-1) + s_node2node/R_local).
ModelEstimate model_nap3(const CommCounters& c, const ModelParams& params);

/// Whether per-strategy counters come from each candidate schedule
/// (duplicate elimination reflected in byte counts) or byte counts are taken
/// from the standard schedule for all three (the rougher variant).
enum class CountersMode { schedule, pattern };
const char* to_string(CountersMode m);
CountersMode counters_mode_from_string(const std::string& name);

/// All three candidate strategies evaluated on one communication pattern.
struct StrategyEvaluation {
    ModelEstimate standard, nap2, nap3;
    CommCounters counters_standard, counters_nap2, counters_nap3;
    Strategy chosen = Strategy::standard;

    const ModelEstimate& estimate(Strategy s) const;
    const CommCounters& counters(Strategy s) const;
};

/// Vector-payload evaluation (payload sizes are structural).
StrategyEvaluation evaluate_vector_strategies(const CommPattern& pattern, const Topology& topo,
                                              const ModelParams& params,
                                              CountersMode mode = CountersMode::schedule);

/// Matrix-payload evaluation; row_nnz gives the nonzero count of each row a
/// rank would send.
StrategyEvaluation evaluate_matrix_strategies(const CommPattern& pattern, const Topology& topo,
                                              const ModelParams& params, const RowSizeFn& row_nnz,
                                              CountersMode mode = CountersMode::schedule);

/// Minimum modeled cost wins; ties prefer the simpler strategy
/// (standard, then nap2, then nap3).
Strategy select_strategy(const CommPattern& pattern, const Topology& topo,
                         const ModelParams& params, CountersMode mode = CountersMode::schedule);

} // namespace napmg
