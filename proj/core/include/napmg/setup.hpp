#pragma once

#include "napmg/comm.hpp"
#include "napmg/model.hpp"

#include <cstdint>
#include <optional>

namespace napmg {

enum class SolverKind { ruge_stuben, smoothed_aggregation };
const char* to_string(SolverKind k);
SolverKind solver_from_string(const std::string& name);

struct SetupConfig {
    SolverKind solver = SolverKind::ruge_stuben;
    double strength_theta = 0.25;
    index_t max_coarse = 50;
    int prolongation_sweeps = 1;
    std::optional<Strategy> strategy_override;
    CountersMode counters_mode = CountersMode::schedule;
};

enum class StrengthKind { classical, symmetric };

/// Strong-connection pattern, one sorted column list per global row, diagonal
/// excluded.
struct StrengthMatrix {
    double theta = 0.25;
    std::vector<std::vector<index_t>> strong;

    index_t n_rows() const { return static_cast<index_t>(strong.size()); }
};

/// classical: j strong for i iff -a_ij >= theta * max_k(-a_ik);
/// symmetric: |a_ij| >= theta * sqrt(|a_ii * a_jj|).
StrengthMatrix strength(const PartitionedMatrix& a, double theta, StrengthKind kind);

/// Undirected closure of the strength pattern (union with its transpose).
std::vector<std::vector<index_t>> symmetrize(const std::vector<std::vector<index_t>>& pattern);

/// Node partitioning. Classical: C/F labels. Aggregation: a root per
/// aggregate and a root assignment per node. Coarse indices are numbered in
/// global row order so each rank owns the coarse points its rows generated.
struct Splitting {
    std::vector<char> is_coarse;
    std::vector<index_t> aggregate_root;  // aggregation only; -1 elsewhere
    std::vector<index_t> coarse_index;    // -1 for fine / non-root rows
    index_t num_coarse = 0;
    RowPartition coarse_partition;
};

/// PMIS-style weighted independent set on the symmetrized strength graph.
/// Weights are influence counts plus a splitmix-hash fraction of the global
/// row index, so the outcome is reproducible across rank counts. Isolated
/// nodes become F.
Splitting split_classical(const StrengthMatrix& s, const RowPartition& rows);

/// Distance-2 independent-set roots with the same deterministic weights;
/// every node joins the nearest root within distance 2 (ties to the lowest
/// root id). Isolated nodes form singleton aggregates.
Splitting split_aggregation(const StrengthMatrix& s, const RowPartition& rows);

/// Classical interpolation: unit rows for C points; F points interpolate
/// from their strong C neighbors plus, at distance two, the strong C sets of
/// their strong F neighbors, with weak couplings lumped into the diagonal.
/// Reduces to direct interpolation when every strong neighbor is coarse and
/// preserves constants on zero-row-sum rows. Off-process labels and the
/// matrix/strength rows of off-process fine neighbors are fetched through
/// the given strategy.
PartitionedMatrix interp_classical(const PartitionedMatrix& a, const StrengthMatrix& s,
                                   const Splitting& split, const Topology& topo,
                                   Strategy vec_strategy);

/// Piecewise-constant tentative prolongator with the candidate fitted per
/// aggregate (unit column norms).
PartitionedMatrix tentative_prolongator(const PartitionedMatrix& a, const Splitting& split,
                                        const Topology& topo, Strategy vec_strategy,
                                        const Vector& candidate);

/// Jacobi prolongation smoothing: P <- (I - omega D^-1 A)^sweeps P0 with
/// omega = 4/(3 rho), rho estimated by 10 power-iteration steps on D^-1 A.
PartitionedMatrix smooth_prolongator(const PartitionedMatrix& a, const PartitionedMatrix& p0,
                                     int sweeps, const Topology& topo, Strategy vec_strategy,
                                     Strategy mat_strategy);

PartitionedMatrix interp_aggregation(const PartitionedMatrix& a, const Splitting& split,
                                     const Vector& candidate, int sweeps, const Topology& topo,
                                     Strategy vec_strategy, Strategy mat_strategy);

/// Power-iteration estimate of the spectral radius of D^-1 A (10 steps,
/// all-ones start vector, rank-ordered reductions).
double estimate_spectral_radius(const PartitionedMatrix& a, const Topology& topo,
                                Strategy vec_strategy);

struct GalerkinResult {
    PartitionedMatrix coarse;
    CommPattern ptap_pattern;  // mirrored P pattern carrying coarse-row contributions
    MessageLog ap_log;
    MessageLog ptap_log;
    /// per contributor rank, sorted (coarse row, fragment nnz) of the
    /// contributions it ships in the transpose stage
    std::vector<std::vector<std::pair<index_t, index_t>>> fragment_nnz;

    index_t fragment_size(int rank, index_t coarse_row) const;
};

/// Two-stage Galerkin product: AP = A*P with remote P rows fetched over A's
/// pattern, then Acoarse = P^T*(AP) with contributions to remote coarse rows
/// shipped to their owners and summed in contributor-rank order.
GalerkinResult galerkin(const PartitionedMatrix& a, const PartitionedMatrix& p,
                        const Topology& topo, Strategy mat_strategy);

struct Level {
    PartitionedMatrix a;
    CommPattern pattern;
    CommSchedule spmv_schedule;
    Strategy vec_strategy = Strategy::standard;
    StrategyEvaluation vec_eval;

    std::optional<PartitionedMatrix> p;
    std::optional<CommPattern> p_pattern;
    std::optional<CommPattern> p_pattern_mirror;
    std::optional<CommSchedule> p_forward;
    std::optional<CommSchedule> p_reverse;
    Strategy mat_strategy = Strategy::standard;
    std::optional<StrategyEvaluation> mat_eval;   // A*P row fetch
    std::optional<StrategyEvaluation> ptap_eval;  // P^T*(AP) contribution push
    std::optional<CommPattern> ptap_pattern;
    std::vector<std::vector<std::pair<index_t, index_t>>> ptap_fragment_nnz;

    index_t rows() const { return a.global_rows(); }
    index_t nnz() const { return a.global_nnz(); }
};

struct Hierarchy {
    std::vector<Level> levels;
    Topology topo;
    ModelParams params;
    SetupConfig config;

    std::size_t num_levels() const { return levels.size(); }
};

/// Full hierarchy construction. Per level a vector strategy is selected when
/// the operator is created and a matrix strategy when its prolongator first
/// exists; an override in the config forces both. Coarsening stops at
/// max_coarse rows or as soon as a level fails to shrink.
Hierarchy setup(const PartitionedMatrix& a, const SetupConfig& config, const Topology& topo,
                const ModelParams& params);

std::uint64_t splitmix64(std::uint64_t x);
/// Deterministic pseudo-random fraction in [0, 1) keyed by global row index.
double hash_fraction(index_t i);

} // namespace napmg
