#include "napmg/setup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace napmg {

const char* to_string(SolverKind k) {
    return k == SolverKind::ruge_stuben ? "ruge_stuben" : "smoothed_aggregation";
}

SolverKind solver_from_string(const std::string& name) {
    if (name == "ruge_stuben") return SolverKind::ruge_stuben;
    if (name == "smoothed_aggregation") return SolverKind::smoothed_aggregation;
    throw std::invalid_argument("unknown solver '" + name + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double hash_fraction(index_t i) {
    return static_cast<double>(splitmix64(static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53;
}

StrengthMatrix strength(const PartitionedMatrix& a, double theta, StrengthKind kind) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("strength: theta must be in (0, 1]");
    if (a.global_rows() != a.global_cols())
        throw std::invalid_argument("strength: square operator required");

    const index_t n = a.global_rows();
    StrengthMatrix s;
    s.theta = theta;
    s.strong.resize(static_cast<std::size_t>(n));

    Vector diag(static_cast<std::size_t>(n), 0.0);
    if (kind == StrengthKind::symmetric) {
        for (int r = 0; r < a.rows.num_procs(); ++r)
            for (index_t i = a.rows.first_row(r); i < a.rows.starts[r + 1]; ++i)
                for (const auto& [j, v] : a.global_row(r, i))
                    if (j == i) diag[i] = v;
    }

    for (int r = 0; r < a.rows.num_procs(); ++r) {
        for (index_t i = a.rows.first_row(r); i < a.rows.starts[r + 1]; ++i) {
            const auto row = a.global_row(r, i);
            if (kind == StrengthKind::classical) {
                double max_coupling = 0.0;
                for (const auto& [j, v] : row)
                    if (j != i) max_coupling = std::max(max_coupling, -v);
                if (max_coupling <= 0.0) continue;
                for (const auto& [j, v] : row)
                    if (j != i && -v >= theta * max_coupling)
                        s.strong[i].push_back(j);
            } else {
                double dii = 0.0;
                for (const auto& [j, v] : row)
                    if (j == i) dii = v;
                for (const auto& [j, v] : row)
                    if (j != i && std::abs(v) >= theta * std::sqrt(std::abs(dii * diag[j])))
                        s.strong[i].push_back(j);
            }
        }
    }
    return s;
}

std::vector<std::vector<index_t>> symmetrize(const std::vector<std::vector<index_t>>& pattern) {
    std::vector<std::vector<index_t>> sym(pattern.size());
    for (std::size_t i = 0; i < pattern.size(); ++i)
        for (index_t j : pattern[i]) {
            sym[i].push_back(j);
            sym[static_cast<std::size_t>(j)].push_back(static_cast<index_t>(i));
        }
    for (auto& row : sym) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return sym;
}

namespace {

struct WeightedId {
    double w;
    index_t id;
    bool operator>(const WeightedId& o) const {
        return w != o.w ? w > o.w : id > o.id;
    }
};

std::vector<double> influence_weights(const StrengthMatrix& s) {
    std::vector<double> w(s.strong.size());
    for (const auto& row : s.strong)
        for (index_t j : row) w[static_cast<std::size_t>(j)] += 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += hash_fraction(static_cast<index_t>(i));
    return w;
}

void finalize_coarse_numbering(Splitting& split, const RowPartition& rows) {
    const index_t n = static_cast<index_t>(split.is_coarse.size());
    split.coarse_index.assign(static_cast<std::size_t>(n), -1);
    std::vector<index_t> counts(rows.num_procs(), 0);
    index_t next = 0;
    for (index_t i = 0; i < n; ++i) {
        if (split.is_coarse[i]) {
            split.coarse_index[i] = next++;
            counts[rows.owner_of(i)]++;
        }
    }
    split.num_coarse = next;
    split.coarse_partition = RowPartition::from_counts(counts);
}

} // namespace

Splitting split_classical(const StrengthMatrix& s, const RowPartition& rows) {
    const index_t n = s.n_rows();
    if (rows.global_rows != n)
        throw std::invalid_argument("split_classical: partition size mismatch");
    const auto sym = symmetrize(s.strong);
    const auto w = influence_weights(s);

    enum : char { unassigned = 0, coarse = 1, fine = 2 };
    std::vector<char> label(static_cast<std::size_t>(n), unassigned);
    index_t remaining = n;

    for (index_t i = 0; i < n; ++i)
        if (sym[i].empty()) {
            label[i] = fine;
            --remaining;
        }

    std::vector<index_t> new_coarse;
    while (remaining > 0) {
        new_coarse.clear();
        for (index_t i = 0; i < n; ++i) {
            if (label[i] != unassigned) continue;
            const WeightedId self{w[i], i};
            bool is_max = true;
            for (index_t j : sym[i]) {
                if (label[j] != unassigned) continue;
                if (!(self > WeightedId{w[j], j})) {
                    is_max = false;
                    break;
                }
            }
            if (is_max) new_coarse.push_back(i);
        }
        for (index_t i : new_coarse) {
            label[i] = coarse;
            --remaining;
        }
        for (index_t i = 0; i < n; ++i) {
            if (label[i] != unassigned) continue;
            for (index_t j : sym[i]) {
                if (label[j] == coarse) {
                    label[i] = fine;
                    --remaining;
                    break;
                }
            }
        }
        if (new_coarse.empty() && remaining > 0)
            throw std::logic_error("split_classical: no progress");
    }

    Splitting split;
    split.is_coarse.resize(static_cast<std::size_t>(n));
    split.aggregate_root.assign(static_cast<std::size_t>(n), -1);
    for (index_t i = 0; i < n; ++i) split.is_coarse[i] = label[i] == coarse;
    finalize_coarse_numbering(split, rows);
    return split;
}

Splitting split_aggregation(const StrengthMatrix& s, const RowPartition& rows) {
    const index_t n = s.n_rows();
    if (rows.global_rows != n)
        throw std::invalid_argument("split_aggregation: partition size mismatch");
    const auto sym = symmetrize(s.strong);

    std::vector<double> w(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i)
        w[i] = static_cast<double>(sym[i].size()) + hash_fraction(i);

    enum : char { candidate = 0, root = 1, covered = 2 };
    std::vector<char> state(static_cast<std::size_t>(n), candidate);
    index_t candidates = n;

    for (index_t i = 0; i < n; ++i)
        if (sym[i].empty()) {
            state[i] = root; // isolated: singleton aggregate
            --candidates;
        }

    std::vector<index_t> new_roots;
    while (candidates > 0) {
        new_roots.clear();
        for (index_t i = 0; i < n; ++i) {
            if (state[i] != candidate) continue;
            const WeightedId self{w[i], i};
            bool is_max = true;
            for (index_t j : sym[i]) {
                if (state[j] == candidate && !(self > WeightedId{w[j], j})) is_max = false;
                if (!is_max) break;
                for (index_t k : sym[j]) {
                    if (k == i || state[k] != candidate) continue;
                    if (!(self > WeightedId{w[k], k})) {
                        is_max = false;
                        break;
                    }
                }
                if (!is_max) break;
            }
            if (is_max) new_roots.push_back(i);
        }
        if (new_roots.empty())
            throw std::logic_error("split_aggregation: no progress");
        for (index_t i : new_roots) {
            state[i] = root;
            --candidates;
        }
        // exclude everything within distance 2 of a new root
        for (index_t i : new_roots) {
            for (index_t j : sym[i]) {
                if (state[j] == candidate) {
                    state[j] = covered;
                    --candidates;
                }
                for (index_t k : sym[j]) {
                    if (state[k] == candidate) {
                        state[k] = covered;
                        --candidates;
                    }
                }
            }
        }
    }

    Splitting split;
    split.is_coarse.assign(static_cast<std::size_t>(n), 0);
    split.aggregate_root.assign(static_cast<std::size_t>(n), -1);
    for (index_t i = 0; i < n; ++i)
        if (state[i] == root) {
            split.is_coarse[i] = 1;
            split.aggregate_root[i] = i;
        }
    // join the nearest root within distance 2, ties to the lowest root id
    for (index_t i = 0; i < n; ++i) {
        if (split.aggregate_root[i] >= 0) continue;
        index_t best = -1;
        for (index_t j : sym[i])
            if (state[j] == root && (best < 0 || j < best)) best = j;
        if (best < 0) {
            for (index_t j : sym[i])
                for (index_t k : sym[j])
                    if (state[k] == root && (best < 0 || k < best)) best = k;
        }
        if (best < 0)
            throw std::logic_error("split_aggregation: node beyond distance 2 of every root");
        split.aggregate_root[i] = best;
    }
    finalize_coarse_numbering(split, rows);
    return split;
}

namespace {

/// Fetches per-rank values of remote global indices through a vector
/// exchange: needs[r] lists the indices rank r requires, provider(owner, idx)
/// supplies them. Returns per-rank sorted (index, value) maps.
std::vector<std::map<index_t, double>> exchange_values(
    const std::vector<std::vector<index_t>>& needs, const RowPartition& owners,
    const Topology& topo, Strategy strategy, const VectorProvider& provider) {
    const CommPattern pattern = CommPattern::from_needs(needs, owners, topo);
    const CommSchedule schedule = build_schedule(strategy, pattern, topo);
    const auto deliveries = execute_vector(schedule, pattern, provider);
    std::vector<std::map<index_t, double>> out(needs.size());
    for (std::size_t r = 0; r < needs.size(); ++r)
        for (const VectorDelivery& d : deliveries[r]) out[r].emplace(d.index, d.value);
    return out;
}

Vector local_diagonal(const PartitionedMatrix& a, int rank) {
    const index_t first = a.rows.first_row(rank);
    const index_t nloc = a.rows.local_size(rank);
    Vector diag(static_cast<std::size_t>(nloc), 0.0);
    for (index_t i = 0; i < nloc; ++i)
        for (const auto& [j, v] : a.global_row(rank, first + i))
            if (j == first + i) diag[i] = v;
    return diag;
}

using LocalRows = std::vector<std::vector<std::vector<std::pair<index_t, double>>>>;

} // namespace

PartitionedMatrix interp_classical(const PartitionedMatrix& a, const StrengthMatrix& s,
                                   const Splitting& split, const Topology& topo,
                                   Strategy vec_strategy) {
    const auto sym = symmetrize(s.strong);
    const int nprocs = a.rows.num_procs();

    // distance-1 labels: coarse ids of off-process strength neighbors
    std::vector<std::vector<index_t>> label_needs(nprocs);
    // distance-2 data: matrix rows and strong-C sets of off-process strong
    // fine neighbors
    std::vector<std::vector<index_t>> row_needs(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        for (index_t i = a.rows.first_row(r); i < a.rows.starts[r + 1]; ++i) {
            if (split.is_coarse[i]) continue;
            for (index_t j : sym[i]) {
                if (a.rows.owns(r, j)) continue;
                label_needs[r].push_back(j);
                if (!split.is_coarse[j]) row_needs[r].push_back(j);
            }
        }
    }
    const auto remote_coarse = exchange_values(
        label_needs, a.rows, topo, vec_strategy,
        [&split](int, index_t idx) { return static_cast<double>(split.coarse_index[idx]); });

    // rows of A for remote strong fine neighbors
    const CommPattern row_pattern = CommPattern::from_needs(row_needs, a.rows, topo);
    const CommSchedule row_schedule = build_schedule(vec_strategy, row_pattern, topo);
    const auto row_deliveries = execute_matrix(
        row_schedule, row_pattern,
        [&a](int rank, index_t row) { return a.global_row(rank, row); });
    // strong-C sets of the same neighbors: (coarse donor row, its coarse id)
    const auto donor_deliveries = execute_matrix(
        row_schedule, row_pattern, [&sym, &split](int, index_t row) {
            std::vector<std::pair<index_t, double>> entries;
            for (index_t l : sym[row])
                if (split.is_coarse[l])
                    entries.emplace_back(l, static_cast<double>(split.coarse_index[l]));
            return entries;
        });

    LocalRows rows(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        std::map<index_t, std::vector<std::pair<index_t, double>>> remote_rows, remote_donors;
        for (const MatrixDelivery& d : row_deliveries[r])
            remote_rows.emplace(d.fragment.row, d.fragment.entries);
        for (const MatrixDelivery& d : donor_deliveries[r])
            remote_donors.emplace(d.fragment.row, d.fragment.entries);

        auto coarse_of = [&](index_t j) -> index_t {
            if (a.rows.owns(r, j)) return split.coarse_index[j];
            return static_cast<index_t>(remote_coarse[r].at(j));
        };
        auto matrix_row = [&](index_t k) -> std::vector<std::pair<index_t, double>> {
            if (a.rows.owns(r, k)) return a.global_row(r, k);
            return remote_rows.at(k);
        };
        // strong coarse donors of a fine strength-neighbor, as (row, coarse id)
        auto donors_of = [&](index_t k) -> std::vector<std::pair<index_t, double>> {
            if (a.rows.owns(r, k)) {
                std::vector<std::pair<index_t, double>> entries;
                for (index_t l : sym[k])
                    if (split.is_coarse[l])
                        entries.emplace_back(l, static_cast<double>(split.coarse_index[l]));
                return entries;
            }
            return remote_donors.at(k);
        };

        const index_t first = a.rows.first_row(r);
        rows[r].resize(static_cast<std::size_t>(a.rows.local_size(r)));
        for (index_t i = first; i < a.rows.starts[r + 1]; ++i) {
            auto& out_row = rows[r][static_cast<std::size_t>(i - first)];
            if (split.is_coarse[i]) {
                out_row.emplace_back(split.coarse_index[i], 1.0);
                continue;
            }
            if (sym[i].empty()) continue; // isolated F point: empty row

            const auto a_row = a.global_row(r, i);
            auto entry = [&a_row](index_t col) {
                for (const auto& [c, v] : a_row)
                    if (c == col) return v;
                return 0.0;
            };
            double diag = entry(i);
            if (diag == 0.0)
                throw std::runtime_error("interp_classical: zero diagonal at row " + std::to_string(i));

            // donor set: strong C neighbors plus the strong C sets of strong
            // F neighbors (distance two)
            std::map<index_t, index_t> donor_coarse; // donor row -> coarse id
            std::vector<index_t> strong_fine;
            for (index_t j : sym[i]) {
                const index_t cj = coarse_of(j);
                if (cj >= 0)
                    donor_coarse.emplace(j, cj);
                else
                    strong_fine.push_back(j);
            }
            for (index_t k : strong_fine)
                for (const auto& [l, cid] : donors_of(k))
                    if (l != i) donor_coarse.emplace(l, static_cast<index_t>(cid));
            if (donor_coarse.empty())
                throw std::runtime_error(
                    "interp_classical: F row " + std::to_string(i) +
                    " has strong neighbors but no coarse donor (splitting invariant violated)");

            // weak couplings are lumped into the diagonal
            std::map<index_t, double> numerator; // donor row -> accumulated coupling
            double lumped = diag;
            for (const auto& [j, v] : a_row) {
                if (j == i) continue;
                if (donor_coarse.count(j))
                    numerator[j] += v;
                else if (std::find(strong_fine.begin(), strong_fine.end(), j) == strong_fine.end())
                    lumped += v;
            }
            // distribute strong fine couplings through their coarse donors
            for (index_t k : strong_fine) {
                const double aik = entry(k);
                const auto k_row = matrix_row(k);
                auto k_entry = [&k_row](index_t col) {
                    for (const auto& [c, v] : k_row)
                        if (c == col) return v;
                    return 0.0;
                };
                double denom = std::min(k_entry(i), 0.0);
                for (const auto& [l, cid] : donor_coarse) {
                    (void)cid;
                    denom += std::min(k_entry(l), 0.0);
                }
                if (denom == 0.0) {
                    lumped += aik; // no usable path: treat as weak
                    continue;
                }
                for (const auto& [l, cid] : donor_coarse) {
                    (void)cid;
                    const double akl = std::min(k_entry(l), 0.0);
                    if (akl != 0.0) numerator[l] += aik * akl / denom;
                }
                lumped += aik * std::min(k_entry(i), 0.0) / denom;
            }
            if (lumped == 0.0)
                throw std::runtime_error("interp_classical: degenerate diagonal at row " +
                                         std::to_string(i));
            for (const auto& [l, num] : numerator)
                if (num != 0.0) out_row.emplace_back(donor_coarse.at(l), -num / lumped);
        }
    }
    return from_local_rows(a.rows, split.coarse_partition, rows);
}

PartitionedMatrix tentative_prolongator(const PartitionedMatrix& a, const Splitting& split,
                                        const Topology& topo, Strategy vec_strategy,
                                        const Vector& candidate) {
    const index_t n = a.global_rows();
    if (static_cast<index_t>(candidate.size()) != n)
        throw std::invalid_argument("tentative_prolongator: candidate length mismatch");
    const int nprocs = a.rows.num_procs();

    // per-aggregate candidate norms, accumulated in global row order
    std::map<index_t, double> norm2;
    for (index_t i = 0; i < n; ++i) {
        const index_t root = split.aggregate_root[i];
        if (root >= 0) norm2[root] += candidate[i] * candidate[i];
    }

    // coarse ids of remote roots
    std::vector<std::vector<index_t>> needs(nprocs);
    for (int r = 0; r < nprocs; ++r)
        for (index_t i = a.rows.first_row(r); i < a.rows.starts[r + 1]; ++i) {
            const index_t root = split.aggregate_root[i];
            if (root >= 0 && !a.rows.owns(r, root)) needs[r].push_back(root);
        }
    const auto remote_coarse = exchange_values(
        needs, a.rows, topo, vec_strategy,
        [&split](int, index_t idx) { return static_cast<double>(split.coarse_index[idx]); });

    LocalRows rows(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        const index_t first = a.rows.first_row(r);
        rows[r].resize(static_cast<std::size_t>(a.rows.local_size(r)));
        for (index_t i = first; i < a.rows.starts[r + 1]; ++i) {
            const index_t root = split.aggregate_root[i];
            if (root < 0) continue;
            const double norm = std::sqrt(norm2.at(root));
            if (norm == 0.0)
                throw std::runtime_error("tentative_prolongator: zero candidate on aggregate");
            const index_t cj = a.rows.owns(r, root)
                                   ? split.coarse_index[root]
                                   : static_cast<index_t>(remote_coarse[r].at(root));
            rows[r][static_cast<std::size_t>(i - first)].emplace_back(cj, candidate[i] / norm);
        }
    }
    return from_local_rows(a.rows, split.coarse_partition, rows);
}

double estimate_spectral_radius(const PartitionedMatrix& a, const Topology& topo,
                                Strategy vec_strategy) {
    const CommPattern pattern = comm_pattern(a, topo);
    const CommSchedule schedule = build_schedule(vec_strategy, pattern, topo);
    const int nprocs = a.rows.num_procs();

    std::vector<Vector> diags(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        diags[r] = local_diagonal(a, r);
        for (double d : diags[r])
            if (d == 0.0) throw std::runtime_error("spectral radius estimate: zero diagonal");
    }

    PartitionedVector x = PartitionedVector::zeros(a.rows);
    for (int r = 0; r < nprocs; ++r)
        for (double& v : x.local[r]) v = 1.0;

    auto norm2 = [&](const PartitionedVector& v) {
        double sum = 0.0;
        for (const auto& block : v.local)
            for (double val : block) sum += val * val;
        return std::sqrt(sum);
    };
    {
        const double nx = norm2(x);
        for (auto& block : x.local)
            for (double& v : block) v /= nx;
    }

    double rho = 0.0;
    bool retried = false;
    for (int step = 0; step < 10; ++step) {
        const auto deliveries = execute_vector(
            schedule, pattern,
            [&x](int rank, index_t idx) { return x.local[rank][idx - x.part.first_row(rank)]; });
        PartitionedVector y = PartitionedVector::zeros(a.rows);
        for (int r = 0; r < nprocs; ++r) {
            std::map<index_t, double> remote;
            for (const VectorDelivery& d : deliveries[r]) remote.emplace(d.index, d.value);
            const index_t first = a.rows.first_row(r);
            for (index_t i = 0; i < a.rows.local_size(r); ++i) {
                double sum = 0.0;
                for (const auto& [j, v] : a.global_row(r, first + i))
                    sum += v * (a.rows.owns(r, j) ? x.local[r][j - first] : remote.at(j));
                y.local[r][i] = sum / diags[r][i];
            }
        }
        rho = norm2(y);
        if (rho == 0.0) {
            if (retried) return 1.0;
            retried = true;
            for (int r = 0; r < nprocs; ++r)
                for (index_t i = 0; i < a.rows.local_size(r); ++i)
                    x.local[r][i] = 0.5 + hash_fraction(a.rows.first_row(r) + i);
            const double nx = norm2(x);
            for (auto& block : x.local)
                for (double& v : block) v /= nx;
            continue;
        }
        for (int r = 0; r < nprocs; ++r)
            for (index_t i = 0; i < a.rows.local_size(r); ++i) x.local[r][i] = y.local[r][i] / rho;
    }
    return rho;
}

namespace {

/// Local sparse row accumulator with deterministic (ascending-column) output.
class RowAccumulator {
public:
    void add(index_t col, double value) {
        auto [it, inserted] = sums_.try_emplace(col, value);
        if (!inserted) it->second += value;
    }
    std::vector<std::pair<index_t, double>> take() const {
        return {sums_.begin(), sums_.end()};
    }

private:
    std::map<index_t, double> sums_;
};

} // namespace

PartitionedMatrix smooth_prolongator(const PartitionedMatrix& a, const PartitionedMatrix& p0,
                                     int sweeps, const Topology& topo, Strategy vec_strategy,
                                     Strategy mat_strategy) {
    if (sweeps < 0) throw std::invalid_argument("smooth_prolongator: sweeps must be >= 0");
    if (sweeps == 0) return p0;
    if (a.global_cols() != p0.global_rows())
        throw std::invalid_argument("smooth_prolongator: dimension mismatch");

    const double rho = estimate_spectral_radius(a, topo, vec_strategy);
    const double omega = 4.0 / (3.0 * rho);

    const CommPattern pattern = comm_pattern(a, topo);
    const CommSchedule schedule = build_schedule(mat_strategy, pattern, topo);
    const int nprocs = a.rows.num_procs();

    PartitionedMatrix p = p0;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const auto deliveries = execute_matrix(
            schedule, pattern,
            [&p](int rank, index_t row) { return p.global_row(rank, row); });

        LocalRows rows(nprocs);
        for (int r = 0; r < nprocs; ++r) {
            std::map<index_t, std::vector<std::pair<index_t, double>>> remote;
            for (const MatrixDelivery& d : deliveries[r])
                remote.emplace(d.fragment.row, d.fragment.entries);
            const Vector diag = local_diagonal(a, r);
            const index_t first = a.rows.first_row(r);
            rows[r].resize(static_cast<std::size_t>(a.rows.local_size(r)));
            for (index_t i = 0; i < a.rows.local_size(r); ++i) {
                if (diag[i] == 0.0)
                    throw std::runtime_error("smooth_prolongator: zero diagonal");
                RowAccumulator acc;
                for (const auto& [col, v] : p.global_row(r, first + i)) acc.add(col, v);
                const double scale = -omega / diag[i];
                for (const auto& [j, aij] : a.global_row(r, first + i)) {
                    const auto& prow = a.rows.owns(r, j)
                                           ? p.global_row(r, j)
                                           : remote.at(j);
                    for (const auto& [col, v] : prow) acc.add(col, scale * aij * v);
                }
                rows[r][static_cast<std::size_t>(i)] = acc.take();
            }
        }
        p = from_local_rows(a.rows, p0.cols, rows);
    }
    return p;
}

PartitionedMatrix interp_aggregation(const PartitionedMatrix& a, const Splitting& split,
                                     const Vector& candidate, int sweeps, const Topology& topo,
                                     Strategy vec_strategy, Strategy mat_strategy) {
    PartitionedMatrix p0 = tentative_prolongator(a, split, topo, vec_strategy, candidate);
    return smooth_prolongator(a, p0, sweeps, topo, vec_strategy, mat_strategy);
}

index_t GalerkinResult::fragment_size(int rank, index_t coarse_row) const {
    const auto& list = fragment_nnz[static_cast<std::size_t>(rank)];
    auto it = std::lower_bound(list.begin(), list.end(), coarse_row,
                               [](const auto& pair, index_t row) { return pair.first < row; });
    if (it == list.end() || it->first != coarse_row)
        throw std::out_of_range("galerkin: unknown fragment");
    return it->second;
}

GalerkinResult galerkin(const PartitionedMatrix& a, const PartitionedMatrix& p,
                        const Topology& topo, Strategy mat_strategy) {
    if (a.global_cols() != p.global_rows() || a.global_rows() != a.global_cols())
        throw std::invalid_argument("galerkin: dimension mismatch");
    const int nprocs = a.rows.num_procs();
    GalerkinResult result;

    // stage 1: AP = A * P, fetching remote rows of P over A's pattern
    const CommPattern a_pattern = comm_pattern(a, topo);
    const CommSchedule a_schedule = build_schedule(mat_strategy, a_pattern, topo);
    const auto p_rows_in = execute_matrix(
        a_schedule, a_pattern,
        [&p](int rank, index_t row) { return p.global_row(rank, row); }, &result.ap_log);

    std::vector<std::vector<std::vector<std::pair<index_t, double>>>> ap(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        std::map<index_t, std::vector<std::pair<index_t, double>>> remote;
        for (const MatrixDelivery& d : p_rows_in[r]) remote.emplace(d.fragment.row, d.fragment.entries);
        const index_t first = a.rows.first_row(r);
        ap[r].resize(static_cast<std::size_t>(a.rows.local_size(r)));
        for (index_t i = 0; i < a.rows.local_size(r); ++i) {
            RowAccumulator acc;
            for (const auto& [j, aij] : a.global_row(r, first + i)) {
                const auto& prow = a.rows.owns(r, j) ? p.global_row(r, j) : remote.at(j);
                for (const auto& [col, v] : prow) acc.add(col, aij * v);
            }
            ap[r][static_cast<std::size_t>(i)] = acc.take();
        }
    }

    // stage 2: Acoarse = P^T * AP; contributions to remote coarse rows travel
    // over the mirrored P pattern and owners sum in contributor-rank order
    const CommPattern p_pattern = comm_pattern(p, topo);
    result.ptap_pattern = p_pattern.mirrored();

    // per rank: contribution fragments keyed by coarse row
    std::vector<std::map<index_t, std::vector<std::pair<index_t, double>>>> contrib(nprocs);
    result.fragment_nnz.resize(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        std::map<index_t, RowAccumulator> acc;
        const index_t first = p.rows.first_row(r);
        for (index_t i = 0; i < p.rows.local_size(r); ++i) {
            for (const auto& [jc, pij] : p.global_row(r, first + i)) {
                RowAccumulator& row_acc = acc[jc];
                for (const auto& [col, v] : ap[r][static_cast<std::size_t>(i)])
                    row_acc.add(col, pij * v);
            }
        }
        for (const auto& [jc, row_acc] : acc) contrib[r].emplace(jc, row_acc.take());
        for (const auto& [jc, entries] : contrib[r])
            if (!p.cols.owns(r, jc))
                result.fragment_nnz[r].emplace_back(jc, static_cast<index_t>(entries.size()));
    }

    const CommSchedule pt_schedule = build_schedule(mat_strategy, result.ptap_pattern, topo);
    const auto received = execute_matrix(
        pt_schedule, result.ptap_pattern,
        [&contrib](int rank, index_t row) {
            auto it = contrib[static_cast<std::size_t>(rank)].find(row);
            if (it == contrib[static_cast<std::size_t>(rank)].end())
                return std::vector<std::pair<index_t, double>>{};
            return it->second;
        },
        &result.ptap_log);

    LocalRows coarse_rows(nprocs);
    for (int r = 0; r < nprocs; ++r) {
        const index_t cfirst = p.cols.first_row(r);
        coarse_rows[r].resize(static_cast<std::size_t>(p.cols.local_size(r)));
        // bucket received fragments per coarse row, already sorted by source
        std::map<index_t, std::vector<const MatrixDelivery*>> incoming;
        for (const MatrixDelivery& d : received[r]) incoming[d.fragment.row].push_back(&d);
        for (index_t jc = cfirst; jc < p.cols.starts[r + 1]; ++jc) {
            RowAccumulator acc;
            bool before_own = true;
            auto add_own = [&]() {
                auto it = contrib[r].find(jc);
                if (it != contrib[r].end())
                    for (const auto& [col, v] : it->second) acc.add(col, v);
            };
            auto in_it = incoming.find(jc);
            if (in_it != incoming.end()) {
                for (const MatrixDelivery* d : in_it->second) {
                    if (before_own && d->source > r) {
                        add_own();
                        before_own = false;
                    }
                    for (const auto& [col, v] : d->fragment.entries) acc.add(col, v);
                }
            }
            if (before_own) add_own();
            coarse_rows[r][static_cast<std::size_t>(jc - cfirst)] = acc.take();
        }
    }
    result.coarse = from_local_rows(p.cols, p.cols, coarse_rows);
    return result;
}

namespace {

Level make_level(PartitionedMatrix a, const SetupConfig& config, const Topology& topo,
                 const ModelParams& params) {
    Level lvl;
    lvl.a = std::move(a);
    lvl.pattern = comm_pattern(lvl.a, topo);
    lvl.vec_eval = evaluate_vector_strategies(lvl.pattern, topo, params, config.counters_mode);
    lvl.vec_strategy = config.strategy_override.value_or(lvl.vec_eval.chosen);
    lvl.spmv_schedule = build_schedule(lvl.vec_strategy, lvl.pattern, topo);
    return lvl;
}

} // namespace

Hierarchy setup(const PartitionedMatrix& a, const SetupConfig& config, const Topology& topo,
                const ModelParams& params) {
    if (a.global_rows() != a.global_cols())
        throw std::invalid_argument("setup: square operator required");
    if (config.max_coarse < 1) throw std::invalid_argument("setup: max_coarse must be >= 1");
    params.validate();

    Hierarchy h;
    h.topo = topo;
    h.params = params;
    h.config = config;
    h.levels.push_back(make_level(a, config, topo, params));

    while (h.levels.back().rows() > config.max_coarse) {
        Level& lvl = h.levels.back();
        const std::size_t level = h.levels.size() - 1;
        const StrengthKind kind = config.solver == SolverKind::ruge_stuben
                                      ? StrengthKind::classical
                                      : StrengthKind::symmetric;
        // Smoothed prolongators smear coarse-operator entries; halving the
        // aggregation tolerance per level keeps the strength graph connected
        // so coarsening does not stall.
        const double theta = config.solver == SolverKind::smoothed_aggregation
                                 ? config.strength_theta * std::pow(0.5, static_cast<double>(level))
                                 : config.strength_theta;
        const StrengthMatrix s = strength(lvl.a, theta, kind);
        const Splitting split = config.solver == SolverKind::ruge_stuben
                                    ? split_classical(s, lvl.a.rows)
                                    : split_aggregation(s, lvl.a.rows);

        PartitionedMatrix p;
        if (config.solver == SolverKind::ruge_stuben) {
            p = interp_classical(lvl.a, s, split, topo, lvl.vec_strategy);
            lvl.mat_eval = evaluate_matrix_strategies(
                lvl.pattern, topo, params,
                [&p](int rank, index_t row) {
                    return static_cast<index_t>(p.global_row(rank, row).size());
                },
                config.counters_mode);
            lvl.mat_strategy = config.strategy_override.value_or(lvl.mat_eval->chosen);
        } else {
            Vector candidate(static_cast<std::size_t>(lvl.rows()), 1.0);
            PartitionedMatrix p0 = tentative_prolongator(lvl.a, split, topo, lvl.vec_strategy, candidate);
            // one matrix selection per level, made from the first matrix
            // payload available (the tentative prolongator's rows)
            const StrategyEvaluation p0_eval = evaluate_matrix_strategies(
                lvl.pattern, topo, params,
                [&p0](int rank, index_t row) {
                    return static_cast<index_t>(p0.global_row(rank, row).size());
                },
                config.counters_mode);
            lvl.mat_strategy = config.strategy_override.value_or(p0_eval.chosen);
            p = smooth_prolongator(lvl.a, p0, config.prolongation_sweeps, topo, lvl.vec_strategy,
                                   lvl.mat_strategy);
            lvl.mat_eval = evaluate_matrix_strategies(
                lvl.pattern, topo, params,
                [&p](int rank, index_t row) {
                    return static_cast<index_t>(p.global_row(rank, row).size());
                },
                config.counters_mode);
        }

        GalerkinResult gal = galerkin(lvl.a, p, topo, lvl.mat_strategy);
        if (gal.coarse.global_rows() >= lvl.rows()) break; // degenerate coarsening

        lvl.p = std::move(p);
        lvl.p_pattern = comm_pattern(*lvl.p, topo);
        lvl.p_pattern_mirror = lvl.p_pattern->mirrored();
        lvl.p_forward = build_schedule(lvl.vec_strategy, *lvl.p_pattern, topo);
        lvl.p_reverse = build_schedule(lvl.vec_strategy, *lvl.p_pattern_mirror, topo);
        lvl.ptap_pattern = gal.ptap_pattern;
        lvl.ptap_fragment_nnz = gal.fragment_nnz;
        lvl.ptap_eval = evaluate_matrix_strategies(
            gal.ptap_pattern, topo, params,
            [&gal](int rank, index_t row) { return gal.fragment_size(rank, row); },
            config.counters_mode);

        h.levels.push_back(make_level(std::move(gal.coarse), config, topo, params));
    }
    return h;
}

} // namespace napmg
