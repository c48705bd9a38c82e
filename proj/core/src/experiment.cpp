#include "napmg/experiment.hpp"

#include "napmg/matrix_market.hpp"
#include "napmg/stencil.hpp"

#include <json.hpp>
#include <algorithm>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace napmg {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsrMatrix build_problem(const ExperimentConfig& cfg) {
    if (!cfg.matrix_file.empty()) return read_matrix_market(cfg.matrix_file);
    const index_t nx = cfg.nx;
    const index_t ny = cfg.ny > 0 ? cfg.ny : nx;
    const index_t nz = cfg.nz > 0 ? cfg.nz : nx;
    if (cfg.problem == "laplace2d") return laplace2d_5pt(nx, ny);
    if (cfg.problem == "laplace3d") return laplace3d_7pt(nx, ny, nz);
    if (cfg.problem == "rotated_aniso") return rotated_aniso_2d(nx, ny, cfg.eps, cfg.theta_angle);
    throw std::invalid_argument("config: unknown problem '" + cfg.problem +
                                "' (expected laplace2d, laplace3d or rotated_aniso)");
}

ordered_json counters_json(const CommCounters& c) {
    ordered_json j;
    j["n_proc"] = c.n_proc;
    j["n_proc2node"] = c.n_proc2node;
    j["n_node2node"] = c.n_node2node;
    j["s_proc"] = c.s_proc;
    j["s_node"] = c.s_node;
    j["s_node2node"] = c.s_node2node;
    j["intra_extra_count"] = c.intra_extra_count;
    j["intra_extra_bytes"] = c.intra_extra_bytes;
    j["max_message_bytes"] = c.max_message_bytes;
    j["inter_count"] = c.inter_count;
    j["inter_bytes"] = c.inter_bytes;
    j["intra_count"] = c.intra_count;
    j["intra_bytes"] = c.intra_bytes;
    return j;
}

ordered_json estimate_json(const ModelEstimate& e) {
    ordered_json j;
    j["total_s"] = e.total;
    j["latency_s"] = e.latency;
    j["bandwidth_s"] = e.bandwidth;
    j["intra_s"] = e.intra;
    return j;
}

ordered_json op_json(const StrategyEvaluation& ev, Strategy executed) {
    ordered_json j;
    j["chosen"] = to_string(executed);
    j["model_argmin"] = to_string(ev.chosen);
    for (Strategy s : {Strategy::standard, Strategy::nap2, Strategy::nap3}) {
        ordered_json sj;
        sj["model"] = estimate_json(ev.estimate(s));
        sj["counters"] = counters_json(ev.counters(s));
        j["strategies"][to_string(s)] = std::move(sj);
    }
    return j;
}

double ratio_or_one(double standard, double chosen) {
    if (chosen == 0.0) return 1.0; // no communication in either schedule
    return standard / chosen;
}

struct OpRef {
    const char* name;
    const StrategyEvaluation* eval;
    Strategy executed;
};

std::vector<OpRef> level_ops(const Level& lvl) {
    std::vector<OpRef> ops;
    ops.push_back({"vector", &lvl.vec_eval, lvl.vec_strategy});
    if (lvl.mat_eval) ops.push_back({"matrix", &*lvl.mat_eval, lvl.mat_strategy});
    if (lvl.ptap_eval) ops.push_back({"ptap", &*lvl.ptap_eval, lvl.mat_strategy});
    return ops;
}

void write_levels_csv(const Hierarchy& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "level,rows,nnz,op,strategy,chosen,n_proc,s_proc,s_node,n_proc2node,n_node2node,"
           "s_node2node,intra_extra_count,intra_extra_bytes,inter_count,inter_bytes,"
           "intra_count,intra_bytes,max_message_bytes,model_total_s,model_latency_s,"
           "model_bandwidth_s,model_intra_s\n";
    for (std::size_t l = 0; l < h.levels.size(); ++l) {
        const Level& lvl = h.levels[l];
        for (const OpRef& op : level_ops(lvl)) {
            for (Strategy s : {Strategy::standard, Strategy::nap2, Strategy::nap3}) {
                const CommCounters& c = op.eval->counters(s);
                const ModelEstimate& e = op.eval->estimate(s);
                out << l << "," << lvl.rows() << "," << lvl.nnz() << "," << op.name << ","
                    << to_string(s) << "," << (op.executed == s ? 1 : 0) << "," << c.n_proc << ","
                    << c.s_proc << "," << c.s_node << "," << c.n_proc2node << ","
                    << c.n_node2node << "," << c.s_node2node << "," << c.intra_extra_count << ","
                    << c.intra_extra_bytes << "," << c.inter_count << "," << c.inter_bytes << ","
                    << c.intra_count << "," << c.intra_bytes << "," << c.max_message_bytes << ","
                    << fmt_double(e.total) << "," << fmt_double(e.latency) << ","
                    << fmt_double(e.bandwidth) << "," << fmt_double(e.intra) << "\n";
            }
        }
    }
}

void write_messages_csv(const Hierarchy& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "level,op,strategy,step_class,src,dst,bytes,inter_node\n";
    for (std::size_t l = 0; l < h.levels.size(); ++l) {
        const Level& lvl = h.levels[l];
        auto emit = [&](const char* op, Strategy s, const MessageLog& log) {
            for (const LogEntry& e : log.entries)
                out << l << "," << op << "," << to_string(s) << "," << to_string(e.step) << ","
                    << e.src << "," << e.dst << "," << e.bytes << "," << (e.inter_node ? 1 : 0)
                    << "\n";
        };
        for (Strategy s : {Strategy::standard, Strategy::nap2, Strategy::nap3}) {
            emit("vector", s, vector_log(build_schedule(s, lvl.pattern, h.topo)));
            if (lvl.p) {
                const PartitionedMatrix& p = *lvl.p;
                emit("matrix", s,
                     matrix_log(build_schedule(s, lvl.pattern, h.topo),
                                [&p](int rank, index_t row) {
                                    return static_cast<index_t>(p.global_row(rank, row).size());
                                }));
            }
            if (lvl.ptap_pattern) {
                const auto& frag = lvl.ptap_fragment_nnz;
                emit("ptap", s,
                     matrix_log(build_schedule(s, *lvl.ptap_pattern, h.topo),
                                [&frag](int rank, index_t row) -> index_t {
                                    const auto& list = frag[static_cast<std::size_t>(rank)];
                                    auto it = std::lower_bound(
                                        list.begin(), list.end(), row,
                                        [](const auto& pair, index_t r) { return pair.first < r; });
                                    if (it == list.end() || it->first != row)
                                        throw std::logic_error("messages.csv: unknown fragment");
                                    return it->second;
                                }));
            }
        }
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.procs < 1 || cfg.ppn < 1)
        throw std::invalid_argument("config: procs and ppn must be >= 1");
    const Topology topo(cfg.procs, cfg.ppn);

    ModelParams params;
    std::string file_counters_mode;
    if (!cfg.model_params_path.empty())
        params = ModelParams::from_file(cfg.model_params_path, &file_counters_mode);

    SetupConfig setup_cfg;
    setup_cfg.solver = solver_from_string(cfg.solver);
    setup_cfg.strength_theta = cfg.strength_theta;
    setup_cfg.max_coarse = cfg.max_coarse;
    setup_cfg.prolongation_sweeps = cfg.sweeps;
    if (cfg.strategy != "auto") setup_cfg.strategy_override = strategy_from_string(cfg.strategy);
    if (!cfg.counters_mode.empty())
        setup_cfg.counters_mode = counters_mode_from_string(cfg.counters_mode);
    else if (!file_counters_mode.empty())
        setup_cfg.counters_mode = counters_mode_from_string(file_counters_mode);

    const CsrMatrix a_global = build_problem(cfg);
    const RowPartition part = RowPartition::balanced(a_global.n_rows, cfg.procs);
    const PartitionedMatrix a = distribute(a_global, part);

    const Hierarchy h = setup(a, setup_cfg, topo, params);

    SolveOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.rtol = cfg.rtol;
    opts.jacobi_weight = cfg.jacobi_weight;
    opts.pre_sweeps = cfg.pre_sweeps;
    opts.post_sweeps = cfg.post_sweeps;

    PartitionedVector x = PartitionedVector::zeros(part);
    const PartitionedVector b =
        PartitionedVector::from_global(Vector(static_cast<std::size_t>(a_global.n_rows), 1.0), part);
    const SolveResult sol = solve(h, b, x, opts);

    std::filesystem::create_directories(cfg.out_dir);
    ExperimentResult result;
    result.status = sol.status;
    result.iterations = sol.iterations;
    result.num_levels = h.num_levels();
    result.exit_code = sol.status == SolveStatus::converged ? 0 : 2;
    result.report_path = (std::filesystem::path(cfg.out_dir) / "report.json").string();
    result.levels_path = (std::filesystem::path(cfg.out_dir) / "levels.csv").string();
    result.messages_path = (std::filesystem::path(cfg.out_dir) / "messages.csv").string();

    ordered_json report;
    report["schema"] = 1;
    {
        ordered_json c;
        c["problem"] = cfg.matrix_file.empty() ? cfg.problem : "matrix_file";
        if (!cfg.matrix_file.empty()) c["matrix_file"] = cfg.matrix_file;
        c["nx"] = cfg.nx;
        c["ny"] = cfg.ny > 0 ? cfg.ny : cfg.nx;
        c["nz"] = cfg.nz > 0 ? cfg.nz : cfg.nx;
        c["eps"] = cfg.eps;
        c["theta_angle"] = cfg.theta_angle;
        c["procs"] = cfg.procs;
        c["ppn"] = cfg.ppn;
        c["solver"] = cfg.solver;
        c["strength_theta"] = cfg.strength_theta;
        c["max_coarse"] = cfg.max_coarse;
        c["sweeps"] = cfg.sweeps;
        c["strategy"] = cfg.strategy;
        c["model_counters"] = to_string(setup_cfg.counters_mode);
        c["max_iters"] = cfg.max_iters;
        c["rtol"] = cfg.rtol;
        c["jacobi_weight"] = cfg.jacobi_weight;
        c["pre_sweeps"] = cfg.pre_sweeps;
        c["post_sweeps"] = cfg.post_sweeps;
        report["config"] = std::move(c);
    }
    {
        ordered_json t;
        t["procs"] = topo.num_procs;
        t["ppn"] = topo.ppn;
        t["nodes"] = topo.num_nodes();
        report["topology"] = std::move(t);
    }

    ordered_json levels = ordered_json::array();
    for (std::size_t l = 0; l < h.levels.size(); ++l) {
        const Level& lvl = h.levels[l];
        ordered_json j;
        j["level"] = l;
        j["rows"] = lvl.rows();
        j["nnz"] = lvl.nnz();
        j["vector"] = op_json(lvl.vec_eval, lvl.vec_strategy);
        j["matrix"] = lvl.mat_eval ? op_json(*lvl.mat_eval, lvl.mat_strategy) : ordered_json(nullptr);
        j["ptap"] = lvl.ptap_eval ? op_json(*lvl.ptap_eval, lvl.mat_strategy) : ordered_json(nullptr);
        levels.push_back(std::move(j));
    }
    report["levels"] = std::move(levels);

    {
        ordered_json s;
        s["status"] = to_string(sol.status);
        s["iterations"] = sol.iterations;
        s["rtol"] = cfg.rtol;
        s["residual_history"] = sol.residual_history;
        report["solve"] = std::move(s);
    }

    {
        // modeled speedup: standard cost over executed-strategy cost
        ordered_json sp;
        const char* op_names[] = {"vector", "matrix", "ptap"};
        for (const char* name : op_names) {
            ordered_json per_level = ordered_json::array();
            double std_sum = 0.0, chosen_sum = 0.0;
            for (std::size_t l = 0; l < h.levels.size(); ++l) {
                for (const OpRef& op : level_ops(h.levels[l])) {
                    if (std::string(op.name) != name) continue;
                    const double ts = op.eval->standard.total;
                    const double tc = op.eval->estimate(op.executed).total;
                    std_sum += ts;
                    chosen_sum += tc;
                    ordered_json e;
                    e["level"] = l;
                    e["ratio"] = ratio_or_one(ts, tc);
                    per_level.push_back(std::move(e));
                }
            }
            sp[name] = std::move(per_level);
            sp["aggregate"][name] = ratio_or_one(std_sum, chosen_sum);
        }
        sp["metric"] = "modeled_time_standard_over_chosen";
        report["speedup"] = std::move(sp);
    }

    {
        std::ofstream out(result.report_path);
        if (!out) throw std::runtime_error(result.report_path + ": cannot open for writing");
        out << report.dump(2) << "\n";
    }
    write_levels_csv(h, result.levels_path);
    write_messages_csv(h, result.messages_path);
    return result;
}

int write_compare_table(const std::string& report_path, std::ostream& out) {
    ordered_json report;
    try {
        std::ifstream in(report_path);
        if (!in) throw std::runtime_error("cannot open");
        report = ordered_json::parse(in);
    } catch (const std::exception& e) {
        out << "error: " << report_path << ": " << e.what() << "\n";
        return 1;
    }
    auto fmt_ratio = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };
    out << "modeled speedup (standard / chosen), from " << report_path << "\n";
    out << std::left << std::setw(8) << "level" << std::setw(10) << "vector" << std::setw(10)
        << "matrix" << std::setw(10) << "ptap" << "\n";
    const auto& sp = report.at("speedup");
    const std::size_t n_levels = report.at("levels").size();
    for (std::size_t l = 0; l < n_levels; ++l) {
        out << std::left << std::setw(8) << l;
        for (const char* name : {"vector", "matrix", "ptap"}) {
            std::string cell = "-";
            for (const auto& e : sp.at(name))
                if (e.at("level").get<std::size_t>() == l)
                    cell = fmt_ratio(e.at("ratio").get<double>());
            out << std::setw(10) << cell;
        }
        out << "\n";
    }
    out << std::left << std::setw(8) << "total";
    for (const char* name : {"vector", "matrix", "ptap"}) {
        const auto& agg = sp.at("aggregate");
        out << std::setw(10)
            << (agg.contains(name) ? fmt_ratio(agg.at(name).get<double>()) : "-");
    }
    out << "\n";
    return 0;
}

} // namespace napmg
