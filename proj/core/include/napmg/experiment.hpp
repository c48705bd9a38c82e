#pragma once

#include "napmg/solve.hpp"

#include <iosfwd>
#include <string>

namespace napmg {

/// Everything the benchmark driver needs for one run. String fields keep CLI
/// parsing trivial; validation happens in run_experiment.
struct ExperimentConfig {
    std::string problem = "laplace2d";  // laplace2d | laplace3d | rotated_aniso
    std::string matrix_file;            // overrides `problem` when set
    index_t nx = 32;
    index_t ny = 0; // defaults to nx
    index_t nz = 0; // defaults to nx (3d only)
    double eps = 0.001;
    double theta_angle = 0.5235987755982988;

    int procs = 4;
    int ppn = 1;

    std::string solver = "ruge_stuben";
    double strength_theta = 0.25;
    index_t max_coarse = 50;
    int sweeps = 1;
    std::string strategy = "auto"; // auto | standard | nap2 | nap3
    std::string model_params_path;
    std::string counters_mode; // "", schedule, pattern

    int max_iters = 100;
    double rtol = 1e-8;
    double jacobi_weight = 2.0 / 3.0;
    int pre_sweeps = 1;
    int post_sweeps = 1;

    std::string out_dir = ".";
};

struct ExperimentResult {
    int exit_code = 0; // 0 converged, 2 not converged / diverged
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    std::size_t num_levels = 0;
    std::string report_path;
    std::string levels_path;
    std::string messages_path;
};

/// Builds the problem, runs setup and solve, and writes report.json,
/// levels.csv and messages.csv into out_dir. Reports are byte-deterministic
/// for identical configs. Configuration problems throw; solver outcomes map
/// to the exit code.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Reads a report.json and prints the modeled speedup table
/// (standard / chosen cost per level and in aggregate). Returns 0, or 1 for
/// unreadable reports.
int write_compare_table(const std::string& report_path, std::ostream& out);

} // namespace napmg
