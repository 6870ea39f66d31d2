#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gwflow/case_io.hpp"
#include "gwflow/richards.hpp"
#include "gwflow/timectl.hpp"

namespace gwflow {

struct StepLogRow {
    double time = 0.0;   ///< s, end of step
    double dt = 0.0;
    int n_picard = 0;
    double residual = 0.0;
    double mass_balance_error = 0.0;
    bool warned = false;
    int linear_iterations = 0;
};

struct RunOptions {
    bool write_outputs = true;
    std::filesystem::path output_dir;  ///< empty: the case's [output] directory
    int max_steps = 0;                 ///< > 0 stops after this many steps (bench)
    /// Called after each accepted step; for progress printing.
    std::function<void(const StepLogRow&)> on_step;
};

struct RunResult {
    std::vector<double> h;
    double time = 0.0;
    std::vector<StepLogRow> log;
    int warnings = 0;     ///< steps that hit the Picard hard cap
    bool aborted = false; ///< dt_min repeated-failure rule fired
    std::string abort_reason;
    double storage_change = 0.0;   ///< m3, cumulative
    double boundary_inflow = 0.0;  ///< m3, cumulative
    std::vector<std::filesystem::path> files;

    /// |sum dS - sum inflow| / max(|sum dS|, |sum inflow|, tiny).
    double cumulative_mass_balance_error() const { return mass_balance(storage_change, boundary_inflow); }
};

/// "time_s,dt_s,n_picard,residual_m,mass_balance_err" with one row per step.
std::string log_table_csv(const std::vector<StepLogRow>& log);

/// Owns the mesh, problem and solver of one case.
class Simulation {
public:
    explicit Simulation(CaseConfig cfg);

    const CaseConfig& config() const { return cfg_; }
    const Mesh& mesh() const { return *mesh_; }
    RichardsSolver& solver() { return *solver_; }
    const std::vector<double>& initial_head() const { return h0_; }

    /// Time loop from t = 0 to the end time. Steps land exactly on the output
    /// times and the end time; such truncated steps leave the controller alone.
    RunResult run(const RunOptions& options = {});

private:
    void write_outputs(const RunOptions& options, std::span<const double> h, double time, RunResult& result) const;

    CaseConfig cfg_;
    std::unique_ptr<Mesh> mesh_;
    std::unique_ptr<RichardsSolver> solver_;
    std::vector<double> h0_;
};

} // namespace gwflow
