#include "gwflow/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace gwflow {

std::string log_table_csv(const std::vector<StepLogRow>& log)
{
    std::string out = "time_s,dt_s,n_picard,residual_m,mass_balance_err\n";
    char buf[160];
    for (const auto& r : log) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g\n", r.time, r.dt, r.n_picard, r.residual,
                      r.mass_balance_error);
        out += buf;
    }
    return out;
}

Simulation::Simulation(CaseConfig cfg) : cfg_(std::move(cfg))
{
    mesh_ = std::make_unique<Mesh>(build_mesh(cfg_));
    solver_ = std::make_unique<RichardsSolver>(make_problem(cfg_, *mesh_), cfg_.picard);
    h0_ = build_initial_head(cfg_, *mesh_);
    check_cell_field(*mesh_, h0_, "initial head");
}

namespace {

int vertical_axis(const FluidProps& fluid)
{
    const Vec3 g = fluid.g_hat();
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (std::abs(g[a]) > std::abs(g[axis])) axis = a;
    return axis;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::filesystem::path output_dir_of(const RunOptions& options, const CaseConfig& cfg)
{
    return options.output_dir.empty() ? std::filesystem::path(cfg.output.directory) : options.output_dir;
}

} // namespace

void Simulation::write_outputs(const RunOptions& options, std::span<const double> h, double time,
                               RunResult& result) const
{
    if (!options.write_outputs) return;
    const auto dir = output_dir_of(options, cfg_);
    const auto& name = cfg_.output.name;
    if (cfg_.output.vtk) {
        const SecondaryFields sec = solver_->secondary(h);
        result.files.push_back(
            write_vtk_output(*mesh_, h, sec.theta.values, solver_->problem().material.permeability, time, dir, name));
    } else {
        std::filesystem::create_directories(dir);
    }
    std::string stem = output_filename(name + "_profile", time);
    stem.replace(stem.size() - 4, 4, ".csv");
    const auto path = dir / stem;
    write_file(path, profile_csv(extract_profile(*mesh_, h, vertical_axis(cfg_.fluid))));
    result.files.push_back(path);
}

RunResult Simulation::run(const RunOptions& options)
{
    const TimeSpec& ts = cfg_.time;
    TimeControlConfig ctl = ts.control;
    ctl.n_max_iter = cfg_.picard.n_max_iter;

    std::vector<double> targets = cfg_.output.times;
    if (targets.empty() || targets.back() < ts.end) targets.push_back(ts.end);

    RunResult result;
    result.h = h0_;
    double t = 0.0;
    write_outputs(options, result.h, t, result);

    ControllerState state{ctl.clamp(ctl.dt_init), 0};
    std::size_t next = 0;
    int dt_min_failures = 0;
    int steps = 0;

    while (next < targets.size()) {
        const double target = targets[next];
        const double dt_try = state.dt;
        double dt = dt_try;
        bool lands = false;
        // Land on the target when the proposed step reaches it or would leave a sliver.
        if (t + dt >= target - 1e-9 * std::max(1.0, std::abs(target))) {
            dt = target - t;
            lands = true;
        }
        const bool truncated = dt < dt_try;

        PicardResult step = solver_->step(result.h, dt);
        const StepReport& rep = step.report;
        result.h = std::move(step.h);
        t = lands ? target : t + dt;
        ++steps;

        StepLogRow row;
        row.time = t;
        row.dt = dt;
        row.n_picard = rep.n_iter;
        row.residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
        row.mass_balance_error = rep.mass_balance_error;
        row.warned = rep.warned;
        row.linear_iterations = rep.linear_iterations;
        result.log.push_back(row);
        result.storage_change += rep.storage_change;
        result.boundary_inflow += rep.boundary_inflow;
        if (rep.warned) ++result.warnings;
        if (options.on_step) options.on_step(row);

        if (ts.adaptive && !truncated) {
            const bool decrease = rep.n_iter > ctl.n_max_iter;
            if (decrease && state.dt <= ctl.dt_min) {
                if (++dt_min_failures >= ctl.max_dt_min_failures) {
                    char buf[200];
                    std::snprintf(buf, sizeof buf,
                                  "time step stuck at dt_min = %g s for %d consecutive slow steps (t = %.6g s)",
                                  ctl.dt_min, dt_min_failures, t);
                    result.aborted = true;
                    result.abort_reason = buf;
                    break;
                }
            } else {
                dt_min_failures = 0;
            }
            state = next_dt(state, rep.n_iter, ctl);
        }

        if (lands) {
            write_outputs(options, result.h, t, result);
            ++next;
        }
        if (options.max_steps > 0 && steps >= options.max_steps) break;
    }

    result.time = t;
    if (options.write_outputs) {
        const auto dir = output_dir_of(options, cfg_);
        std::filesystem::create_directories(dir);
        const auto path = dir / (cfg_.output.name + "_log.csv");
        write_file(path, log_table_csv(result.log));
        result.files.push_back(path);
    }
    return result;
}

} // namespace gwflow
