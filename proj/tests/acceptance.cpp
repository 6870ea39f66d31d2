// Acceptance checks. One line per criterion: PASS, FAIL or N/A, then details.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "column_oracle.hpp"
#include "commands.hpp"
#include "gwflow/case_io.hpp"
#include "gwflow/kernels.hpp"
#include "gwflow/rng.hpp"
#include "gwflow/simulation.hpp"
#include "gwflow/timectl.hpp"
#include "gwflow/vtk_io.hpp"
#include "test_support.hpp"

using namespace gwflow;

namespace {

enum class Status { pass, fail, not_applicable };

struct Outcome {
    Status status = Status::fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(double v, int digits = 6)
{
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

CaseConfig tutorial(std::vector<Override> o = {}) { return load_case(source_path("cases/1Dinfiltration.case"), o); }

RunResult run_quiet(const CaseConfig& c)
{
    Simulation sim(c);
    RunOptions o;
    o.write_outputs = false;
    return sim.run(o);
}

// Column at fixed dt with no intermediate outputs.
CaseConfig fixed_column(int cells, double dt, double end)
{
    CaseConfig c = tutorial();
    c.mesh.nz = cells;
    c.time.end = end;
    c.time.adaptive = false;
    c.time.control.dt_init = dt;
    c.time.control.dt_min = std::min(c.time.control.dt_min, dt);
    c.output.times.clear();
    return c;
}

// ---------------------------------------------------------------------------

Outcome c1_goldens()
{
    const auto vg = VanGenuchtenParams::from_alpha_n(3.35, 2.0, 0.102, 0.368);
    const double a = theta_of_h(-0.75, vg);
    const double b = theta_of_h(-10.0, vg);
    const double c = theta_of_h(-5.0, vg);
    const bool ok = std::abs(a - 0.20037) <= 5e-5 && std::abs(b - 0.10994) <= 5e-5 && std::abs(c - 0.118) <= 1e-3;
    return verdict(ok, "theta(-0.75)=" + fmt(a) + " theta(-10)=" + fmt(b) + " theta(-5)=" + fmt(c));
}

Outcome c2_conversion()
{
    const FluidProps water;
    const double k = permeability_from_conductivity(9.22e-5, water);
    const double ks = conductivity_from_permeability(9.4e-12, water);
    const bool ok = std::abs(k - 9.4e-12) <= 1e-13 && water.g_magnitude() == 9.81 &&
                    std::abs(permeability_from_conductivity(ks, water) - 9.4e-12) <= 1e-13;
    return verdict(ok, "K(9.22e-5 m/s) = " + fmt(k) + " m2, Ks(9.4e-12 m2) = " + fmt(ks) + " m/s");
}

Outcome c3_capacity()
{
    const auto vg = VanGenuchtenParams::from_alpha_n(3.35, 2.0, 0.102, 0.368);
    Xoshiro256ss rng(314159);
    std::vector<double> hs(1000);
    for (auto& h : hs) h = -(0.01 + (50.0 - 0.01) * rng.uniform());
    double c_max = 0.0;
    for (double h : hs) c_max = std::max(c_max, capillary_capacity(h, vg));
    double worst = 0.0;
    for (double h : hs) {
        const double step = 1e-6 * std::max(1.0, std::abs(h));
        const double fd = (theta_of_h(h + step, vg) - theta_of_h(h - step, vg)) / (2.0 * step);
        worst = std::max(worst, std::abs(capillary_capacity(h, vg) - fd) / c_max);
    }
    return verdict(worst < 1e-6, "max relative deviation " + fmt(worst, 3) + " over 1000 samples");
}

Outcome c4_hydrostatic()
{
    Simulation sim(load_case(source_path("cases/hydrostatic.case")));
    std::vector<double> h = sim.initial_head();
    for (int i = 0; i < 10; ++i) h = sim.solver().step(h, 60.0).h;
    const double d = picard_residual(h, sim.initial_head());
    return verdict(d < 1e-12, "max |dh| after 10 steps = " + fmt(d, 3) + " m");
}

Outcome c5_controller()
{
    bool ok = true;
    TimeControlConfig a;
    a.n_max_iter = 8;
    a.f_decrease = 0.5;
    ok = ok && next_dt({10.0, 0}, 9, a) == ControllerState{5.0, 0};
    TimeControlConfig b;
    ok = ok && next_dt({10.0, 0}, 5, b) == ControllerState{10.0, 0};
    ok = ok && next_dt({10.0, 4}, 2, b) == ControllerState{13.0, 0};
    ok = ok && next_dt({10.0, 2}, 2, b) == ControllerState{10.0, 3};
    const bool examples = ok;

    TimeControlConfig cfg;
    cfg.dt_min = 0.5;
    cfg.dt_max = 50.0;
    Xoshiro256ss rng(99);
    long transitions = 0;
    for (int seq = 0; seq < 10000 && ok; ++seq) {
        ControllerState s{cfg.clamp(50.0 * rng.uniform()), 0};
        int fast = 0;
        for (int k = 0; k < 50 && ok; ++k) {
            const int n = 1 + static_cast<int>(rng.next() % 12);
            const ControllerState prev = s;
            s = next_dt(s, n, cfg);
            ++transitions;
            ok = ok && s.dt >= cfg.dt_min && s.dt <= cfg.dt_max;
            if (n < cfg.n_min_iter) {
                ++fast;
                const bool due = fast == cfg.n_stab;
                if (due) fast = 0;
                // Increase only on the n_stab-th consecutive fast step.
                ok = ok && (due ? (s.dt > prev.dt || prev.dt == cfg.dt_max) : s.dt == prev.dt);
            } else {
                fast = 0;
                ok = ok && s.dt <= prev.dt;
            }
            ok = ok && s.stab_counter == fast;
        }
    }
    return verdict(ok, std::string("4 examples ") + (examples ? "exact" : "WRONG") + ", " +
                           std::to_string(transitions) + " random transitions checked");
}

Outcome c6_oracle()
{
    const RunResult res = run_quiet(fixed_column(50, 1.0, 360.0));
    oracle::ColumnProblem p;
    p.cells = 50;
    p.dt = 1.0;
    p.t_end = 360.0;
    const oracle::ColumnResult ref = oracle::solve_column(p);
    // Both are ordered bottom to top.
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.h.size(); ++i) worst = std::max(worst, std::abs(res.h[i] - ref.h[i]));
    const double limit = 0.02 * std::abs(p.h_top - p.h_init);
    return verdict(res.h.size() == ref.h.size() && worst <= limit,
                   "max |h - h_oracle| = " + fmt(worst, 4) + " m, limit " + fmt(limit, 4) + " m");
}

std::vector<double> coarsen(const std::vector<double>& f)
{
    std::vector<double> out(f.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (f[2 * i] + f[2 * i + 1]);
    return out;
}

double rms_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

double observed_order(double dt, double end, int& warnings)
{
    warnings = 0;
    std::vector<std::vector<double>> h;
    for (int n : {100, 200, 400}) {
        const RunResult r = run_quiet(fixed_column(n, dt, end));
        warnings += r.warnings;
        h.push_back(r.h);
    }
    // Fine solutions are averaged onto the 100-cell grid (uniform spacing, so L2 is an RMS).
    const double e1 = rms_diff(h[0], coarsen(h[1]));
    const double e2 = rms_diff(coarsen(h[1]), coarsen(coarsen(h[2])));
    return std::log2(e1 / e2);
}

Outcome c7_convergence()
{
    int w = 0;
    const double p = observed_order(2.0, 21600.0, w);
    int w_early = 0;
    const double p_early = observed_order(1.0, 360.0, w_early);
    return verdict(p >= 0.9, "order " + fmt(p, 3) + " at t = 6 h, dt = 2 s (" + std::to_string(w) +
                                 " capped steps); for reference " + fmt(p_early, 3) + " at t = 360 s");
}

Outcome c8_mass_balance()
{
    const RunResult a = run_quiet(fixed_column(50, 1.0, 360.0));
    const RunResult b = run_quiet(fixed_column(50, 0.5, 360.0));
    const double ea = a.cumulative_mass_balance_error();
    const double eb = b.cumulative_mass_balance_error();
    return verdict(eb < ea, "cumulative error " + fmt(ea, 4) + " at dt = 1 s, " + fmt(eb, 4) + " at dt = 0.5 s");
}

Outcome c9_tutorial()
{
    const RunResult r = run_quiet(tutorial());
    return verdict(!r.aborted && r.warnings == 0 && r.time == 86400.0,
                   std::to_string(r.log.size()) + " steps to t = " + fmt(r.time) + " s, " +
                       std::to_string(r.warnings) + " hard-cap warnings");
}

Outcome c10_scaling()
{
    const CaseConfig cfg = load_case(source_path("cases/realCase.case"), {parse_override("mesh.refine=1")});
    std::ostringstream log;
    const auto rep = cli::bench(cfg, {1, 2, 4}, 10, 3, log);
    std::ostringstream d;
    d << rep.cells << " cells, speedups";
    for (const auto& p : rep.points) d << ' ' << p.threads << ':' << fmt(p.speedup, 3);
    const double s4 = rep.points.back().speedup;
    d << ", bit-identical " << (rep.deterministic() ? "yes" : "no") << ", " << rep.hardware_threads
      << " hardware threads";
    if (rep.cells < 200000) return {Status::fail, d.str() + " (mesh below 200k cells)"};
    if (!rep.deterministic()) return {Status::fail, d.str()};
    if (rep.hardware_threads < 4)
        return {Status::not_applicable,
                d.str() + "; speedup part needs >= 4 cores, determinism part passed"};
    return verdict(rep.monotone() && s4 >= 2.0, d.str());
}

Outcome c11_vtk()
{
    const auto rules = parse_patch_rules(test_data("two_hex.patches"));
    const VtkDataset two = read_vtk_legacy(test_data("two_hex.vtk"), rules);
    const Mesh& m = two.mesh;
    bool ok = m.n_cells() == 2 && m.n_internal_faces() == 1 && m.n_boundary_faces() == 10;
    ok = ok && m.owner()[0] == 0 && m.neighbour()[0] == 1;
    ok = ok && m.face_area_vectors()[0] == Vec3{1.0, 0.0, 0.0} && m.face_centroids()[0].x == 1.0;
    const auto* inlet = m.find_patch("inlet");
    const auto* outlet = m.find_patch("outlet");
    const auto* walls = m.find_patch("walls");
    ok = ok && inlet && outlet && walls && inlet->faces.size() == 1 && outlet->faces.size() == 1 &&
         walls->faces.size() == 8;
    const bool two_hex = ok;

    // Round trip: write, read, write again; geometry and text must match exactly.
    const Mesh terrain = synth_terrain_mesh(5, 4, 3, 2.0, 3.0, SurfaceSpec{3.0, 0.7, 2.0, 3.0}, 1.5);
    CellData data;
    data.names = {"h"};
    data.values["h"].resize(static_cast<std::size_t>(terrain.n_cells()));
    for (Index c = 0; c < terrain.n_cells(); ++c) data.values["h"][c] = std::sin(0.3 * c) - 1.0 / 3.0;
    const std::string text = write_vtk(terrain, data);
    const VtkDataset back = read_vtk_legacy(text);
    ok = ok && back.mesh.points() == terrain.points() && back.mesh.n_cells() == terrain.n_cells();
    for (Index c = 0; ok && c < terrain.n_cells(); ++c) {
        const auto a = terrain.cell_points(c);
        const auto b = back.mesh.cell_points(c);
        ok = std::equal(a.begin(), a.end(), b.begin(), b.end());
    }
    ok = ok && back.mesh.neighbour() == terrain.neighbour() && back.cell_data.values.at("h") == data.values["h"];
    ok = ok && write_vtk(back.mesh, back.cell_data) == text;
    return verdict(ok, std::string("two-hex ") + (two_hex ? "ok" : "WRONG") + ", round trip of " +
                           std::to_string(terrain.n_cells()) + " cells");
}

} // namespace

int main(int argc, char** argv)
{
    // Optional filter: criterion numbers to run, e.g. "acceptance 1 2 6".
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"constitutive golden values", c1_goldens},
        {"permeability conversion", c2_conversion},
        {"capacity equals d(theta)/dh", c3_capacity},
        {"hydrostatic preservation", c4_hydrostatic},
        {"time-step controller", c5_controller},
        {"oracle agreement on the validation column", c6_oracle},
        {"self-convergence order", c7_convergence},
        {"mass-balance trend with dt", c8_mass_balance},
        {"tutorial run without hard-cap warnings", c9_tutorial},
        {"strong scaling and determinism", c10_scaling},
        {"VTK round trip and two-hex face matching", c11_vtk},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {Status::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = out.status == Status::pass ? "PASS" : out.status == Status::fail ? "FAIL" : "N/A ";
        if (out.status == Status::fail) ++failures;
        std::cout << tag << " [" << std::setw(2) << number << "] " << criteria[i].first << ": " << out.detail << " ("
                  << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat << std::endl;
    }
    std::cout << (failures == 0 ? "acceptance: all criteria met or not applicable" : "acceptance: failures present")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
