#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "column_oracle.hpp"
#include "embedded_cases.hpp"
#include "gwflow/kernels.hpp"
#include "gwflow/simulation.hpp"

namespace gwflow::cli {

const char* embedded_infiltration_case() { return embedded::infiltration_case; }

bool BenchReport::monotone() const
{
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].speedup < points[i - 1].speedup) return false;
    return true;
}

bool BenchReport::deterministic() const
{
    return std::all_of(points.begin(), points.end(), [](const BenchPoint& p) { return p.identical; });
}

namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool bit_identical(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

BenchReport bench(const CaseConfig& cfg, std::vector<int> threads, int steps, int repeats, std::ostream& log)
{
    if (threads.empty()) throw std::invalid_argument("bench: empty thread list");
    if (steps < 1) throw std::invalid_argument("bench: steps must be >= 1");
    if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
    std::sort(threads.begin(), threads.end());
    threads.erase(std::unique(threads.begin(), threads.end()), threads.end());
    if (threads.front() < 1) throw std::invalid_argument("bench: thread counts must be >= 1");

    BenchReport report;
    report.case_name = cfg.output.name;
    report.steps = steps;
    report.hardware_threads = hardware_threads();

    Simulation sim(cfg);
    report.cells = sim.mesh().n_cells();
    log << "bench: " << report.cells << " cells, " << steps << " steps, " << repeats << " repeats\n";
    if (report.cells / threads.back() < 1000)
        log << "warning: fewer than 1000 cells per thread at " << threads.back() << " threads\n";

    RunOptions opts;
    opts.write_outputs = false;
    opts.max_steps = steps;

    std::vector<double> reference;
    for (int n : threads) {
        if (n > report.hardware_threads)
            log << "warning: " << n << " threads exceed the " << report.hardware_threads << " available\n";
        set_thread_count(n);
        BenchPoint p;
        p.threads = n;
        p.cells_per_thread = static_cast<double>(report.cells) / n;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            RunResult res = sim.run(opts);
            const auto t1 = std::chrono::steady_clock::now();
            p.times.push_back(std::chrono::duration<double>(t1 - t0).count());
            if (reference.empty()) reference = res.h;
            p.identical = p.identical && bit_identical(reference, res.h);
            log << "  threads=" << n << " repeat " << (r + 1) << ": " << p.times.back() << " s\n";
        }
        p.median = median(p.times);
        report.points.push_back(p);
    }
    set_thread_count(0);
    for (auto& p : report.points) p.speedup = report.points.front().median / p.median;
    return report;
}

void print_bench(const BenchReport& report, std::ostream& out)
{
    out << "case " << report.case_name << ": " << report.cells << " cells, " << report.steps << " steps, "
        << report.hardware_threads << " hardware threads\n";
    out << "threads,cells_per_thread,median_s,speedup\n";
    for (const auto& p : report.points) {
        out << p.threads << ',' << std::setprecision(6) << p.cells_per_thread << ',' << p.median << ','
            << p.speedup << '\n';
    }
    out << "speedup monotone: " << (report.monotone() ? "yes" : "no") << '\n';
    out << "bit-identical across thread counts: " << (report.deterministic() ? "yes" : "no") << '\n';
}

namespace {

CheckLine check_close(const std::string& name, double value, double expected, double tol)
{
    std::ostringstream d;
    d << std::setprecision(8) << value << " (expected " << expected << " +- " << tol << ")";
    return {name, std::abs(value - expected) <= tol, d.str()};
}

} // namespace

std::vector<CheckLine> validate(double alpha_factor, std::ostream& log)
{
    std::vector<CheckLine> lines;
    CaseConfig cfg = parse_case(embedded::infiltration_case);
    cfg.vg.alpha *= alpha_factor;
    const auto& vg = cfg.vg;

    lines.push_back(check_close("theta(-0.75 m)", theta_of_h(-0.75, vg), 0.20037, 5e-5));
    lines.push_back(check_close("theta(-10 m)", theta_of_h(-10.0, vg), 0.10994, 5e-5));
    lines.push_back(check_close("theta(-5 m)", theta_of_h(-5.0, vg), 0.118, 1e-3));
    lines.push_back(check_close("K from Ks (m2)", cfg.permeability.value, 9.4e-12, 1e-13));

    // Oracle comparison: 50 cells, fixed dt = 1 s, t = 360 s.
    {
        CaseConfig c = cfg;
        c.mesh.nz = 50;
        c.time.end = 360.0;
        c.time.adaptive = false;
        c.time.control.dt_init = 1.0;
        c.output.times.clear();
        Simulation sim(c);
        RunOptions opts;
        opts.write_outputs = false;
        const RunResult res = sim.run(opts);

        oracle::ColumnProblem p;
        p.cells = 50;
        p.dt = 1.0;
        p.t_end = 360.0;
        const oracle::ColumnResult ref = oracle::solve_column(p);

        const auto profile = extract_profile(sim.mesh(), res.h, 2);
        double worst = 0.0;
        for (std::size_t i = 0; i < profile.size() && i < ref.h.size(); ++i)
            worst = std::max(worst, std::abs(profile[i].second - ref.h[i]));
        const double range = std::abs(p.h_top - p.h_init);
        std::ostringstream d;
        d << "max |dh| = " << std::setprecision(6) << worst << " m, limit " << 0.02 * range << " m";
        lines.push_back({"oracle agreement (50 cells, 360 s)", profile.size() == ref.h.size() && worst <= 0.02 * range,
                         d.str()});
    }

    // Full tutorial run.
    {
        CaseConfig c = cfg;
        Simulation sim(c);
        RunOptions opts;
        opts.write_outputs = false;
        const RunResult res = sim.run(opts);
        const auto profile = extract_profile(sim.mesh(), res.h, 2);
        double h_top = 0.0;
        for (const auto& bc : cfg.bcs)
            if (bc.patch == "z+") h_top = bc.head;
        bool monotone = !res.aborted;
        for (std::size_t i = 1; i < profile.size(); ++i)
            monotone = monotone && profile[i].second >= profile[i - 1].second - 1e-9;
        for (const auto& [z, h] : profile)
            monotone = monotone && h >= cfg.initial.value - 1e-9 && h <= h_top + 1e-9;
        std::ostringstream d;
        d << res.log.size() << " steps to t = " << res.time << " s, " << res.warnings << " hard-cap warnings"
          << (res.aborted ? ", aborted: " + res.abort_reason : "");
        lines.push_back({"tutorial run without warnings", !res.aborted && res.warnings == 0, d.str()});
        lines.push_back({"final profile monotone within [h_init, h_top]", monotone, ""});
    }
    for (const auto& l : lines)
        log << (l.pass ? "PASS " : "FAIL ") << l.name << (l.detail.empty() ? "" : ": " + l.detail) << '\n';
    return lines;
}

} // namespace gwflow::cli
