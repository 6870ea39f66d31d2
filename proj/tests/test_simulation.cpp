#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "gwflow/simulation.hpp"
#include "gwflow/vtk_io.hpp"
#include "test_support.hpp"

using namespace gwflow;
namespace fs = std::filesystem;

namespace {

// The shipped column cut down to 50 cells and one minute.
CaseConfig short_column(std::vector<Override> extra = {})
{
    std::vector<Override> o{parse_override("mesh.cells=1 1 50"), parse_override("time.end=60 s"),
                            parse_override("output.times=10 30 s")};
    o.insert(o.end(), extra.begin(), extra.end());
    return load_case(source_path("cases/1Dinfiltration.case"), o);
}

bool contains_time(const RunResult& r, double t)
{
    return std::any_of(r.log.begin(), r.log.end(), [t](const StepLogRow& row) { return row.time == t; });
}

} // namespace

TEST_CASE("run lands on output times and writes files")
{
    const fs::path dir = scratch_dir("run_outputs");
    Simulation sim(short_column());
    RunOptions opt;
    opt.output_dir = dir;
    const RunResult r = sim.run(opt);
    CHECK_FALSE(r.aborted);
    CHECK(r.time == 60.0);
    CHECK(contains_time(r, 10.0));
    CHECK(contains_time(r, 30.0));
    CHECK(r.log.back().time == 60.0);
    for (double t : {0.0, 10.0, 30.0, 60.0}) {
        CAPTURE(t);
        const fs::path vtk = dir / output_filename("1Dinfiltration", t);
        CHECK(fs::exists(vtk));
    }
    const VtkDataset last = read_vtk_legacy(read_text_file(dir / output_filename("1Dinfiltration", 60.0)));
    CHECK(last.cell_data.values.at("h") == r.h);

    const std::string log = read_text_file(dir / "1Dinfiltration_log.csv");
    CHECK(log.rfind("time_s,dt_s,n_picard,residual_m,mass_balance_err\n", 0) == 0);
    CHECK(std::count(log.begin(), log.end(), '\n') == static_cast<long>(r.log.size()) + 1);

    const std::string profile = read_text_file(dir / "1Dinfiltration_profile_t0000000060.csv");
    CHECK(profile.rfind("coord_m,value\n", 0) == 0);
    CHECK(std::count(profile.begin(), profile.end(), '\n') == 51);

    double total = 0.0;
    for (const auto& row : r.log) total += row.dt;
    CHECK(total == doctest::Approx(60.0).epsilon(1e-12));
}

TEST_CASE("hydrostatic case: every step takes one Picard iteration")
{
    Simulation sim(load_case(source_path("cases/hydrostatic.case")));
    RunOptions opt;
    opt.write_outputs = false;
    const RunResult r = sim.run(opt);
    CHECK(r.log.size() > 10);
    for (const auto& row : r.log) CHECK(row.n_picard == 1);
    CHECK(picard_residual(r.h, sim.initial_head()) < 1e-12);
    CHECK(r.cumulative_mass_balance_error() == 0.0);
}

TEST_CASE("a tighter epsilon tightens the accepted residuals")
{
    RunOptions opt;
    opt.write_outputs = false;
    for (double eps : {1e-5, 1e-7}) {
        CAPTURE(eps);
        std::ostringstream v;
        v << "picard.epsilon=" << eps << " m";
        Simulation sim(short_column({parse_override(v.str())}));
        const RunResult r = sim.run(opt);
        for (const auto& row : r.log)
            if (!row.warned) CHECK(row.residual <= eps);
    }
}

TEST_CASE("run aborts when dt is stuck at dt_min")
{
    // A fixed, too-large step keeps every step over n_max_iter.
    Simulation sim(short_column({parse_override("time.dt_init=20 s"), parse_override("time.dt_min=20 s"),
                                 parse_override("time.dt_max=20 s"), parse_override("time.end=600 s"),
                                 parse_override("output.times=300 s"), parse_override("picard.n_max_iter=2"),
                                 parse_override("time.n_min_iter=1")}));
    RunOptions opt;
    opt.write_outputs = false;
    const RunResult r = sim.run(opt);
    CHECK(r.aborted);
    CHECK(r.log.size() == 3);
    CHECK(r.abort_reason.find("dt_min") != std::string::npos);
}

TEST_CASE("max_steps stops early")
{
    Simulation sim(short_column());
    RunOptions opt;
    opt.write_outputs = false;
    opt.max_steps = 4;
    CHECK(sim.run(opt).log.size() == 4);
}

TEST_CASE("log table format")
{
    StepLogRow row;
    row.time = 1.5;
    row.dt = 0.5;
    row.n_picard = 3;
    row.residual = 2e-6;
    row.mass_balance_error = 0.01;
    const std::string csv = log_table_csv({row});
    CHECK(csv.rfind("time_s,dt_s,n_picard,residual_m,mass_balance_err\n1.5,0.5,3,", 0) == 0);
}

TEST_CASE("bench with a single thread count")
{
    const CaseConfig cfg = short_column();
    std::ostringstream log;
    const auto rep = cli::bench(cfg, {1}, 5, 3, log);
    REQUIRE(rep.points.size() == 1);
    CHECK(rep.points[0].speedup == 1.0);
    CHECK(rep.points[0].times.size() == 3);
    auto t = rep.points[0].times;
    std::sort(t.begin(), t.end());
    CHECK(rep.points[0].median == t[1]);
    CHECK(rep.steps == 5);
    CHECK(rep.monotone());
    CHECK(rep.deterministic());
    std::ostringstream out;
    cli::print_bench(rep, out);
    CHECK(out.str().find("threads,cells_per_thread,median_s,speedup") != std::string::npos);
}

TEST_CASE("bench results are bit-identical across thread counts")
{
    const CaseConfig cfg = short_column({parse_override("mesh.cells=4 4 100")});
    std::ostringstream log;
    const auto rep = cli::bench(cfg, {4, 1, 2, 2}, 5, 1, log);
    REQUIRE(rep.points.size() == 3);
    CHECK(rep.points[0].threads == 1);
    CHECK(rep.points[2].threads == 4);
    CHECK(rep.deterministic());
}

TEST_CASE("the embedded tutorial equals the shipped file")
{
    CHECK(std::string(cli::embedded_infiltration_case()) == read_text_file(source_path("cases/1Dinfiltration.case")));
}
