#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gwflow/kernels.hpp"
#include "gwflow/simulation.hpp"
#include "gwflow/vtk_io.hpp"

using namespace gwflow;

namespace {

int default_threads()
{
    if (const char* env = std::getenv("GWFLOW_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring GWFLOW_THREADS='" << env << "'\n";
    }
    return hardware_threads();
}

std::vector<Override> parse_overrides(const std::vector<std::string>& sets)
{
    std::vector<Override> out;
    for (const auto& s : sets) out.push_back(parse_override(s));
    return out;
}

void print_mesh_summary(const Mesh& mesh, std::ostream& out)
{
    out << mesh.n_cells() << " cells, ";
    if (mesh.n_internal_faces() > 0)
        out << mesh.n_internal_faces() << " interior face" << (mesh.n_internal_faces() == 1 ? "" : "s") << ", ";
    out << mesh.n_boundary_faces() << " boundary faces\n";
    for (const auto& p : mesh.patches()) {
        double area = 0.0;
        for (Index f : p.faces) area += norm(mesh.face_area_vectors()[f]);
        out << "  patch " << p.name << ": " << p.faces.size() << " faces, area " << area << " m2\n";
    }
}

Mesh load_any_mesh(const std::string& path, const std::string& patch_file, const std::vector<Override>& sets)
{
    if (path.size() > 4 && path.substr(path.size() - 4) == ".vtk") {
        std::vector<PatchRule> rules;
        if (!patch_file.empty()) rules = parse_patch_rules(read_text_file(patch_file));
        return read_vtk_legacy(read_text_file(path), rules).mesh;
    }
    return build_mesh(load_case(path, sets));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gwflow: variably saturated groundwater flow (head-based Richards equation)"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a case");
    std::string run_case;
    int run_threads = 0;
    std::string run_output;
    std::vector<std::string> run_sets;
    bool quiet = false;
    run->add_option("case", run_case, "case file")->required()->check(CLI::ExistingFile);
    run->add_option("--threads", run_threads, "thread count (default: GWFLOW_THREADS or hardware)");
    run->add_option("--output", run_output, "output directory (overrides [output] directory)");
    run->add_option("--set", run_sets, "override, e.g. picard.epsilon=1e-7")->take_all();
    run->add_flag("--quiet,-q", quiet, "no per-step progress");

    // validate
    auto* val = app.add_subcommand("validate", "check golden values and the reference oracle");
    double perturb_alpha = 1.0;
    val->add_option("--perturb-alpha", perturb_alpha, "scale alpha by this factor (negative control)");

    // bench
    auto* bench = app.add_subcommand("bench", "strong-scaling timing over thread counts");
    std::string bench_case;
    std::vector<int> bench_threads;
    int steps = 50;
    int repeats = 3;
    std::vector<std::string> bench_sets;
    bench->add_option("case", bench_case, "case file")->required()->check(CLI::ExistingFile);
    bench->add_option("--threads", bench_threads, "comma-separated thread counts")->delimiter(',');
    bench->add_option("--steps", steps, "time steps per run")->check(CLI::PositiveNumber);
    bench->add_option("--repeats", repeats, "runs per thread count (median reported)")->check(CLI::PositiveNumber);
    bench->add_option("--set", bench_sets, "case override")->take_all();

    // convert-vtk
    auto* conv = app.add_subcommand("convert-vtk", "re-emit a legacy VTK mesh with patch assignment");
    std::string conv_in;
    std::string conv_patches;
    std::string conv_out;
    conv->add_option("input", conv_in, "legacy VTK file")->required()->check(CLI::ExistingFile);
    conv->add_option("--patches", conv_patches, "patch sidecar file")->check(CLI::ExistingFile);
    conv->add_option("--output,-o", conv_out, "output VTK path");

    // mesh-info
    auto* info = app.add_subcommand("mesh-info", "print mesh statistics for a case or VTK file");
    std::string info_in;
    std::string info_patches;
    std::vector<std::string> info_sets;
    info->add_option("input", info_in, "case file or .vtk")->required()->check(CLI::ExistingFile);
    info->add_option("--patches", info_patches, "patch sidecar for .vtk input")->check(CLI::ExistingFile);
    info->add_option("--set", info_sets, "case override")->take_all();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            set_thread_count(run_threads > 0 ? run_threads : default_threads());
            const CaseConfig cfg = load_case(run_case, parse_overrides(run_sets));
            Simulation sim(cfg);
            std::cout << "case " << cfg.output.name << ": " << sim.mesh().n_cells() << " cells, " << thread_count()
                      << " threads\n";
            RunOptions opts;
            if (!run_output.empty()) opts.output_dir = run_output;
            if (!quiet) {
                opts.on_step = [](const StepLogRow& r) {
                    std::cout << "t = " << r.time << " s  dt = " << r.dt << " s  picard " << r.n_picard << "  r = "
                              << r.residual << (r.warned ? "  WARNING: hard cap reached, solution accepted" : "")
                              << '\n';
                };
            }
            const RunResult res = sim.run(opts);
            std::cout << res.log.size() << " steps, t = " << res.time << " s, " << res.warnings
                      << " hard-cap warnings, cumulative mass balance error " << res.cumulative_mass_balance_error()
                      << '\n';
            for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
            if (res.aborted) {
                std::cerr << "error: run aborted: " << res.abort_reason << '\n';
                return 2;
            }
            return 0;
        }
        if (*val) {
            set_thread_count(default_threads());
            const auto lines = cli::validate(perturb_alpha, std::cout);
            bool ok = true;
            for (const auto& l : lines) ok = ok && l.pass;
            std::cout << (ok ? "validate: PASS" : "validate: FAIL") << '\n';
            return ok ? 0 : 1;
        }
        if (*bench) {
            if (bench_threads.empty()) bench_threads = {1, 2, 4};
            const CaseConfig cfg = load_case(bench_case, parse_overrides(bench_sets));
            const auto report = cli::bench(cfg, bench_threads, steps, repeats, std::cerr);
            cli::print_bench(report, std::cout);
            return 0;
        }
        if (*conv) {
            std::vector<PatchRule> rules;
            if (!conv_patches.empty()) rules = parse_patch_rules(read_text_file(conv_patches));
            const VtkDataset data = read_vtk_legacy(read_text_file(conv_in), rules);
            print_mesh_summary(data.mesh, std::cout);
            if (!conv_out.empty()) {
                std::ofstream out(conv_out);
                if (!out) throw std::runtime_error("cannot write '" + conv_out + "'");
                out << write_vtk(data.mesh, data.cell_data, "gwflow convert-vtk");
                const std::string side = conv_out + ".patches.csv";
                std::ofstream pf(side);
                if (!pf) throw std::runtime_error("cannot write '" + side + "'");
                pf << "face,patch,cx,cy,cz\n";
                const auto& mesh = data.mesh;
                for (const auto& p : mesh.patches())
                    for (Index f : p.faces) {
                        const Vec3 c = mesh.face_centroids()[f];
                        pf << f << ',' << p.name << ',' << c.x << ',' << c.y << ',' << c.z << '\n';
                    }
                std::cout << "wrote " << conv_out << " and " << side << '\n';
            }
            return 0;
        }
        if (*info) {
            const Mesh mesh = load_any_mesh(info_in, info_patches, parse_overrides(info_sets));
            print_mesh_summary(mesh, std::cout);
            Vec3 lo = mesh.cell_centroids().empty() ? Vec3{} : mesh.cell_centroids()[0];
            Vec3 hi = lo;
            for (const auto& c : mesh.cell_centroids())
                for (int a = 0; a < 3; ++a) {
                    lo[a] = std::min(lo[a], c[a]);
                    hi[a] = std::max(hi[a], c[a]);
                }
            std::cout << "total volume " << mesh.total_volume() << " m3\n";
            std::cout << "cell centres within [" << lo.x << ", " << lo.y << ", " << lo.z << "] - [" << hi.x << ", "
                      << hi.y << ", " << hi.z << "]\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
