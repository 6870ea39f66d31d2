#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwflow/constitutive.hpp"
#include "gwflow/fields.hpp"
#include "gwflow/mesh.hpp"
#include "gwflow/richards.hpp"
#include "gwflow/timectl.hpp"

namespace gwflow {

/// Case-file error carrying the offending key and line (0 when not tied to a line).
class CaseError : public std::runtime_error {
public:
    CaseError(const std::string& key, int line, const std::string& message);
    /// Same error with "prefix: " in front of the message (e.g. the file path).
    CaseError(const CaseError& inner, const std::string& prefix);
    std::string key;
    int line = 0;
};

enum class MeshSource { box, vtk, terrain };

struct MeshSpec {
    MeshSource source = MeshSource::box;
    Index nx = 1;
    Index ny = 1;
    Index nz = 1;
    Vec3 lower;
    Vec3 upper{1.0, 1.0, 1.0};
    std::string vtk_file;
    std::string patch_file;   ///< empty: every boundary face in patch "boundary"
    double lx = 1.0;
    double ly = 1.0;
    double depth = 1.0;
    SurfaceSpec surface;
    int refine = 0;

    friend bool operator==(const MeshSpec&, const MeshSpec&) = default;
};

enum class PermeabilitySource { uniform, file, random };

struct PermeabilitySpec {
    PermeabilitySource source = PermeabilitySource::uniform;
    double value = 0.0;   ///< m2
    std::string file;
    double min = 0.0;     ///< m2
    double max = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const PermeabilitySpec&, const PermeabilitySpec&) = default;
};

enum class InitialSource { uniform, file, hydrostatic };

struct InitialSpec {
    InitialSource source = InitialSource::uniform;
    double value = 0.0;   ///< head (m); total head for hydrostatic
    std::string file;

    friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct TimeSpec {
    double end = 0.0;     ///< s
    bool adaptive = true;
    TimeControlConfig control;

    friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct OutputSpec {
    std::vector<double> times; ///< s, strictly increasing
    std::string directory = "output";
    std::string name = "case";
    bool vtk = true;

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Fully validated case, all values SI.
struct CaseConfig {
    MeshSpec mesh;
    FluidProps fluid;
    VanGenuchtenParams vg;
    PermeabilitySpec permeability;
    std::vector<BoundarySpec> bcs;
    InitialSpec initial;
    TimeSpec time;
    PicardConfig picard;
    OutputSpec output;

    friend bool operator==(const CaseConfig&, const CaseConfig&) = default;
};

/// One "section.key=value" override; the value follows case-file syntax.
struct Override {
    std::string section;
    std::string key;
    std::string value;
};

/// Splits "picard.epsilon=1e-7" / "bc.top.value=-0.5 m" at the last dot before '='.
Override parse_override(std::string_view text);

/// Parses the line-oriented case grammar: bracketed sections, "key = value [unit]"
/// lines, '#' comments. Units are converted to SI here and nowhere else.
CaseConfig parse_case(std::string_view text, const std::vector<Override>& overrides = {});

/// Canonical SI text that parse_case reads back to an equal config.
std::string print_case(const CaseConfig& cfg);

/// Reads a case file; relative mesh/field paths are resolved against its directory.
CaseConfig load_case(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

Mesh build_mesh(const CaseConfig& cfg);
std::vector<double> build_permeability(const CaseConfig& cfg, const Mesh& mesh);
std::vector<double> build_initial_head(const CaseConfig& cfg, const Mesh& mesh);
FlowProblem make_problem(const CaseConfig& cfg, const Mesh& mesh);

/// Per-cell uniform samples in [lo, hi] from xoshiro256** seeded by `seed`.
std::vector<double> random_permeability(Index n_cells, double lo, double hi, std::uint64_t seed);

/// "<name>_t<seconds>.vtk". Seconds are zero-padded to 10 digits and printed as
/// an integer when whole, else with a 'p' and six fraction digits
/// ("0000000000p500000"), so names sort lexically in time order.
std::string output_filename(const std::string& case_name, double time);

/// Writes h, theta and K as cell data; returns the file path.
std::filesystem::path write_vtk_output(const Mesh& mesh, std::span<const double> h, std::span<const double> theta,
                                       std::span<const double> permeability, double time,
                                       const std::filesystem::path& directory, const std::string& case_name);

/// Cell values sorted by centroid coordinate along `axis` (0,1,2); cells whose
/// coordinates agree to 1e-9 of the mesh extent are averaged into one row.
std::vector<std::pair<double, double>> extract_profile(const Mesh& mesh, std::span<const double> field, int axis);

/// "coord_m,value" CSV.
std::string profile_csv(const std::vector<std::pair<double, double>>& profile);

/// Reads one value per line ('#' comments allowed).
std::vector<double> read_cell_values(const std::filesystem::path& path, Index expected);

std::string read_text_file(const std::filesystem::path& path);

} // namespace gwflow
