#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gwflow/mesh.hpp"

namespace gwflow {

/// One rule of a patch sidecar file. A face matches a plane rule when the
/// centroid coordinate along `axis` is within `tol` of `value`; a "remaining"
/// rule matches anything not claimed by an earlier rule.
struct PatchRule {
    std::string name;
    bool remaining = false;
    int axis = 0;
    double value = 0.0;
    double tol = 0.0;
};

/// Parses "name plane axis=z value=0 tol=1e-6" / "name remaining" lines.
/// '#' starts a comment.
std::vector<PatchRule> parse_patch_rules(std::string_view text);

/// Named scalar cell data keyed by array name, in file order of appearance.
struct CellData {
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> values;
};

struct VtkDataset {
    Mesh mesh;
    CellData cell_data;
};

/// Reads an ASCII legacy VTK unstructured grid (cell types 10, 12, 13). Boundary
/// faces go to the patches described by `rules`; faces no rule claims land in a
/// patch named "boundary". Errors carry the offending line number.
VtkDataset read_vtk_legacy(std::string_view text, const std::vector<PatchRule>& rules = {});

/// Writes an ASCII legacy VTK unstructured grid with optional scalar cell data.
/// Coordinates and values use 17 significant digits.
std::string write_vtk(const Mesh& mesh, const CellData& data = {}, const std::string& title = "gwflow");

} // namespace gwflow
