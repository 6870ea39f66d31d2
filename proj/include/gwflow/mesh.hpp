#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwflow/vec3.hpp"

namespace gwflow {

using Index = std::int32_t;

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CellKind : std::uint8_t { tetrahedron, hexahedron, wedge };

/// VTK cell type codes: 10 (tetra), 12 (hexahedron), 13 (wedge).
int vtk_type_code(CellKind kind);
CellKind cell_kind_from_vtk(int code);
int points_per_cell(CellKind kind);

struct Patch {
    std::string name;
    std::vector<Index> faces;
};

/// A boundary face handed to a patch classifier while a mesh is being built.
struct BoundaryFace {
    std::span<const Index> points; ///< oriented outward from the owner cell
    Vec3 centroid;
    Vec3 area;
};

/// Returns the index into the builder's patch-name list for a boundary face.
using PatchClassifier = std::function<std::size_t(const BoundaryFace&)>;

/// Face-addressed finite-volume mesh.
///
/// Interior faces come first, ordered by (owner, neighbour) with owner < neighbour.
/// Boundary faces follow, grouped by patch. Face area vectors point out of the
/// owner cell. Immutable once built.
class Mesh {
public:
    Mesh() = default;

    /// Builds topology and geometry from a cell list. Faces are matched between
    /// cells by their sorted point-id sets; unmatched faces are boundary faces and
    /// are sorted into patches by `classify`. Patches that end up empty are kept,
    /// except a trailing one named `drop_if_empty`.
    static Mesh from_cells(std::vector<Vec3> points,
                           std::vector<CellKind> kinds,
                           std::vector<Index> cell_points,
                           std::vector<std::string> patch_names,
                           const PatchClassifier& classify,
                           const std::string& drop_if_empty = {});

    Index n_points() const { return static_cast<Index>(points_.size()); }
    Index n_cells() const { return static_cast<Index>(kinds_.size()); }
    Index n_faces() const { return static_cast<Index>(owner_.size()); }
    Index n_internal_faces() const { return static_cast<Index>(neighbour_.size()); }
    Index n_boundary_faces() const { return n_faces() - n_internal_faces(); }

    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<CellKind>& cell_kinds() const { return kinds_; }
    std::span<const Index> cell_points(Index cell) const;
    std::span<const Index> face_points(Index face) const;
    /// Faces bounding a cell, ascending face index.
    std::span<const Index> cell_faces(Index cell) const;

    const std::vector<Index>& owner() const { return owner_; }
    const std::vector<Index>& neighbour() const { return neighbour_; }
    const std::vector<Patch>& patches() const { return patches_; }
    /// Patch index per face; -1 for interior faces.
    const std::vector<Index>& face_patch() const { return face_patch_; }
    const Patch* find_patch(const std::string& name) const;

    const std::vector<Vec3>& cell_centroids() const { return cell_centroids_; }
    const std::vector<double>& cell_volumes() const { return cell_volumes_; }
    const std::vector<Vec3>& face_centroids() const { return face_centroids_; }
    const std::vector<Vec3>& face_area_vectors() const { return face_areas_; }

    bool is_internal(Index face) const { return face < n_internal_faces(); }
    double total_volume() const;

private:
    std::vector<Vec3> points_;
    std::vector<CellKind> kinds_;
    std::vector<Index> cell_offsets_;
    std::vector<Index> cell_point_ids_;

    std::vector<Index> face_offsets_;
    std::vector<Index> face_point_ids_;
    std::vector<Index> owner_;
    std::vector<Index> neighbour_;
    std::vector<Patch> patches_;
    std::vector<Index> face_patch_;

    std::vector<Index> cell_face_offsets_;
    std::vector<Index> cell_face_ids_;

    std::vector<Vec3> cell_centroids_;
    std::vector<double> cell_volumes_;
    std::vector<Vec3> face_centroids_;
    std::vector<Vec3> face_areas_;
};

struct Bounds {
    Vec3 lo;
    Vec3 hi;
};

/// Axis-aligned hexahedral box with patches x-, x+, y-, y+, z-, z+.
Mesh build_box_mesh(Index nx, Index ny, Index nz, const Bounds& bounds);

/// Splits every hexahedron 2x2x2 per level. Boundary faces inherit the parent's patch.
Mesh refine_uniform(const Mesh& mesh, int levels);

/// Ground surface used by the synthetic terrain generator. Elevation is
/// mean + amplitude * sin(2 pi x / wavelength_x) * cos(2 pi y / wavelength_y);
/// a zero wavelength drops that factor.
struct SurfaceSpec {
    double mean = 1.0;
    double amplitude = 0.0;
    double wavelength_x = 0.0;
    double wavelength_y = 0.0;

    double height(double x, double y) const;
    friend bool operator==(const SurfaceSpec&, const SurfaceSpec&) = default;
};

/// Columns over [0, lx] x [0, ly] graded uniformly from the base plane z = -depth
/// up to the surface. Patches: bottom, top, x-, x+, y-, y+.
Mesh synth_terrain_mesh(Index nx, Index ny, Index nz, double lx, double ly,
                        const SurfaceSpec& surface, double depth);

} // namespace gwflow
