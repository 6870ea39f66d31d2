#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "gwflow/mesh.hpp"
#include "gwflow/vtk_io.hpp"
#include "test_support.hpp"

using namespace gwflow;

namespace {

// Largest |sum of outward area vectors| over cells, relative to the cell's surface area.
double worst_closure(const Mesh& mesh)
{
    std::vector<Vec3> sum(mesh.n_cells());
    std::vector<double> surface(mesh.n_cells(), 0.0);
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Vec3 s = mesh.face_area_vectors()[f];
        sum[mesh.owner()[f]] += s;
        surface[mesh.owner()[f]] += norm(s);
        if (mesh.is_internal(f)) {
            sum[mesh.neighbour()[f]] -= s;
            surface[mesh.neighbour()[f]] += norm(s);
        }
    }
    double worst = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) worst = std::max(worst, norm(sum[c]) / surface[c]);
    return worst;
}

void check_invariants(const Mesh& mesh)
{
    for (Index f = 0; f < mesh.n_internal_faces(); ++f) CHECK(mesh.owner()[f] < mesh.neighbour()[f]);
    std::vector<int> seen(mesh.n_faces(), 0);
    for (const auto& p : mesh.patches())
        for (Index f : p.faces) {
            CHECK_FALSE(mesh.is_internal(f));
            ++seen[f];
        }
    for (Index f = mesh.n_internal_faces(); f < mesh.n_faces(); ++f) CHECK(seen[f] == 1);
    for (double v : mesh.cell_volumes()) CHECK(v > 0.0);
    CHECK(worst_closure(mesh) < 1e-10);
}

// Face templates for a VTK hexahedron, written out independently of the library.
const std::array<std::array<int, 4>, 6> hex_faces{{
    {0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}}};

// Counts interior/boundary faces of a hex-only cell list by brute-force matching.
std::pair<int, int> count_faces(const std::vector<std::array<int, 8>>& cells)
{
    std::map<std::vector<int>, int> count;
    for (const auto& c : cells)
        for (const auto& t : hex_faces) {
            std::vector<int> key{c[t[0]], c[t[1]], c[t[2]], c[t[3]]};
            std::sort(key.begin(), key.end());
            ++count[key];
        }
    int interior = 0;
    int boundary = 0;
    for (const auto& [k, n] : count) (n == 2 ? interior : boundary) += 1;
    return {interior, boundary};
}

} // namespace

TEST_CASE("cell kinds map to VTK codes 10, 12, 13")
{
    CHECK(vtk_type_code(CellKind::tetrahedron) == 10);
    CHECK(vtk_type_code(CellKind::hexahedron) == 12);
    CHECK(vtk_type_code(CellKind::wedge) == 13);
    for (CellKind k : {CellKind::tetrahedron, CellKind::hexahedron, CellKind::wedge})
        CHECK(cell_kind_from_vtk(vtk_type_code(k)) == k);
    CHECK_THROWS_AS(cell_kind_from_vtk(14), MeshError);
}

TEST_CASE("box mesh: 200-cell column")
{
    const Mesh m = build_box_mesh(1, 1, 200, {{0, 0, -1}, {0.01, 0.01, 0}});
    CHECK(m.n_cells() == 200);
    const double expected = 0.01 * 0.01 * (1.0 / 200.0); // 5e-7 m3
    for (double v : m.cell_volumes()) CHECK(std::abs(v - expected) <= 1e-12 * expected);
    CHECK(m.n_internal_faces() == 199);
    const std::vector<std::string> names{"x-", "x+", "y-", "y+", "z-", "z+"};
    REQUIRE(m.patches().size() == names.size());
    for (std::size_t i = 0; i < names.size(); ++i) CHECK(m.patches()[i].name == names[i]);
    CHECK(m.find_patch("z+")->faces.size() == 1);
    CHECK(m.find_patch("x-")->faces.size() == 200);
    check_invariants(m);
}

TEST_CASE("box mesh: single cell and two cells")
{
    const Mesh one = build_box_mesh(1, 1, 1, {{0, 0, 0}, {1, 1, 1}});
    CHECK(one.n_cells() == 1);
    CHECK(one.n_internal_faces() == 0);
    CHECK(one.n_boundary_faces() == 6);

    const Mesh two = build_box_mesh(2, 1, 1, {{0, 0, 0}, {2, 1, 1}});
    REQUIRE(two.n_internal_faces() == 1);
    CHECK(two.owner()[0] == 0);
    CHECK(two.neighbour()[0] == 1);
    CHECK(norm(two.face_area_vectors()[0]) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(two.face_area_vectors()[0].x > 0.0);
    check_invariants(two);
}

TEST_CASE("box mesh rejects degenerate bounds and zero counts")
{
    CHECK_THROWS_AS(build_box_mesh(1, 1, 1, {{0, 0, 0}, {1, 0, 1}}), MeshError);
    CHECK_THROWS_AS(build_box_mesh(1, 1, 1, {{0, 0, 0}, {-1, 1, 1}}), MeshError);
    CHECK_THROWS_AS(build_box_mesh(0, 1, 1, {{0, 0, 0}, {1, 1, 1}}), MeshError);
}

TEST_CASE("box mesh geometry closes for an anisotropic grid")
{
    const Mesh m = build_box_mesh(3, 4, 5, {{-1, 2, 0.5}, {2, 3, 7}});
    CHECK(m.n_cells() == 60);
    CHECK(m.total_volume() == doctest::Approx(3.0 * 1.0 * 6.5).epsilon(1e-13));
    check_invariants(m);
}

TEST_CASE("VTK: single hexahedron")
{
    const auto ds = read_vtk_legacy(test_data("single_hex.vtk"));
    CHECK(ds.mesh.n_cells() == 1);
    CHECK(ds.mesh.n_boundary_faces() == 6);
    CHECK(ds.mesh.n_internal_faces() == 0);
    REQUIRE(ds.mesh.patches().size() == 1);
    CHECK(ds.mesh.patches()[0].name == "boundary");
    CHECK(ds.mesh.cell_volumes()[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("VTK: two hexahedra share one face")
{
    const auto ds = read_vtk_legacy(test_data("two_hex.vtk"));
    const auto [interior, boundary] = count_faces({{0, 1, 2, 3, 4, 5, 6, 7}, {1, 8, 9, 2, 5, 10, 11, 6}});
    CHECK(interior == 1);
    CHECK(boundary == 10);
    CHECK(ds.mesh.n_internal_faces() == interior);
    CHECK(ds.mesh.n_boundary_faces() == boundary);
    CHECK(ds.mesh.owner()[0] == 0);
    CHECK(ds.mesh.neighbour()[0] == 1);
    check_invariants(ds.mesh);
}

TEST_CASE("VTK: patch sidecar assigns planes and the remainder")
{
    const auto rules = parse_patch_rules(test_data("two_hex.patches"));
    REQUIRE(rules.size() == 3);
    CHECK(rules[0].axis == 0);
    CHECK(rules[2].remaining);
    const auto ds = read_vtk_legacy(test_data("two_hex.vtk"), rules);
    CHECK(ds.mesh.find_patch("inlet")->faces.size() == 1);
    CHECK(ds.mesh.find_patch("outlet")->faces.size() == 1);
    CHECK(ds.mesh.find_patch("walls")->faces.size() == 8);
    CHECK(ds.mesh.find_patch("boundary") == nullptr);
}

TEST_CASE("VTK: bad patch rules are rejected")
{
    CHECK_THROWS(parse_patch_rules("top plane axis=w value=0 tol=1\n"));
    CHECK_THROWS(parse_patch_rules("top plane axis=z\n"));
    CHECK_THROWS(parse_patch_rules("top sphere\n"));
}

TEST_CASE("VTK: unsupported cell type is named")
{
    try {
        read_vtk_legacy(test_data("bad_type.vtk"));
        FAIL("expected an error");
    } catch (const MeshError& e) {
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }
}

TEST_CASE("VTK: malformed counts report the line number")
{
    std::string text = test_data("single_hex.vtk");
    // Drop the last point: CELLS keyword now sits where a coordinate is expected.
    text.replace(text.find("0 1 1\nCELLS"), 6, "");
    try {
        read_vtk_legacy(text);
        FAIL("expected an error");
    } catch (const MeshError& e) {
        CHECK(std::string(e.what()).find("line 13") != std::string::npos);
    }

    std::string bad_size = test_data("single_hex.vtk");
    bad_size.replace(bad_size.find("CELLS 1 9"), 9, "CELLS 1 10");
    try {
        read_vtk_legacy(bad_size);
        FAIL("expected an error");
    } catch (const MeshError& e) {
        CHECK(std::string(e.what()).find("line 14") != std::string::npos);
    }
    CHECK_THROWS_AS(read_vtk_legacy("# vtk DataFile Version 3.0\nx\nBINARY\n"), MeshError);
}

TEST_CASE("VTK round trip reproduces points, connectivity and owner/neighbour exactly")
{
    SurfaceSpec s{3.0, 0.7, 2.0, 3.0};
    const Mesh m = synth_terrain_mesh(4, 3, 2, 2.0, 3.0, s, 1.5);
    CellData data;
    data.names = {"h"};
    data.values["h"] = std::vector<double>(m.n_cells());
    for (Index c = 0; c < m.n_cells(); ++c) data.values["h"][c] = std::sin(0.1 + c) / 3.0;
    const auto back = read_vtk_legacy(write_vtk(m, data));
    const Mesh& r = back.mesh;
    REQUIRE(r.n_points() == m.n_points());
    for (Index i = 0; i < m.n_points(); ++i) CHECK(r.points()[i] == m.points()[i]);
    REQUIRE(r.n_cells() == m.n_cells());
    for (Index c = 0; c < m.n_cells(); ++c) {
        const auto a = m.cell_points(c);
        const auto b = r.cell_points(c);
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
    // Interior faces are ordered by (owner, neighbour) on both sides; boundary
    // faces are grouped by patch, and the reader puts them all in one patch.
    CHECK(r.neighbour() == m.neighbour());
    CHECK(std::equal(m.owner().begin(), m.owner().begin() + m.n_internal_faces(), r.owner().begin()));
    std::multiset<Index> bo_m(m.owner().begin() + m.n_internal_faces(), m.owner().end());
    std::multiset<Index> bo_r(r.owner().begin() + r.n_internal_faces(), r.owner().end());
    CHECK(bo_m == bo_r);
    CHECK(back.cell_data.values.at("h") == data.values["h"]);
}

TEST_CASE("tetrahedra and wedges: topology and closure")
{
    // A unit cube split into two wedges, and a wedge capped by a tetrahedron.
    std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
                          {0.5, 0.5, 2.0}};
    std::vector<CellKind> kinds{CellKind::wedge, CellKind::wedge, CellKind::tetrahedron};
    std::vector<Index> conn{0, 1, 2, 4, 5, 6, 0, 2, 3, 4, 6, 7, 4, 5, 6, 8};
    const Mesh m = Mesh::from_cells(pts, kinds, conn, {"all"}, [](const BoundaryFace&) { return std::size_t{0}; });
    CHECK(m.n_cells() == 3);
    CHECK(m.n_internal_faces() == 2);
    CHECK(m.n_boundary_faces() == 5 + 5 + 4 - 4);
    CHECK(m.cell_volumes()[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.cell_volumes()[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    check_invariants(m);
    const auto back = read_vtk_legacy(write_vtk(m));
    CHECK(back.mesh.owner() == m.owner());
    CHECK(back.mesh.n_boundary_faces() == m.n_boundary_faces());
}

TEST_CASE("refine_uniform: unit cube to 8 cells")
{
    const Mesh m = refine_uniform(build_box_mesh(1, 1, 1, {{0, 0, 0}, {1, 1, 1}}), 1);
    CHECK(m.n_cells() == 8);
    CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.find_patch("z+")->faces.size() == 4);
    check_invariants(m);
}

TEST_CASE("refine_uniform preconditions")
{
    const Mesh box = build_box_mesh(1, 1, 1, {{0, 0, 0}, {1, 1, 1}});
    CHECK_THROWS_AS(refine_uniform(box, 0), MeshError);
    std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const Mesh tet = Mesh::from_cells(pts, {CellKind::tetrahedron}, {0, 1, 2, 3}, {"b"},
                                      [](const BoundaryFace&) { return std::size_t{0}; });
    CHECK_THROWS_AS(refine_uniform(tet, 1), MeshError);
}

TEST_CASE("refine_uniform preserves volume and multiplies cells by 8 per level")
{
    const Mesh coarse = synth_terrain_mesh(3, 2, 2, 30.0, 20.0, SurfaceSpec{10.0, 2.0, 30.0, 20.0}, 5.0);
    for (int levels : {1, 2}) {
        const Mesh fine = refine_uniform(coarse, levels);
        CHECK(fine.n_cells() == coarse.n_cells() * (levels == 1 ? 8 : 64));
        CHECK(std::abs(fine.total_volume() - coarse.total_volume()) <= 1e-10 * coarse.total_volume());
        check_invariants(fine);
        for (std::size_t p = 0; p < coarse.patches().size(); ++p) {
            CHECK(fine.patches()[p].name == coarse.patches()[p].name);
            CHECK(fine.patches()[p].faces.size() == coarse.patches()[p].faces.size() * (levels == 1 ? 4 : 16));
        }
    }
}

TEST_CASE("terrain: flat surface equals the box mesh")
{
    const Mesh t = synth_terrain_mesh(2, 2, 2, 1.0, 1.0, SurfaceSpec{1.0, 0.0, 0.0, 0.0}, 1.0);
    const Mesh b = build_box_mesh(2, 2, 2, {{0, 0, -1}, {1, 1, 1}});
    REQUIRE(t.n_cells() == b.n_cells());
    CHECK(t.neighbour() == b.neighbour());
    CHECK(std::equal(t.owner().begin(), t.owner().begin() + t.n_internal_faces(), b.owner().begin()));
    for (Index c = 0; c < t.n_cells(); ++c) {
        CHECK(norm(t.cell_centroids()[c] - b.cell_centroids()[c]) < 1e-14);
        CHECK(t.cell_volumes()[c] == doctest::Approx(b.cell_volumes()[c]).epsilon(1e-14));
    }
    CHECK(t.find_patch("top")->faces.size() == b.find_patch("z+")->faces.size());
    CHECK(t.find_patch("bottom")->faces.size() == b.find_patch("z-")->faces.size());
}

TEST_CASE("terrain: top faces follow the surface")
{
    const SurfaceSpec s{2.0, 0.5, 4.0, 4.0};
    const double lx = 4.0;
    const double ly = 4.0;
    const Mesh m = synth_terrain_mesh(4, 4, 2, lx, ly, s, 1.0);
    check_invariants(m);
    const Patch* top = m.find_patch("top");
    REQUIRE(top != nullptr);
    REQUIRE(top->faces.size() == 16);
    for (Index f : top->faces) {
        const auto pts = m.face_points(f);
        REQUIRE(pts.size() == 4);
        double mean_x = 0.0;
        double mean_y = 0.0;
        double mean_z = 0.0;
        double mean_f = 0.0;
        for (Index p : pts) {
            const Vec3 x = m.points()[p];
            CHECK(x.z == doctest::Approx(s.height(x.x, x.y)).epsilon(1e-15));
            mean_x += x.x / 4;
            mean_y += x.y / 4;
            mean_z += x.z / 4;
            mean_f += s.height(x.x, x.y) / 4;
        }
        // The face's vertex average sits on the mean of the corner heights.
        CHECK(std::abs(mean_z - mean_f) <= 1e-12);
        CHECK(m.face_area_vectors()[f].z > 0.0);
    }
}

TEST_CASE("terrain: top-face centroids approach the surface at second order")
{
    const SurfaceSpec s{2.0, 0.5, 4.0, 4.0};
    auto worst = [&](Index n) {
        const Mesh m = synth_terrain_mesh(n, n, 1, 4.0, 4.0, s, 1.0);
        double w = 0.0;
        for (Index f : m.find_patch("top")->faces) {
            const Vec3 c = m.face_centroids()[f];
            w = std::max(w, std::abs(c.z - s.height(c.x, c.y)));
        }
        return w;
    };
    const double e8 = worst(8);
    const double e16 = worst(16);
    const double e32 = worst(32);
    CHECK(e32 < 0.005);
    CHECK(e8 / e16 > 3.0);
    CHECK(e16 / e32 > 3.5);
}

TEST_CASE("terrain: 60x120x10 gives 72000 cells")
{
    const Mesh m = synth_terrain_mesh(60, 120, 10, 3000.0, 6000.0, SurfaceSpec{50.0, 20.0, 3000.0, 6000.0}, 50.0);
    CHECK(m.n_cells() == 72000);
    CHECK(worst_closure(m) < 1e-10);
}

TEST_CASE("terrain rejects non-positive heights")
{
    CHECK_THROWS_AS(synth_terrain_mesh(4, 4, 2, 1.0, 1.0, SurfaceSpec{0.5, 1.0, 1.0, 0.0}, 1.0), MeshError);
    CHECK_THROWS_AS(synth_terrain_mesh(2, 2, 2, 1.0, 1.0, SurfaceSpec{0.0, 0.0, 0.0, 0.0}, 1.0), MeshError);
    CHECK_THROWS_AS(synth_terrain_mesh(2, 2, 0, 1.0, 1.0, SurfaceSpec{1.0, 0.0, 0.0, 0.0}, 1.0), MeshError);
}

TEST_CASE("refine_uniform: 72000-cell terrain, two levels")
{
    const Mesh coarse = synth_terrain_mesh(60, 120, 10, 3000.0, 6000.0, SurfaceSpec{50.0, 20.0, 3000.0, 6000.0}, 50.0);
    const Mesh fine = refine_uniform(coarse, 2);
    CHECK(fine.n_cells() == 4608000);
    CHECK(std::abs(fine.total_volume() - coarse.total_volume()) <= 1e-10 * coarse.total_volume());
}
