#include "gwflow/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace gwflow {

namespace {

using FaceTemplate = std::vector<std::vector<int>>;

// Local face loops in VTK point order. Orientation is fixed up against the cell
// centre after construction, so only the cyclic order matters here.
const FaceTemplate& face_template(CellKind kind)
{
    static const FaceTemplate tet{{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
    static const FaceTemplate hex{{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                                  {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
    static const FaceTemplate wedge{{0, 1, 2}, {3, 5, 4}, {0, 3, 4, 1}, {1, 4, 5, 2}, {2, 5, 3, 0}};
    switch (kind) {
    case CellKind::tetrahedron: return tet;
    case CellKind::hexahedron: return hex;
    case CellKind::wedge: return wedge;
    }
    throw MeshError("unknown cell kind");
}

using FaceKey = std::array<Index, 4>;

FaceKey make_key(std::span<const Index> ids)
{
    FaceKey key{-1, -1, -1, -1};
    std::copy(ids.begin(), ids.end(), key.begin());
    std::sort(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(ids.size()));
    return key;
}

// Vector area and centroid of a polygon, triangulated about its point average.
void face_geometry(const std::vector<Vec3>& pts, std::span<const Index> ids, Vec3& centroid, Vec3& area)
{
    const std::size_t n = ids.size();
    if (n == 3) {
        const Vec3& a = pts[ids[0]];
        const Vec3& b = pts[ids[1]];
        const Vec3& c = pts[ids[2]];
        centroid = (a + b + c) / 3.0;
        area = 0.5 * cross(b - a, c - a);
        return;
    }
    Vec3 centre;
    for (Index id : ids) centre += pts[id];
    centre = centre / static_cast<double>(n);

    Vec3 sum_area;
    Vec3 sum_weighted;
    double sum_mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& p = pts[ids[i]];
        const Vec3& q = pts[ids[(i + 1) % n]];
        const Vec3 tri = 0.5 * cross(q - p, centre - p);
        const double mag = norm(tri);
        sum_area += tri;
        sum_weighted += mag * (p + q + centre);
        sum_mag += mag;
    }
    area = sum_area;
    centroid = sum_mag > 0.0 ? sum_weighted / (3.0 * sum_mag) : centre;
}

} // namespace

int vtk_type_code(CellKind kind)
{
    switch (kind) {
    case CellKind::tetrahedron: return 10;
    case CellKind::hexahedron: return 12;
    case CellKind::wedge: return 13;
    }
    return -1;
}

CellKind cell_kind_from_vtk(int code)
{
    switch (code) {
    case 10: return CellKind::tetrahedron;
    case 12: return CellKind::hexahedron;
    case 13: return CellKind::wedge;
    default: throw MeshError("unsupported VTK cell type " + std::to_string(code));
    }
}

int points_per_cell(CellKind kind)
{
    switch (kind) {
    case CellKind::tetrahedron: return 4;
    case CellKind::hexahedron: return 8;
    case CellKind::wedge: return 6;
    }
    return 0;
}

std::span<const Index> Mesh::cell_points(Index cell) const
{
    const auto b = static_cast<std::size_t>(cell_offsets_[cell]);
    const auto e = static_cast<std::size_t>(cell_offsets_[cell + 1]);
    return {cell_point_ids_.data() + b, e - b};
}

std::span<const Index> Mesh::face_points(Index face) const
{
    const auto b = static_cast<std::size_t>(face_offsets_[face]);
    const auto e = static_cast<std::size_t>(face_offsets_[face + 1]);
    return {face_point_ids_.data() + b, e - b};
}

std::span<const Index> Mesh::cell_faces(Index cell) const
{
    const auto b = static_cast<std::size_t>(cell_face_offsets_[cell]);
    const auto e = static_cast<std::size_t>(cell_face_offsets_[cell + 1]);
    return {cell_face_ids_.data() + b, e - b};
}

const Patch* Mesh::find_patch(const std::string& name) const
{
    for (const auto& p : patches_)
        if (p.name == name) return &p;
    return nullptr;
}

double Mesh::total_volume() const
{
    double sum = 0.0;
    for (double v : cell_volumes_) sum += v;
    return sum;
}

Mesh Mesh::from_cells(std::vector<Vec3> points,
                      std::vector<CellKind> kinds,
                      std::vector<Index> cell_points,
                      std::vector<std::string> patch_names,
                      const PatchClassifier& classify,
                      const std::string& drop_if_empty)
{
    Mesh mesh;
    mesh.points_ = std::move(points);
    mesh.kinds_ = std::move(kinds);
    mesh.cell_point_ids_ = std::move(cell_points);

    const auto n_cells = static_cast<Index>(mesh.kinds_.size());
    const auto n_points = static_cast<Index>(mesh.points_.size());
    mesh.cell_offsets_.assign(static_cast<std::size_t>(n_cells) + 1, 0);
    for (Index c = 0; c < n_cells; ++c)
        mesh.cell_offsets_[c + 1] = mesh.cell_offsets_[c] + points_per_cell(mesh.kinds_[c]);
    if (static_cast<std::size_t>(mesh.cell_offsets_.back()) != mesh.cell_point_ids_.size())
        throw MeshError("cell connectivity length does not match cell kinds");
    for (Index id : mesh.cell_point_ids_)
        if (id < 0 || id >= n_points) throw MeshError("cell references point " + std::to_string(id) + " out of range");

    // Local face slots, encoded as cell * 8 + local face.
    auto slot_points = [&](std::int64_t slot, std::vector<Index>& out) {
        const auto cell = static_cast<Index>(slot / 8);
        const auto local = static_cast<std::size_t>(slot % 8);
        const auto cp = mesh.cell_points(cell);
        const auto& loop = face_template(mesh.kinds_[cell])[local];
        out.resize(loop.size());
        for (std::size_t i = 0; i < loop.size(); ++i) out[i] = cp[loop[i]];
    };

    // Bucket every local face by its smallest point id, then match inside buckets.
    std::vector<std::int64_t> bucket_offsets(static_cast<std::size_t>(n_points) + 1, 0);
    std::vector<Index> ids;
    for (Index c = 0; c < n_cells; ++c) {
        const auto& tmpl = face_template(mesh.kinds_[c]);
        for (std::size_t f = 0; f < tmpl.size(); ++f) {
            slot_points(std::int64_t{c} * 8 + static_cast<std::int64_t>(f), ids);
            ++bucket_offsets[*std::min_element(ids.begin(), ids.end()) + 1];
        }
    }
    for (Index p = 0; p < n_points; ++p) bucket_offsets[p + 1] += bucket_offsets[p];
    std::vector<std::int64_t> bucket(static_cast<std::size_t>(bucket_offsets.back()));
    {
        std::vector<std::int64_t> fill(bucket_offsets.begin(), bucket_offsets.end() - 1);
        for (Index c = 0; c < n_cells; ++c) {
            const auto& tmpl = face_template(mesh.kinds_[c]);
            for (std::size_t f = 0; f < tmpl.size(); ++f) {
                const std::int64_t slot = std::int64_t{c} * 8 + static_cast<std::int64_t>(f);
                slot_points(slot, ids);
                bucket[fill[*std::min_element(ids.begin(), ids.end())]++] = slot;
            }
        }
    }

    struct InternalPair {
        std::int64_t owner_slot;
        Index neighbour;
    };
    std::vector<InternalPair> internal;
    std::vector<std::int64_t> boundary;
    {
        std::vector<FaceKey> keys;
        std::vector<char> matched;
        for (Index p = 0; p < n_points; ++p) {
            const auto b = bucket_offsets[p];
            const auto e = bucket_offsets[p + 1];
            keys.clear();
            for (auto i = b; i < e; ++i) {
                slot_points(bucket[i], ids);
                keys.push_back(make_key(ids));
            }
            matched.assign(static_cast<std::size_t>(e - b), 0);
            for (auto i = b; i < e; ++i) {
                const auto li = static_cast<std::size_t>(i - b);
                if (matched[li]) continue;
                for (auto j = i + 1; j < e; ++j) {
                    const auto lj = static_cast<std::size_t>(j - b);
                    if (keys[li] != keys[lj]) continue;
                    if (matched[lj]) throw MeshError("face shared by more than two cells");
                    const auto ci = static_cast<Index>(bucket[i] / 8);
                    const auto cj = static_cast<Index>(bucket[j] / 8);
                    if (ci == cj) throw MeshError("cell " + std::to_string(ci) + " has a repeated face");
                    matched[li] = matched[lj] = 1;
                    if (ci < cj)
                        internal.push_back({bucket[i], cj});
                    else
                        internal.push_back({bucket[j], ci});
                    for (auto k = j + 1; k < e; ++k)
                        if (keys[li] == keys[static_cast<std::size_t>(k - b)])
                            throw MeshError("face shared by more than two cells");
                    break;
                }
                if (!matched[li]) boundary.push_back(bucket[i]);
            }
        }
    }

    std::sort(internal.begin(), internal.end(), [](const InternalPair& a, const InternalPair& b) {
        const auto oa = a.owner_slot / 8;
        const auto ob = b.owner_slot / 8;
        if (oa != ob) return oa < ob;
        if (a.neighbour != b.neighbour) return a.neighbour < b.neighbour;
        return a.owner_slot < b.owner_slot;
    });
    std::sort(boundary.begin(), boundary.end());

    // Estimated cell centres (point averages) used to orient faces outward.
    std::vector<Vec3> point_avg(static_cast<std::size_t>(n_cells));
    for (Index c = 0; c < n_cells; ++c) {
        Vec3 s;
        const auto cp = mesh.cell_points(c);
        for (Index id : cp) s += mesh.points_[id];
        point_avg[c] = s / static_cast<double>(cp.size());
    }

    const std::size_t n_faces = internal.size() + boundary.size();
    mesh.face_offsets_.reserve(n_faces + 1);
    mesh.face_offsets_.push_back(0);
    mesh.owner_.reserve(n_faces);
    mesh.face_centroids_.reserve(n_faces);
    mesh.face_areas_.reserve(n_faces);

    auto emit_face = [&](std::int64_t slot) {
        const auto cell = static_cast<Index>(slot / 8);
        slot_points(slot, ids);
        Vec3 centroid;
        Vec3 area;
        face_geometry(mesh.points_, ids, centroid, area);
        if (dot(area, centroid - point_avg[cell]) < 0.0) {
            std::reverse(ids.begin() + 1, ids.end());
            area = -area;
        }
        mesh.face_point_ids_.insert(mesh.face_point_ids_.end(), ids.begin(), ids.end());
        mesh.face_offsets_.push_back(static_cast<Index>(mesh.face_point_ids_.size()));
        mesh.owner_.push_back(cell);
        mesh.face_centroids_.push_back(centroid);
        mesh.face_areas_.push_back(area);
    };

    mesh.neighbour_.reserve(internal.size());
    for (const auto& pair : internal) {
        emit_face(pair.owner_slot);
        mesh.neighbour_.push_back(pair.neighbour);
    }

    // Classify boundary faces, then emit them grouped by patch.
    std::vector<std::vector<std::int64_t>> per_patch(patch_names.size());
    for (std::int64_t slot : boundary) {
        const auto cell = static_cast<Index>(slot / 8);
        slot_points(slot, ids);
        Vec3 centroid;
        Vec3 area;
        face_geometry(mesh.points_, ids, centroid, area);
        if (dot(area, centroid - point_avg[cell]) < 0.0) {
            std::reverse(ids.begin() + 1, ids.end());
            area = -area;
        }
        const std::size_t patch = classify(BoundaryFace{ids, centroid, area});
        if (patch >= patch_names.size()) throw MeshError("patch classifier returned an invalid patch index");
        per_patch[patch].push_back(slot);
    }
    mesh.face_patch_.assign(internal.size(), -1);
    for (std::size_t p = 0; p < patch_names.size(); ++p) {
        Patch patch{patch_names[p], {}};
        patch.faces.reserve(per_patch[p].size());
        for (std::int64_t slot : per_patch[p]) {
            patch.faces.push_back(static_cast<Index>(mesh.owner_.size()));
            mesh.face_patch_.push_back(static_cast<Index>(p));
            emit_face(slot);
        }
        mesh.patches_.push_back(std::move(patch));
    }
    if (!drop_if_empty.empty() && !mesh.patches_.empty() && mesh.patches_.back().faces.empty() &&
        mesh.patches_.back().name == drop_if_empty)
        mesh.patches_.pop_back();

    // Cell -> face adjacency.
    const auto nf = static_cast<Index>(mesh.owner_.size());
    mesh.cell_face_offsets_.assign(static_cast<std::size_t>(n_cells) + 1, 0);
    for (Index f = 0; f < nf; ++f) {
        ++mesh.cell_face_offsets_[mesh.owner_[f] + 1];
        if (f < mesh.n_internal_faces()) ++mesh.cell_face_offsets_[mesh.neighbour_[f] + 1];
    }
    for (Index c = 0; c < n_cells; ++c) mesh.cell_face_offsets_[c + 1] += mesh.cell_face_offsets_[c];
    mesh.cell_face_ids_.resize(static_cast<std::size_t>(mesh.cell_face_offsets_.back()));
    {
        std::vector<Index> fill(mesh.cell_face_offsets_.begin(), mesh.cell_face_offsets_.end() - 1);
        for (Index f = 0; f < nf; ++f) {
            mesh.cell_face_ids_[fill[mesh.owner_[f]]++] = f;
            if (f < mesh.n_internal_faces()) mesh.cell_face_ids_[fill[mesh.neighbour_[f]]++] = f;
        }
        for (Index c = 0; c < n_cells; ++c)
            std::sort(mesh.cell_face_ids_.begin() + mesh.cell_face_offsets_[c],
                      mesh.cell_face_ids_.begin() + mesh.cell_face_offsets_[c + 1]);
    }

    // Cell volumes and centroids by pyramid decomposition about the face-centroid average.
    mesh.cell_volumes_.assign(static_cast<std::size_t>(n_cells), 0.0);
    mesh.cell_centroids_.assign(static_cast<std::size_t>(n_cells), Vec3{});
    for (Index c = 0; c < n_cells; ++c) {
        const auto faces = mesh.cell_faces(c);
        Vec3 estimate;
        for (Index f : faces) estimate += mesh.face_centroids_[f];
        estimate = estimate / static_cast<double>(faces.size());

        double volume = 0.0;
        Vec3 weighted;
        for (Index f : faces) {
            const Vec3 s = mesh.owner_[f] == c ? mesh.face_areas_[f] : -mesh.face_areas_[f];
            const double pyr = dot(s, mesh.face_centroids_[f] - estimate) / 3.0;
            volume += pyr;
            weighted += pyr * (0.75 * mesh.face_centroids_[f] + 0.25 * estimate);
        }
        if (!(volume > 0.0)) throw MeshError("cell " + std::to_string(c) + " has non-positive volume");
        mesh.cell_volumes_[c] = volume;
        mesh.cell_centroids_[c] = weighted / volume;
    }
    return mesh;
}

Mesh build_box_mesh(Index nx, Index ny, Index nz, const Bounds& bounds)
{
    if (nx < 1 || ny < 1 || nz < 1) throw MeshError("box mesh needs at least one cell per axis");
    for (int a = 0; a < 3; ++a) {
        if (!(bounds.hi[a] > bounds.lo[a]))
            throw MeshError(std::string("degenerate box bounds on axis ") + "xyz"[a] + ": lo=" +
                            std::to_string(bounds.lo[a]) + " hi=" + std::to_string(bounds.hi[a]));
    }
    const std::array<Index, 3> n{nx, ny, nz};
    auto coord = [&](int axis, Index i) {
        if (i == n[axis]) return bounds.hi[axis];
        return bounds.lo[axis] + (bounds.hi[axis] - bounds.lo[axis]) * static_cast<double>(i) / n[axis];
    };

    std::vector<Vec3> points;
    points.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
    for (Index k = 0; k <= nz; ++k)
        for (Index j = 0; j <= ny; ++j)
            for (Index i = 0; i <= nx; ++i) points.push_back({coord(0, i), coord(1, j), coord(2, k)});
    auto pid = [&](Index i, Index j, Index k) { return i + (nx + 1) * (j + (ny + 1) * k); };

    std::vector<CellKind> kinds(static_cast<std::size_t>(nx) * ny * nz, CellKind::hexahedron);
    std::vector<Index> conn;
    conn.reserve(kinds.size() * 8);
    for (Index k = 0; k < nz; ++k)
        for (Index j = 0; j < ny; ++j)
            for (Index i = 0; i < nx; ++i) {
                conn.insert(conn.end(), {pid(i, j, k), pid(i + 1, j, k), pid(i + 1, j + 1, k), pid(i, j + 1, k),
                                         pid(i, j, k + 1), pid(i + 1, j, k + 1), pid(i + 1, j + 1, k + 1),
                                         pid(i, j + 1, k + 1)});
            }

    const Vec3 extent = bounds.hi - bounds.lo;
    auto classify = [&](const BoundaryFace& face) -> std::size_t {
        // Pick the axis the face normal points along; the sign gives -/+.
        const Vec3& s = face.area;
        int axis = 0;
        if (std::abs(s.y) > std::abs(s[axis])) axis = 1;
        if (std::abs(s.z) > std::abs(s[axis])) axis = 2;
        const double mid = bounds.lo[axis] + 0.5 * extent[axis];
        return static_cast<std::size_t>(2 * axis + (face.centroid[axis] > mid ? 1 : 0));
    };
    return Mesh::from_cells(std::move(points), std::move(kinds), std::move(conn),
                            {"x-", "x+", "y-", "y+", "z-", "z+"}, classify);
}

Mesh refine_uniform(const Mesh& mesh, int levels)
{
    if (levels < 1) throw MeshError("refine_uniform needs levels >= 1");
    for (CellKind k : mesh.cell_kinds())
        if (k != CellKind::hexahedron) throw MeshError("refine_uniform supports hexahedral meshes only");

    Mesh current = mesh;
    for (int level = 0; level < levels; ++level) {
        const Mesh& parent = current;
        // Lattice points are identified by the parent points they average.
        struct KeyHash {
            std::size_t operator()(const FaceKey& k) const
            {
                std::size_t h = 1469598103934665603ull;
                for (Index v : k) h = (h ^ static_cast<std::size_t>(static_cast<std::uint32_t>(v))) * 1099511628211ull;
                return h;
            }
        };
        std::unordered_map<FaceKey, Index, KeyHash> lattice_ids;
        lattice_ids.reserve(static_cast<std::size_t>(parent.n_points()) * 8);
        std::vector<Vec3> points = parent.points();
        const auto& pp = parent.points();

        auto lattice_point = [&](std::initializer_list<Index> parents) -> Index {
            if (parents.size() == 1) return *parents.begin();
            FaceKey key{-1, -1, -1, -1};
            std::copy(parents.begin(), parents.end(), key.begin());
            std::sort(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(parents.size()));
            auto [it, inserted] = lattice_ids.try_emplace(key, static_cast<Index>(points.size()));
            if (inserted) {
                Vec3 s;
                for (std::size_t i = 0; i < parents.size(); ++i) s += pp[key[i]];
                points.push_back(s / static_cast<double>(parents.size()));
            }
            return it->second;
        };

        std::vector<CellKind> kinds(static_cast<std::size_t>(parent.n_cells()) * 8, CellKind::hexahedron);
        std::vector<Index> conn;
        conn.reserve(kinds.size() * 8);
        std::vector<Index> cell_centres(static_cast<std::size_t>(parent.n_cells()));

        // Child boundary faces by sorted key -> patch of the parent face they lie on.
        std::unordered_map<FaceKey, std::size_t, KeyHash> child_patch;
        std::unordered_map<FaceKey, std::size_t, KeyHash> parent_boundary;
        for (std::size_t p = 0; p < parent.patches().size(); ++p)
            for (Index f : parent.patches()[p].faces) parent_boundary.emplace(make_key(parent.face_points(f)), p);

        for (Index c = 0; c < parent.n_cells(); ++c) {
            const auto v = parent.cell_points(c);
            // Lattice index (i,j,k) in {0,1,2}^3 -> point id.
            std::array<Index, 27> L{};
            auto at = [&](int i, int j, int k) -> Index& { return L[static_cast<std::size_t>(i + 3 * (j + 3 * k))]; };
            // Corner (i,j,k) in {0,1}^3 -> VTK local id.
            auto corner = [&](int i, int j, int k) -> Index {
                static constexpr int local[2][2][2] = {{{0, 4}, {3, 7}}, {{1, 5}, {2, 6}}};
                return v[local[i][j][k]];
            };
            for (int k = 0; k < 3; ++k)
                for (int j = 0; j < 3; ++j)
                    for (int i = 0; i < 3; ++i) {
                        std::vector<Index> src;
                        for (int ci = (i == 2 ? 1 : 0); ci <= (i == 0 ? 0 : 1); ++ci)
                            for (int cj = (j == 2 ? 1 : 0); cj <= (j == 0 ? 0 : 1); ++cj)
                                for (int ck = (k == 2 ? 1 : 0); ck <= (k == 0 ? 0 : 1); ++ck)
                                    src.push_back(corner(ci, cj, ck));
                        if (src.size() == 8) {
                            // Cell centre is unique to this parent.
                            Vec3 s;
                            for (Index id : src) s += pp[id];
                            cell_centres[c] = static_cast<Index>(points.size());
                            points.push_back(s / 8.0);
                            at(i, j, k) = cell_centres[c];
                        } else if (src.size() == 4) {
                            at(i, j, k) = lattice_point({src[0], src[1], src[2], src[3]});
                        } else if (src.size() == 2) {
                            at(i, j, k) = lattice_point({src[0], src[1]});
                        } else {
                            at(i, j, k) = src[0];
                        }
                    }
            for (int ck = 0; ck < 2; ++ck)
                for (int cj = 0; cj < 2; ++cj)
                    for (int ci = 0; ci < 2; ++ci)
                        conn.insert(conn.end(), {at(ci, cj, ck), at(ci + 1, cj, ck), at(ci + 1, cj + 1, ck),
                                                 at(ci, cj + 1, ck), at(ci, cj, ck + 1), at(ci + 1, cj, ck + 1),
                                                 at(ci + 1, cj + 1, ck + 1), at(ci, cj + 1, ck + 1)});

            // Parent faces in lattice terms: fixed axis and side.
            for (int axis = 0; axis < 3; ++axis)
                for (int side = 0; side < 2; ++side) {
                    const int fixed = side * 2;
                    auto lat = [&](int a, int b) -> Index {
                        if (axis == 0) return at(fixed, a, b);
                        if (axis == 1) return at(a, fixed, b);
                        return at(a, b, fixed);
                    };
                    const Index parent_ids[4] = {lat(0, 0), lat(2, 0), lat(2, 2), lat(0, 2)};
                    const auto hit = parent_boundary.find(make_key(parent_ids));
                    if (hit == parent_boundary.end()) continue;
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            const Index child_ids[4] = {lat(a, b), lat(a + 1, b), lat(a + 1, b + 1), lat(a, b + 1)};
                            child_patch.emplace(make_key(child_ids), hit->second);
                        }
                }
        }

        std::vector<std::string> names;
        for (const auto& p : parent.patches()) names.push_back(p.name);
        auto classify = [&](const BoundaryFace& face) -> std::size_t {
            const auto it = child_patch.find(make_key(face.points));
            if (it == child_patch.end()) throw MeshError("refined boundary face has no parent patch");
            return it->second;
        };
        current = Mesh::from_cells(std::move(points), std::move(kinds), std::move(conn), std::move(names), classify);
    }
    return current;
}

double SurfaceSpec::height(double x, double y) const
{
    double shape = amplitude;
    if (wavelength_x > 0.0) shape *= std::sin(2.0 * std::numbers::pi * x / wavelength_x);
    if (wavelength_y > 0.0) shape *= std::cos(2.0 * std::numbers::pi * y / wavelength_y);
    return mean + shape;
}

Mesh synth_terrain_mesh(Index nx, Index ny, Index nz, double lx, double ly,
                        const SurfaceSpec& surface, double depth)
{
    if (nx < 1 || ny < 1 || nz < 1) throw MeshError("terrain mesh needs at least one cell per axis");
    if (!(lx > 0.0) || !(ly > 0.0)) throw MeshError("terrain mesh needs positive horizontal extent");
    if (!(depth > 0.0)) throw MeshError("terrain mesh needs positive depth");

    auto coord = [](double len, Index i, Index n) { return i == n ? len : len * static_cast<double>(i) / n; };
    const double base = -depth;

    std::vector<Vec3> points;
    points.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
    for (Index k = 0; k <= nz; ++k)
        for (Index j = 0; j <= ny; ++j)
            for (Index i = 0; i <= nx; ++i) {
                const double x = coord(lx, i, nx);
                const double y = coord(ly, j, ny);
                const double top = surface.height(x, y);
                if (!(top > 0.0))
                    throw MeshError("terrain surface height must be positive, got " + std::to_string(top) +
                                    " at x=" + std::to_string(x) + " y=" + std::to_string(y));
                const double z = k == nz ? top : base + (top - base) * static_cast<double>(k) / nz;
                points.push_back({x, y, z});
            }
    auto pid = [&](Index i, Index j, Index k) { return i + (nx + 1) * (j + (ny + 1) * k); };

    std::vector<CellKind> kinds(static_cast<std::size_t>(nx) * ny * nz, CellKind::hexahedron);
    std::vector<Index> conn;
    conn.reserve(kinds.size() * 8);
    for (Index k = 0; k < nz; ++k)
        for (Index j = 0; j < ny; ++j)
            for (Index i = 0; i < nx; ++i)
                conn.insert(conn.end(), {pid(i, j, k), pid(i + 1, j, k), pid(i + 1, j + 1, k), pid(i, j + 1, k),
                                         pid(i, j, k + 1), pid(i + 1, j, k + 1), pid(i + 1, j + 1, k + 1),
                                         pid(i, j + 1, k + 1)});

    // Top faces are recognised by their points all sitting on the top layer.
    const Index top_first = pid(0, 0, nz);
    auto classify = [&](const BoundaryFace& face) -> std::size_t {
        bool all_top = true;
        bool all_bottom = true;
        for (Index id : face.points) {
            all_top = all_top && id >= top_first;
            all_bottom = all_bottom && id < pid(0, 0, 1);
        }
        if (all_top) return 1;
        if (all_bottom) return 0;
        const Vec3& s = face.area;
        const int axis = std::abs(s.x) >= std::abs(s.y) ? 0 : 1;
        const double mid = 0.5 * (axis == 0 ? lx : ly);
        return static_cast<std::size_t>(2 + 2 * axis + (face.centroid[axis] > mid ? 1 : 0));
    };
    return Mesh::from_cells(std::move(points), std::move(kinds), std::move(conn),
                            {"bottom", "top", "x-", "x+", "y-", "y+"}, classify);
}

} // namespace gwflow
