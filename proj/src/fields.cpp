#include "gwflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwflow {

void check_cell_field(const Mesh& mesh, std::span<const double> values, const std::string& name)
{
    if (values.size() != static_cast<std::size_t>(mesh.n_cells()))
        throw std::invalid_argument("field '" + name + "' has " + std::to_string(values.size()) +
                                    " values for " + std::to_string(mesh.n_cells()) + " cells");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("field '" + name + "' is not finite in cell " + std::to_string(i));
}

BoundarySpec BoundarySpec::fixed_head(std::string patch, double head)
{
    BoundarySpec s;
    s.patch = std::move(patch);
    s.kind = BoundaryKind::fixed_head;
    s.head = head;
    return s;
}

BoundarySpec BoundarySpec::fixed_velocity(std::string patch, Vec3 velocity)
{
    BoundarySpec s;
    s.patch = std::move(patch);
    s.kind = BoundaryKind::fixed_velocity;
    s.velocity = velocity;
    if (!std::isfinite(velocity.x) || !std::isfinite(velocity.y) || !std::isfinite(velocity.z))
        throw std::invalid_argument("fixed velocity on patch '" + s.patch + "' is not finite");
    return s;
}

BoundarySpec BoundarySpec::zero_flux(std::string patch)
{
    BoundarySpec s;
    s.patch = std::move(patch);
    s.kind = BoundaryKind::zero_flux;
    return s;
}

std::vector<BoundarySpec> resolve_boundaries(const Mesh& mesh, const std::vector<BoundarySpec>& specs)
{
    std::vector<BoundarySpec> ordered;
    for (const auto& patch : mesh.patches()) {
        const BoundarySpec* found = nullptr;
        for (const auto& s : specs) {
            if (s.patch != patch.name) continue;
            if (found) throw std::invalid_argument("patch '" + patch.name + "' has more than one boundary condition");
            found = &s;
        }
        if (!found) throw std::invalid_argument("patch '" + patch.name + "' has no boundary condition");
        ordered.push_back(*found);
    }
    for (const auto& s : specs)
        if (!mesh.find_patch(s.patch))
            throw std::invalid_argument("boundary condition for unknown patch '" + s.patch + "'");
    return ordered;
}

namespace {

inline void secondary_at(std::size_t i, std::span<const double> h, std::span<const double> k,
                         const VanGenuchtenParams& p, const FluidProps& fluid, SecondaryFields& out)
{
    const double theta = theta_of_h(h[i], p);
    const double kr = kr_of_thetae(effective_saturation(theta, p), p);
    const Mobility mob = mobility(kr, k[i], fluid);
    out.theta[i] = theta;
    out.capacity[i] = capillary_capacity(h[i], p);
    out.kr[i] = kr;
    out.mobility_phase[i] = mob.phase;
    out.mobility[i] = mob.total;
}

void resize_all(SecondaryFields& out, std::size_t n)
{
    out.theta.values.resize(n);
    out.capacity.values.resize(n);
    out.kr.values.resize(n);
    out.mobility_phase.values.resize(n);
    out.mobility.values.resize(n);
}

} // namespace

void update_secondary_fields(std::span<const double> h, std::span<const double> permeability,
                             const VanGenuchtenParams& p, const FluidProps& fluid, SecondaryFields& out)
{
    if (h.size() != permeability.size()) throw std::invalid_argument("head and permeability sizes differ");
    resize_all(out, h.size());
    const auto n = static_cast<std::int64_t>(h.size());
    std::int64_t bad = -1;
#pragma omp parallel for schedule(static) reduction(max : bad)
    for (std::int64_t i = 0; i < n; ++i) {
        if (!std::isfinite(h[i])) {
            bad = std::max(bad, i);
            continue;
        }
        secondary_at(static_cast<std::size_t>(i), h, permeability, p, fluid, out);
    }
    if (bad >= 0) throw std::invalid_argument("head is not finite in cell " + std::to_string(bad));
}

SecondaryFields update_secondary_fields(std::span<const double> h, std::span<const double> permeability,
                                        const VanGenuchtenParams& p, const FluidProps& fluid)
{
    SecondaryFields out;
    update_secondary_fields(h, permeability, p, fluid, out);
    return out;
}

SecondaryFields update_secondary_fields_serial(std::span<const double> h, std::span<const double> permeability,
                                               const VanGenuchtenParams& p, const FluidProps& fluid)
{
    if (h.size() != permeability.size()) throw std::invalid_argument("head and permeability sizes differ");
    SecondaryFields out;
    resize_all(out, h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!std::isfinite(h[i])) throw std::invalid_argument("head is not finite in cell " + std::to_string(i));
        secondary_at(i, h, permeability, p, fluid, out);
    }
    return out;
}

std::vector<double> face_mobility(const Mesh& mesh, std::span<const double> h, std::span<const double> permeability,
                                  std::span<const double> kr, const VanGenuchtenParams& p, const FluidProps& fluid,
                                  MobilityScheme scheme, const std::vector<BoundarySpec>& bcs)
{
    if (bcs.size() != mesh.patches().size()) throw std::invalid_argument("boundary specs not resolved against mesh");
    const double scale = fluid.rho * fluid.g_magnitude() / fluid.mu;
    const auto& owner = mesh.owner();
    const auto& neighbour = mesh.neighbour();
    const auto& centres = mesh.cell_centroids();
    const auto& face_patch = mesh.face_patch();
    const Index n_internal = mesh.n_internal_faces();

    std::vector<double> m(static_cast<std::size_t>(mesh.n_faces()));
#pragma omp parallel for schedule(static)
    for (Index f = 0; f < mesh.n_faces(); ++f) {
        const Index o = owner[f];
        if (f < n_internal) {
            const Index nb = neighbour[f];
            const double k_face = harmonic_mean(permeability[o], permeability[nb]);
            double kr_face = 0.5 * (kr[o] + kr[nb]);
            if (scheme == MobilityScheme::upwind) {
                const double head_o = h[o] + elevation(centres[o], fluid);
                const double head_n = h[nb] + elevation(centres[nb], fluid);
                if (head_o > head_n)
                    kr_face = kr[o];
                else if (head_n > head_o)
                    kr_face = kr[nb];
            }
            m[f] = k_face * kr_face * scale;
        } else {
            const BoundarySpec& bc = bcs[static_cast<std::size_t>(face_patch[f])];
            double kr_face = kr[o];
            if (bc.kind == BoundaryKind::fixed_head) kr_face = kr_of_thetae(effective_saturation(theta_of_h(bc.head, p), p), p);
            m[f] = permeability[o] * kr_face * scale;
        }
    }
    return m;
}

double boundary_head_gradient(const Vec3& velocity, const Vec3& unit_normal, double face_mobility,
                              const FluidProps& fluid)
{
    const double un = dot(velocity, unit_normal);
    const double gn = dot(fluid.g_hat(), unit_normal);
    if (face_mobility <= 0.0) {
        if (un != 0.0) throw std::invalid_argument("cannot impose a non-zero velocity through a face with zero mobility");
        return gn;
    }
    return gn - un / face_mobility;
}

double darcy_normal_flux(double head_gradient, const Vec3& unit_normal, double face_mobility, const FluidProps& fluid)
{
    return -face_mobility * (head_gradient - dot(fluid.g_hat(), unit_normal));
}

} // namespace gwflow
