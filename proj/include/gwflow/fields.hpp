#pragma once

#include <span>
#include <string>
#include <vector>

#include "gwflow/constitutive.hpp"
#include "gwflow/mesh.hpp"

namespace gwflow {

/// Named per-cell scalar field.
struct CellField {
    std::string name;
    std::vector<double> values;

    CellField() = default;
    CellField(std::string n, std::vector<double> v) : name(std::move(n)), values(std::move(v)) {}
    CellField(std::string n, std::size_t size, double value) : name(std::move(n)), values(size, value) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    operator std::span<const double>() const { return values; }
};

/// Throws std::invalid_argument when the field length differs from the cell
/// count or a value is not finite.
void check_cell_field(const Mesh& mesh, std::span<const double> values, const std::string& name);

enum class BoundaryKind { fixed_head, fixed_velocity, zero_flux };

struct BoundarySpec {
    std::string patch;
    BoundaryKind kind = BoundaryKind::zero_flux;
    double head = 0.0;  ///< m, fixed_head only
    Vec3 velocity;      ///< m/s, fixed_velocity only

    static BoundarySpec fixed_head(std::string patch, double head);
    static BoundarySpec fixed_velocity(std::string patch, Vec3 velocity);
    static BoundarySpec zero_flux(std::string patch);

    /// Velocity imposed by a flux condition; zero for zero_flux.
    Vec3 imposed_velocity() const { return kind == BoundaryKind::fixed_velocity ? velocity : Vec3{}; }
    bool is_flux() const { return kind != BoundaryKind::fixed_head; }

    friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

/// Orders specs by mesh patch index. Every patch must have exactly one spec and
/// every spec must name an existing patch.
std::vector<BoundarySpec> resolve_boundaries(const Mesh& mesh, const std::vector<BoundarySpec>& specs);

enum class MobilityScheme { arithmetic, upwind };

/// Elevation of a point: distance against gravity from the origin.
inline double elevation(const Vec3& x, const FluidProps& fluid) { return -dot(fluid.g_hat(), x); }

/// Constitutive fields derived from the head.
struct SecondaryFields {
    CellField theta{"theta", {}};
    CellField capacity{"C", {}};
    CellField kr{"kr", {}};
    CellField mobility_phase{"M_theta", {}};
    CellField mobility{"M", {}};
};

SecondaryFields update_secondary_fields(std::span<const double> h, std::span<const double> permeability,
                                        const VanGenuchtenParams& p, const FluidProps& fluid);
/// Fills `out` in place (sizes adjusted).
void update_secondary_fields(std::span<const double> h, std::span<const double> permeability,
                             const VanGenuchtenParams& p, const FluidProps& fluid, SecondaryFields& out);
/// Plain-loop reference of update_secondary_fields.
SecondaryFields update_secondary_fields_serial(std::span<const double> h, std::span<const double> permeability,
                                               const VanGenuchtenParams& p, const FluidProps& fluid);

inline double harmonic_mean(double a, double b) { return (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

/// Total mobility M (m/s) on every face. Interior faces take the harmonic mean of
/// K and the arithmetic or upwind relative permeability. Boundary faces use the
/// owner's K with the owner's kr, except fixed_head patches which evaluate kr at
/// the prescribed head. `bcs` must be ordered by patch (see resolve_boundaries).
std::vector<double> face_mobility(const Mesh& mesh, std::span<const double> h, std::span<const double> permeability,
                                  std::span<const double> kr, const VanGenuchtenParams& p, const FluidProps& fluid,
                                  MobilityScheme scheme, const std::vector<BoundarySpec>& bcs);

/// Head gradient along the outward unit normal that makes the Darcy flux through
/// the face equal U.n: dh/dn = g_hat.n - (U.n)/M_f.
double boundary_head_gradient(const Vec3& velocity, const Vec3& unit_normal, double face_mobility,
                              const FluidProps& fluid);

/// Outward Darcy flux per unit area for a given normal head gradient:
/// -M_f (dh/dn - g_hat.n).
double darcy_normal_flux(double head_gradient, const Vec3& unit_normal, double face_mobility, const FluidProps& fluid);

} // namespace gwflow
