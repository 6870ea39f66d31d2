#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "gwflow/constitutive.hpp"
#include "gwflow/fields.hpp"
#include "gwflow/linsolve.hpp"
#include "gwflow/mesh.hpp"
#include "gwflow/sparse.hpp"

namespace gwflow {

struct PicardConfig {
    double epsilon = 1e-5;          ///< m, max-norm head change for convergence
    int n_max_iter = 8;
    double hard_cap_factor = 2.0;   ///< give up after hard_cap_factor * n_max_iter iterations
    double relaxation = 1.0;
    MobilityScheme scheme = MobilityScheme::arithmetic;
    double c_min = 1e-9;            ///< 1/m, storage floor added to the diagonal

    void validate() const;
    int hard_cap() const;

    friend bool operator==(const PicardConfig&, const PicardConfig&) = default;
};

struct Material {
    std::vector<double> permeability; ///< m2 per cell
    VanGenuchtenParams vg;
};

/// Everything that stays fixed over a run: mesh, material, fluid and boundary specs.
struct FlowProblem {
    const Mesh* mesh = nullptr;
    Material material;
    FluidProps fluid;
    std::vector<BoundarySpec> bcs; ///< resolved, one per patch
};

/// Per-face data of the last assembly. Outward boundary flux (m3/s) for a cell
/// head h_c is flux_coeff * h_c + flux_const.
struct FaceCoefficients {
    std::vector<double> mobility;          ///< M_f, m/s
    std::vector<double> transmissibility;  ///< T_f = M_f |S_f| / d_f, m2/s
    std::vector<double> flux_coeff;        ///< boundary faces only (indexed f - n_internal)
    std::vector<double> flux_const;
};

/// Two-point flux finite-volume assembly of the Picard-linearised head equation.
///
/// Each cell owns its matrix row, so rows are filled in parallel. The sparsity
/// pattern and the geometric factors are built once per mesh.
class Assembler {
public:
    explicit Assembler(const FlowProblem& problem);

    /// Assembles the system for h^{n+1,m+1} with coefficients frozen at `h_iter`.
    /// Throws std::runtime_error naming the cell when a coefficient is not finite.
    const SparseSystem& assemble(std::span<const double> h_iter, std::span<const double> h_old, double dt,
                                 const SecondaryFields& secondary, const PicardConfig& cfg);

    /// Plain face-loop scatter assembly; reference for tests and bench/.
    SparseSystem assemble_serial(std::span<const double> h_iter, std::span<const double> h_old, double dt,
                                 const SecondaryFields& secondary, const PicardConfig& cfg) const;

    const SparseSystem& system() const { return system_; }
    const FaceCoefficients& faces() const { return faces_; }

    /// Net outward boundary flux (m3/s) for the head `h` using the last assembled coefficients.
    double boundary_outflow(std::span<const double> h) const;

    const std::vector<double>& cell_elevation() const { return cell_z_; }

private:
    void compute_faces(std::span<const double> h_iter, const SecondaryFields& secondary, const PicardConfig& cfg,
                       FaceCoefficients& out) const;

    const FlowProblem& problem_;
    std::vector<double> face_mag_;     ///< |S_f|
    std::vector<double> face_dist_;    ///< centroid distance projected on the face normal
    std::vector<double> cell_z_;
    std::vector<double> face_z_;
    std::vector<Index> offdiag_pos_;   ///< per cell_faces entry: CSR slot of the neighbour, -1 on boundary
    std::vector<Index> diag_pos_;
    SparseSystem system_;
    FaceCoefficients faces_;
};

/// One-shot assembly.
SparseSystem assemble(const FlowProblem& problem, std::span<const double> h_iter, std::span<const double> h_old,
                      double dt, const PicardConfig& cfg);

/// max_c |a_c - b_c|.
double picard_residual(std::span<const double> h_new, std::span<const double> h_old);

struct StepReport {
    int n_iter = 0;
    std::vector<double> residual_history; ///< m, one per iteration
    bool converged = false;
    bool warned = false;                  ///< hard cap reached, solution accepted anyway
    double mass_balance_error = 0.0;
    double storage_change = 0.0;          ///< m3
    double boundary_inflow = 0.0;         ///< m3 over the step
    int linear_iterations = 0;
};

/// |storage change - inflow| / max(|storage change|, |inflow|, tiny).
double mass_balance(double storage_change, double inflow_volume);

struct PicardResult {
    std::vector<double> h;
    StepReport report;
};

class PicardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Picard loop for one time step of the head-based Richards equation.
class RichardsSolver {
public:
    RichardsSolver(FlowProblem problem, PicardConfig cfg);
    RichardsSolver(const RichardsSolver&) = delete;
    RichardsSolver& operator=(const RichardsSolver&) = delete;

    /// Advances `h_old` by `dt`. Starts from h^{n+1,0} = h^n, iterates until the
    /// max-norm head change is <= epsilon, or accepts the current iterate with
    /// `warned` set after hard_cap() iterations.
    PicardResult step(std::span<const double> h_old, double dt);

    const FlowProblem& problem() const { return problem_; }
    const PicardConfig& config() const { return cfg_; }
    PicardConfig& config() { return cfg_; }
    const Mesh& mesh() const { return *problem_.mesh; }

    double storage(std::span<const double> h) const;
    SecondaryFields secondary(std::span<const double> h) const;

private:
    FlowProblem problem_;
    PicardConfig cfg_;
    Assembler assembler_;
    SecondaryFields secondary_;
    std::vector<double> correction_rhs_;
    std::vector<double> zeros_;
};

} // namespace gwflow
