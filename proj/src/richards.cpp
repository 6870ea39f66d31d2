#include "gwflow/richards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gwflow/kernels.hpp"

namespace gwflow {

void PicardConfig::validate() const
{
    if (!(epsilon > 0.0)) throw std::invalid_argument("picard epsilon must be positive");
    if (n_max_iter < 1) throw std::invalid_argument("picard n_max_iter must be at least 1");
    if (!(hard_cap_factor >= 1.0)) throw std::invalid_argument("picard hard_cap_factor must be at least 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw std::invalid_argument("picard relaxation must lie in (0,1]");
    if (!(c_min >= 0.0)) throw std::invalid_argument("picard c_min must be non-negative");
}

int PicardConfig::hard_cap() const
{
    return std::max(1, static_cast<int>(std::lround(hard_cap_factor * n_max_iter)));
}

Assembler::Assembler(const FlowProblem& problem) : problem_(problem)
{
    const Mesh& mesh = *problem.mesh;
    if (problem.bcs.size() != mesh.patches().size())
        throw std::invalid_argument("assembler needs one boundary spec per patch");
    check_cell_field(mesh, problem.material.permeability, "K");
    for (std::size_t c = 0; c < problem.material.permeability.size(); ++c)
        if (!(problem.material.permeability[c] > 0.0))
            throw std::invalid_argument("permeability must be positive, cell " + std::to_string(c));

    const Index nf = mesh.n_faces();
    const Index nc = mesh.n_cells();
    const auto& areas = mesh.face_area_vectors();
    const auto& centres = mesh.cell_centroids();
    const auto& fcentres = mesh.face_centroids();

    face_mag_.resize(static_cast<std::size_t>(nf));
    face_dist_.resize(static_cast<std::size_t>(nf));
    face_z_.resize(static_cast<std::size_t>(nf));
    cell_z_.resize(static_cast<std::size_t>(nc));
    for (Index c = 0; c < nc; ++c) cell_z_[c] = elevation(centres[c], problem.fluid);
    for (Index f = 0; f < nf; ++f) {
        const double mag = norm(areas[f]);
        const Vec3 unit = areas[f] / mag;
        const Vec3 delta = mesh.is_internal(f) ? centres[mesh.neighbour()[f]] - centres[mesh.owner()[f]]
                                               : fcentres[f] - centres[mesh.owner()[f]];
        const double d = std::abs(dot(delta, unit));
        if (!(d > 0.0)) throw std::invalid_argument("face " + std::to_string(f) + " has zero normal distance");
        face_mag_[f] = mag;
        face_dist_[f] = d;
        face_z_[f] = elevation(fcentres[f], problem.fluid);
    }

    // Sparsity: each row holds the diagonal and one entry per interior face.
    CsrMatrix& a = system_.matrix;
    a.rows = nc;
    a.row_ptr.assign(static_cast<std::size_t>(nc) + 1, 0);
    for (Index c = 0; c < nc; ++c) {
        Index count = 1;
        for (Index f : mesh.cell_faces(c))
            if (mesh.is_internal(f)) ++count;
        a.row_ptr[c + 1] = a.row_ptr[c] + count;
    }
    a.cols.resize(static_cast<std::size_t>(a.row_ptr.back()));
    a.values.assign(a.cols.size(), 0.0);
    diag_pos_.resize(static_cast<std::size_t>(nc));
    std::vector<Index> cf_offsets(static_cast<std::size_t>(nc) + 1, 0);
    for (Index c = 0; c < nc; ++c) cf_offsets[c + 1] = cf_offsets[c] + static_cast<Index>(mesh.cell_faces(c).size());
    offdiag_pos_.assign(static_cast<std::size_t>(cf_offsets.back()), -1);
    std::vector<std::pair<Index, Index>> row; // (column, local face slot or -1 for diagonal)
    for (Index c = 0; c < nc; ++c) {
        row.clear();
        row.emplace_back(c, -1);
        const auto faces = mesh.cell_faces(c);
        for (std::size_t i = 0; i < faces.size(); ++i) {
            const Index f = faces[i];
            if (!mesh.is_internal(f)) continue;
            const Index other = mesh.owner()[f] == c ? mesh.neighbour()[f] : mesh.owner()[f];
            row.emplace_back(other, static_cast<Index>(i));
        }
        std::sort(row.begin(), row.end());
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k].first == row[k - 1].first)
                throw std::invalid_argument("cells " + std::to_string(c) + " and " + std::to_string(row[k].first) +
                                            " share more than one face");
        for (std::size_t k = 0; k < row.size(); ++k) {
            const Index pos = a.row_ptr[c] + static_cast<Index>(k);
            a.cols[pos] = row[k].first;
            if (row[k].second < 0)
                diag_pos_[c] = pos;
            else
                offdiag_pos_[cf_offsets[c] + row[k].second] = pos;
        }
    }
    system_.rhs.assign(static_cast<std::size_t>(nc), 0.0);
    system_.symmetric = true;
}

void Assembler::compute_faces(std::span<const double> h_iter, const SecondaryFields& secondary,
                              const PicardConfig& cfg, FaceCoefficients& out) const
{
    const Mesh& mesh = *problem_.mesh;
    const FluidProps& fluid = problem_.fluid;
    out.mobility = face_mobility(mesh, h_iter, problem_.material.permeability, secondary.kr.values,
                                 problem_.material.vg, fluid, cfg.scheme, problem_.bcs);
    const Index nf = mesh.n_faces();
    const Index ni = mesh.n_internal_faces();
    out.transmissibility.resize(static_cast<std::size_t>(nf));
    out.flux_coeff.assign(static_cast<std::size_t>(nf - ni), 0.0);
    out.flux_const.assign(static_cast<std::size_t>(nf - ni), 0.0);
    const auto& areas = mesh.face_area_vectors();
    const auto& owner = mesh.owner();
    const auto& face_patch = mesh.face_patch();

    Index bad_face = -1;
#pragma omp parallel for schedule(static) reduction(max : bad_face)
    for (Index f = 0; f < nf; ++f) {
        const double t = out.mobility[f] * face_mag_[f] / face_dist_[f];
        out.transmissibility[f] = t;
        if (f < ni) continue;
        const auto b = static_cast<std::size_t>(f - ni);
        const BoundarySpec& bc = problem_.bcs[static_cast<std::size_t>(face_patch[f])];
        if (bc.kind == BoundaryKind::fixed_head) {
            // Outward flux = -T ((h_b + z_b) - (h_c + z_c)).
            out.flux_coeff[b] = t;
            out.flux_const[b] = t * (cell_z_[owner[f]] - bc.head - face_z_[f]);
        } else {
            const Vec3 unit = areas[f] / face_mag_[f];
            if (out.mobility[f] <= 0.0 && dot(bc.imposed_velocity(), unit) != 0.0) {
                bad_face = std::max(bad_face, f);
                continue;
            }
            const double grad = boundary_head_gradient(bc.imposed_velocity(), unit, out.mobility[f], fluid);
            out.flux_const[b] = darcy_normal_flux(grad, unit, out.mobility[f], fluid) * face_mag_[f];
        }
    }
    if (bad_face >= 0)
        throw std::invalid_argument("cannot impose a velocity through boundary face " + std::to_string(bad_face) +
                                    " with zero mobility");
}

const SparseSystem& Assembler::assemble(std::span<const double> h_iter, std::span<const double> h_old, double dt,
                                        const SecondaryFields& secondary, const PicardConfig& cfg)
{
    const Mesh& mesh = *problem_.mesh;
    if (!(dt > 0.0)) throw std::invalid_argument("assemble: dt must be positive");
    if (h_iter.size() != static_cast<std::size_t>(mesh.n_cells()) || h_old.size() != h_iter.size())
        throw std::invalid_argument("assemble: head field size does not match mesh");

    compute_faces(h_iter, secondary, cfg, faces_);

    const Index nc = mesh.n_cells();
    const Index ni = mesh.n_internal_faces();
    const auto& volumes = mesh.cell_volumes();
    const auto& owner = mesh.owner();
    const auto& neighbour = mesh.neighbour();
    const auto& cap = secondary.capacity.values;
    double* vals = system_.matrix.values.data();
    double* rhs = system_.rhs.data();
    const std::vector<double>& tr = faces_.transmissibility;

    // Offsets into offdiag_pos_ follow the cell_faces layout.
    Index bad_cell = -1;
#pragma omp parallel for schedule(static) reduction(max : bad_cell)
    for (Index c = 0; c < nc; ++c) {
        const double storage = volumes[c] * (cap[c] + cfg.c_min) / dt;
        double diag = storage;
        double b = storage * h_old[c];
        const auto faces = mesh.cell_faces(c);
        const std::size_t base = static_cast<std::size_t>(faces.data() - mesh.cell_faces(0).data());
        for (std::size_t i = 0; i < faces.size(); ++i) {
            const Index f = faces[i];
            if (f < ni) {
                const Index other = owner[f] == c ? neighbour[f] : owner[f];
                diag += tr[f];
                vals[offdiag_pos_[base + i]] = -tr[f];
                b += tr[f] * (cell_z_[other] - cell_z_[c]);
            } else {
                const auto k = static_cast<std::size_t>(f - ni);
                diag += faces_.flux_coeff[k];
                b -= faces_.flux_const[k];
            }
        }
        vals[diag_pos_[c]] = diag;
        rhs[c] = b;
        if (!std::isfinite(diag) || !std::isfinite(b)) bad_cell = std::max(bad_cell, c);
    }
    if (bad_cell >= 0) throw std::runtime_error("assemble: non-finite coefficient in cell " + std::to_string(bad_cell));
    return system_;
}

SparseSystem Assembler::assemble_serial(std::span<const double> h_iter, std::span<const double> h_old, double dt,
                                        const SecondaryFields& secondary, const PicardConfig& cfg) const
{
    const Mesh& mesh = *problem_.mesh;
    if (!(dt > 0.0)) throw std::invalid_argument("assemble: dt must be positive");
    FaceCoefficients fc;
    compute_faces(h_iter, secondary, cfg, fc);

    SparseSystem sys;
    sys.matrix = system_.matrix;
    std::fill(sys.matrix.values.begin(), sys.matrix.values.end(), 0.0);
    sys.rhs.assign(static_cast<std::size_t>(mesh.n_cells()), 0.0);
    auto& a = sys.matrix;

    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double storage = mesh.cell_volumes()[c] * (secondary.capacity[c] + cfg.c_min) / dt;
        a.values[a.find(c, c)] += storage;
        sys.rhs[c] += storage * h_old[c];
    }
    const Index ni = mesh.n_internal_faces();
    for (Index f = 0; f < ni; ++f) {
        const Index o = mesh.owner()[f];
        const Index n = mesh.neighbour()[f];
        const double t = fc.transmissibility[f];
        a.values[a.find(o, o)] += t;
        a.values[a.find(n, n)] += t;
        a.values[a.find(o, n)] -= t;
        a.values[a.find(n, o)] -= t;
        sys.rhs[o] += t * (cell_z_[n] - cell_z_[o]);
        sys.rhs[n] += t * (cell_z_[o] - cell_z_[n]);
    }
    for (Index f = ni; f < mesh.n_faces(); ++f) {
        const Index o = mesh.owner()[f];
        const auto k = static_cast<std::size_t>(f - ni);
        a.values[a.find(o, o)] += fc.flux_coeff[k];
        sys.rhs[o] -= fc.flux_const[k];
    }
    return sys;
}

double Assembler::boundary_outflow(std::span<const double> h) const
{
    const Mesh& mesh = *problem_.mesh;
    const Index ni = mesh.n_internal_faces();
    std::vector<double> flux(static_cast<std::size_t>(mesh.n_faces() - ni));
    const auto& owner = mesh.owner();
#pragma omp parallel for schedule(static)
    for (Index f = ni; f < mesh.n_faces(); ++f) {
        const auto k = static_cast<std::size_t>(f - ni);
        flux[k] = faces_.flux_coeff[k] * h[owner[f]] + faces_.flux_const[k];
    }
    return kernels::par::sum(flux);
}

SparseSystem assemble(const FlowProblem& problem, std::span<const double> h_iter, std::span<const double> h_old,
                      double dt, const PicardConfig& cfg)
{
    Assembler assembler(problem);
    const SecondaryFields sec =
        update_secondary_fields(h_iter, problem.material.permeability, problem.material.vg, problem.fluid);
    return assembler.assemble(h_iter, h_old, dt, sec, cfg);
}

double picard_residual(std::span<const double> h_new, std::span<const double> h_old)
{
    if (h_new.size() != h_old.size()) throw std::invalid_argument("picard_residual: field sizes differ");
    return kernels::par::max_abs_diff(h_new, h_old);
}

double mass_balance(double storage_change, double inflow_volume)
{
    constexpr double tiny = 1e-300;
    const double scale = std::max({std::abs(storage_change), std::abs(inflow_volume), tiny});
    return std::abs(storage_change - inflow_volume) / scale;
}

RichardsSolver::RichardsSolver(FlowProblem problem, PicardConfig cfg)
    : problem_(std::move(problem)), cfg_(cfg), assembler_(problem_)
{
    cfg_.validate();
    problem_.fluid.validate();
    problem_.material.vg.validate();
}

double RichardsSolver::storage(std::span<const double> h) const
{
    const Mesh& mesh = *problem_.mesh;
    std::vector<double> water(h.size());
    const auto n = static_cast<std::int64_t>(h.size());
    const auto& vol = mesh.cell_volumes();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) water[i] = vol[i] * theta_of_h(h[i], problem_.material.vg);
    return kernels::par::sum(water);
}

SecondaryFields RichardsSolver::secondary(std::span<const double> h) const
{
    return update_secondary_fields(h, problem_.material.permeability, problem_.material.vg, problem_.fluid);
}

PicardResult RichardsSolver::step(std::span<const double> h_old, double dt)
{
    if (!(dt > 0.0)) throw std::invalid_argument("picard step: dt must be positive");
    check_cell_field(mesh(), h_old, "h");

    PicardResult out;
    StepReport& rep = out.report;
    std::vector<double> h_iter(h_old.begin(), h_old.end());
    std::vector<double> h_next(h_iter.size());
    const int cap = cfg_.hard_cap();

    while (true) {
        update_secondary_fields(h_iter, problem_.material.permeability, problem_.material.vg, problem_.fluid,
                                secondary_);
        const SparseSystem& sys = assembler_.assemble(h_iter, h_old, dt, secondary_, cfg_);

        double max_h = 0.0;
        for (double v : h_iter) max_h = std::max(max_h, std::abs(v));
        // Solve for the correction A d = b - A h_iter so the tolerance bounds the
        // error of the update rather than of the whole head.
        correction_rhs_.resize(h_iter.size());
        kernels::par::spmv(sys.matrix, h_iter, correction_rhs_);
        const auto n_rows = static_cast<std::int64_t>(h_iter.size());
        #pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n_rows; ++i) correction_rhs_[i] = sys.rhs[i] - correction_rhs_[i];
        const double b_norm = std::sqrt(kernels::par::dot(sys.rhs, sys.rhs));
        const double r_norm = std::sqrt(kernels::par::dot(correction_rhs_, correction_rhs_));
        CgOptions opts;
        opts.rel_tol = linear_tolerance_for(cfg_.epsilon, max_h);
        opts.max_iter = std::clamp(4 * sys.matrix.rows, 1000, 200000);
        CgResult lin;
        if (r_norm <= 1e-15 * b_norm) {
            lin.x.assign(h_iter.size(), 0.0);
        } else {
            // Rounding in b - A h caps the attainable reduction.
            opts.rel_tol = std::min(0.5, std::max(opts.rel_tol, 1e-14 * b_norm / r_norm));
            zeros_.assign(h_iter.size(), 0.0);
            try {
                lin = solve_cg(sys.matrix, correction_rhs_, zeros_, opts);
            } catch (const LinearSolverError& e) {
                throw PicardError("Picard iteration " + std::to_string(rep.n_iter + 1) + ": " + e.what());
            } catch (const std::invalid_argument& e) {
                throw PicardError("Picard iteration " + std::to_string(rep.n_iter + 1) + ": " + e.what());
            }
        }
        rep.linear_iterations += lin.iterations;

        const double relax = cfg_.relaxation;
        #pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n_rows; ++i) h_next[i] = h_iter[i] + relax * lin.x[i];
        const double r = picard_residual(h_next, h_iter);
        h_iter.swap(h_next);
        ++rep.n_iter;
        rep.residual_history.push_back(r);
        if (!std::isfinite(r)) throw PicardError("Picard iteration " + std::to_string(rep.n_iter) + ": non-finite head");
        if (r <= cfg_.epsilon) {
            rep.converged = true;
            break;
        }
        if (rep.n_iter >= cap) {
            rep.warned = true;
            break;
        }
    }

    rep.storage_change = storage(h_iter) - storage(h_old);
    rep.boundary_inflow = -dt * assembler_.boundary_outflow(h_iter);
    rep.mass_balance_error = mass_balance(rep.storage_change, rep.boundary_inflow);
    out.h = std::move(h_iter);
    return out;
}

} // namespace gwflow
