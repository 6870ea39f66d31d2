#pragma once

#include <stdexcept>

#include "gwflow/vec3.hpp"

namespace gwflow {

/// Van Genuchten retention parameters. `m` is tied to `n` by m = 1 - 1/n.
struct VanGenuchtenParams {
    double alpha = 0.0;   ///< 1/m
    double n = 2.0;
    double theta_r = 0.0;
    double theta_s = 1.0;
    /// Pore-connectivity exponent of the Mualem relative permeability.
    double kr_exponent = 0.5;

    double m() const { return 1.0 - 1.0 / n; }

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;

    static VanGenuchtenParams from_alpha_n(double alpha, double n, double theta_r, double theta_s);

    friend bool operator==(const VanGenuchtenParams&, const VanGenuchtenParams&) = default;
};

struct FluidProps {
    double rho = 1000.0;             ///< kg/m3
    double mu = 1.0e-3;              ///< Pa.s
    Vec3 gravity{0.0, 0.0, -9.81};   ///< m/s2

    double g_magnitude() const { return norm(gravity); }
    /// Unit vector along gravity.
    Vec3 g_hat() const { return gravity / g_magnitude(); }

    void validate() const;

    friend bool operator==(const FluidProps&, const FluidProps&) = default;
};

/// Volumetric water content at pressure head h (m).
double theta_of_h(double h, const VanGenuchtenParams& p);

/// (theta - theta_r) / (theta_s - theta_r), clamped to [0,1]. Rejects theta more
/// than 1e-12 outside [theta_r, theta_s].
double effective_saturation(double theta, const VanGenuchtenParams& p);

/// d(theta)/dh in 1/m; zero for h >= 0.
double capillary_capacity(double h, const VanGenuchtenParams& p);

/// Mualem - Van Genuchten relative permeability.
double kr_of_thetae(double theta_e, const VanGenuchtenParams& p);

struct Mobility {
    double phase = 0.0; ///< K kr / mu, m2/(Pa.s)
    double total = 0.0; ///< phase * rho * |g|, m/s
};

Mobility mobility(double kr, double permeability, const FluidProps& fluid);

/// Intrinsic permeability (m2) from saturated hydraulic conductivity (m/s).
double permeability_from_conductivity(double ks, const FluidProps& fluid);
double conductivity_from_permeability(double permeability, const FluidProps& fluid);

} // namespace gwflow
