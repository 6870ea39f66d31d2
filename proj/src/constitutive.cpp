#include "gwflow/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gwflow {

void VanGenuchtenParams::validate() const
{
    if (!(alpha > 0.0)) throw std::invalid_argument("Van Genuchten alpha must be positive");
    if (!(n > 1.0)) throw std::invalid_argument("Van Genuchten n must exceed 1");
    if (!(theta_r >= 0.0 && theta_r < theta_s && theta_s <= 1.0))
        throw std::invalid_argument("need 0 <= theta_r < theta_s <= 1, got theta_r=" + std::to_string(theta_r) +
                                    " theta_s=" + std::to_string(theta_s));
    if (!std::isfinite(kr_exponent)) throw std::invalid_argument("kr exponent must be finite");
}

VanGenuchtenParams VanGenuchtenParams::from_alpha_n(double alpha, double n, double theta_r, double theta_s)
{
    VanGenuchtenParams p;
    p.alpha = alpha;
    p.n = n;
    p.theta_r = theta_r;
    p.theta_s = theta_s;
    p.validate();
    return p;
}

void FluidProps::validate() const
{
    if (!(rho > 0.0)) throw std::invalid_argument("fluid density must be positive");
    if (!(mu > 0.0)) throw std::invalid_argument("fluid viscosity must be positive");
    if (!(g_magnitude() > 0.0)) throw std::invalid_argument("gravity magnitude must be positive");
}

double theta_of_h(double h, const VanGenuchtenParams& p)
{
    if (h >= 0.0) return p.theta_s;
    const double se = std::pow(1.0 + std::pow(p.alpha * std::abs(h), p.n), -p.m());
    return (p.theta_s - p.theta_r) * se + p.theta_r;
}

double effective_saturation(double theta, const VanGenuchtenParams& p)
{
    constexpr double slack = 1e-12;
    if (theta < p.theta_r - slack || theta > p.theta_s + slack)
        throw std::invalid_argument("saturation " + std::to_string(theta) + " outside [theta_r, theta_s]");
    const double se = (theta - p.theta_r) / (p.theta_s - p.theta_r);
    return std::clamp(se, 0.0, 1.0);
}

double capillary_capacity(double h, const VanGenuchtenParams& p)
{
    if (h >= 0.0) return 0.0;
    const double m = p.m();
    const double se = effective_saturation(theta_of_h(h, p), p);
    const double se_1m = std::pow(se, 1.0 / m);
    return p.alpha * m * (p.theta_s - p.theta_r) / (1.0 - m) * se_1m * std::pow(1.0 - se_1m, m);
}

double kr_of_thetae(double theta_e, const VanGenuchtenParams& p)
{
    if (!(theta_e >= 0.0 && theta_e <= 1.0))
        throw std::invalid_argument("effective saturation " + std::to_string(theta_e) + " outside [0,1]");
    const double m = p.m();
    const double inner = 1.0 - std::pow(1.0 - std::pow(theta_e, 1.0 / m), m);
    return std::pow(theta_e, p.kr_exponent) * inner * inner;
}

Mobility mobility(double kr, double permeability, const FluidProps& fluid)
{
    Mobility out;
    out.phase = permeability * kr / fluid.mu;
    out.total = out.phase * fluid.rho * fluid.g_magnitude();
    return out;
}

double permeability_from_conductivity(double ks, const FluidProps& fluid)
{
    if (!(ks > 0.0) || !std::isfinite(ks)) throw std::invalid_argument("hydraulic conductivity must be positive");
    return fluid.mu * ks / (fluid.rho * fluid.g_magnitude());
}

double conductivity_from_permeability(double permeability, const FluidProps& fluid)
{
    return permeability * fluid.rho * fluid.g_magnitude() / fluid.mu;
}

} // namespace gwflow
