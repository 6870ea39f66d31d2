#include "gwflow/units.hpp"

#include <array>
#include <utility>

namespace gwflow {

const char* dimension_name(Dimension d)
{
    switch (d) {
    case Dimension::none: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::inverse_length: return "inverse length";
    case Dimension::velocity: return "velocity";
    case Dimension::permeability: return "permeability";
    case Dimension::viscosity: return "viscosity";
    case Dimension::density: return "density";
    case Dimension::acceleration: return "acceleration";
    }
    return "?";
}

const char* si_unit(Dimension d)
{
    switch (d) {
    case Dimension::none: return "";
    case Dimension::length: return "m";
    case Dimension::time: return "s";
    case Dimension::inverse_length: return "1/m";
    case Dimension::velocity: return "m/s";
    case Dimension::permeability: return "m2";
    case Dimension::viscosity: return "Pa.s";
    case Dimension::density: return "kg/m3";
    case Dimension::acceleration: return "m/s2";
    }
    return "";
}

std::optional<UnitInfo> lookup_unit(std::string_view unit)
{
    static constexpr std::array<std::pair<std::string_view, UnitInfo>, 15> table{{
        {"m", {Dimension::length, 1.0}},
        {"cm", {Dimension::length, 1e-2}},
        {"mm", {Dimension::length, 1e-3}},
        {"s", {Dimension::time, 1.0}},
        {"min", {Dimension::time, 60.0}},
        {"h", {Dimension::time, 3600.0}},
        {"day", {Dimension::time, 86400.0}},
        {"1/m", {Dimension::inverse_length, 1.0}},
        {"1/cm", {Dimension::inverse_length, 100.0}},
        {"m/s", {Dimension::velocity, 1.0}},
        {"cm/s", {Dimension::velocity, 1e-2}},
        {"m2", {Dimension::permeability, 1.0}},
        {"Pa.s", {Dimension::viscosity, 1.0}},
        {"kg/m3", {Dimension::density, 1.0}},
        {"m/s2", {Dimension::acceleration, 1.0}},
    }};
    for (const auto& [name, info] : table)
        if (name == unit) return info;
    return std::nullopt;
}

} // namespace gwflow
