#pragma once

#include <optional>
#include <string_view>

namespace gwflow {

enum class Dimension {
    none,
    length,
    time,
    inverse_length,
    velocity,
    permeability,
    viscosity,
    density,
    acceleration,
};

const char* dimension_name(Dimension d);
/// SI unit string written by the case printer.
const char* si_unit(Dimension d);

struct UnitInfo {
    Dimension dimension;
    double to_si;
};

/// Looks up a unit suffix (m, cm, mm, s, min, h, day, 1/m, 1/cm, m/s, cm/s, m2,
/// Pa.s, kg/m3, m/s2).
std::optional<UnitInfo> lookup_unit(std::string_view unit);

} // namespace gwflow
