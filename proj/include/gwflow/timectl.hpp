#pragma once

namespace gwflow {

struct TimeControlConfig {
    int n_min_iter = 3;
    int n_max_iter = 8;
    int n_stab = 5;
    double f_increase = 1.3;
    double f_decrease = 0.7;
    double dt_min = 1e-4;   ///< s
    double dt_max = 86400.0;
    double dt_init = 1.0;
    /// Consecutive decrease requests at dt_min before a run is aborted.
    int max_dt_min_failures = 3;

    void validate() const;
    double clamp(double dt) const;

    friend bool operator==(const TimeControlConfig&, const TimeControlConfig&) = default;
};

struct ControllerState {
    double dt = 1.0;
    int stab_counter = 0;

    friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// Iteration-count heuristic for the next time step:
///  - more than n_max_iter Picard iterations: shrink dt by f_decrease;
///  - between n_min_iter and n_max_iter: keep dt;
///  - fewer than n_min_iter: count the step; after n_stab such steps in a row
///    grow dt by f_increase.
/// Any step that is not fast resets the counter. dt stays within [dt_min, dt_max].
ControllerState next_dt(const ControllerState& state, int n_iter, const TimeControlConfig& cfg);

} // namespace gwflow
