#include "gwflow/timectl.hpp"

#include <algorithm>
#include <stdexcept>

namespace gwflow {

void TimeControlConfig::validate() const
{
    if (n_min_iter < 1 || n_min_iter > n_max_iter)
        throw std::invalid_argument("time control needs 1 <= n_min_iter <= n_max_iter");
    if (n_stab < 1) throw std::invalid_argument("time control n_stab must be at least 1");
    if (!(f_increase > 1.0)) throw std::invalid_argument("time control f_increase must exceed 1");
    if (!(f_decrease > 0.0 && f_decrease < 1.0)) throw std::invalid_argument("time control f_decrease must lie in (0,1)");
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
        throw std::invalid_argument("time control needs 0 < dt_min <= dt_init <= dt_max");
    if (max_dt_min_failures < 1) throw std::invalid_argument("time control max_dt_min_failures must be at least 1");
}

double TimeControlConfig::clamp(double dt) const { return std::clamp(dt, dt_min, dt_max); }

ControllerState next_dt(const ControllerState& state, int n_iter, const TimeControlConfig& cfg)
{
    if (n_iter < 1) throw std::invalid_argument("next_dt: n_iter must be at least 1");
    ControllerState next = state;
    if (n_iter > cfg.n_max_iter) {
        next.dt = cfg.clamp(cfg.f_decrease * state.dt);
        next.stab_counter = 0;
    } else if (n_iter >= cfg.n_min_iter) {
        next.stab_counter = 0;
    } else {
        next.stab_counter = state.stab_counter + 1;
        if (next.stab_counter >= cfg.n_stab) {
            next.dt = cfg.clamp(cfg.f_increase * state.dt);
            next.stab_counter = 0;
        }
    }
    return next;
}

} // namespace gwflow
