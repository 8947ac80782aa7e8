#include "rvlab/navball.hpp"

#include <cmath>
#include <stdexcept>

namespace rvlab
{

    void NavballParams::validate() const
    {
        if (!(rotation_threshold > 0.0) || !(rotation_threshold < 1.0))
            throw std::invalid_argument("navball: rotation_threshold must lie in (0, 1)");
        if (!(approach_speed > 0.0))
            throw std::invalid_argument("navball: approach_speed must be positive");
        if (vessel_acceleration && !(*vessel_acceleration > 0.0))
            throw std::invalid_argument("navball: vessel_acceleration must be positive");
        if (!vessel_acceleration && !(max_thrust > 0.0))
            throw std::invalid_argument("navball: max_thrust must be positive");
    }

    double NavballParams::acceleration_for(double vehicle_mass) const
    {
        if (vessel_acceleration)
            return *vessel_acceleration;
        return max_thrust / vehicle_mass;
    }

    double braking_distance(double v0, double a)
    {
        if (!(a > 0.0))
            throw std::invalid_argument("braking_distance: deceleration must be positive");
        return v0 * v0 / (2.0 * a);
    }

    Action navball_action(const Observation &obs, const NavballParams &params)
    {
        Action act;
        if (!obs.prograde)
            return act;
        const Vec3 &p = *obs.prograde;

        // Thrust against the drift: prograde to the right -> push left.
        if (std::abs(p.x) > params.rotation_threshold)
            act.rt = p.x > 0.0 ? Lateral::left : Lateral::right;
        if (std::abs(p.z) > params.rotation_threshold)
            act.dt = p.z > 0.0 ? Vertical::down : Vertical::up;

        const double closing_speed = -obs.range_rate;
        const bool separating = obs.range_rate >= 0.0;
        if (separating || braking_distance(closing_speed, params.acceleration_for(obs.vehicle_mass)) < obs.range)
            act.ft = ForeAft::forward;
        else if (closing_speed > params.approach_speed)
            act.ft = ForeAft::backward;
        else
            act.ft = ForeAft::none;
        return act;
    }

} // namespace rvlab
