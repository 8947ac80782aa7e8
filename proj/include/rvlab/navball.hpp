#pragma once

#include "rvlab/action.hpp"
#include "rvlab/scenario.hpp"

#include <optional>

namespace rvlab
{

    struct NavballParams
    {
        double rotation_threshold{0.08}; ///< lateral prograde component that triggers a correction
        double approach_speed{10.0};     ///< m/s
        /// m/s^2; when unset, max_thrust / current vehicle mass each tick.
        std::optional<double> vessel_acceleration;
        double max_thrust{8000.0}; ///< N, used only for the derived acceleration

        void validate() const;
        double acceleration_for(double vehicle_mass) const;

        friend bool operator==(const NavballParams &, const NavballParams &) = default;
    };

    /// Stop distance v0^2 / (2a) under uniform deceleration.
    double braking_distance(double v0, double a);

    /// Prograde-centering expert: lateral throttles push the prograde marker
    /// back onto the target line, the axial throttle manages closing speed.
    Action navball_action(const Observation &obs, const NavballParams &params);

} // namespace rvlab
