#pragma once

#include "rvlab/vec3.hpp"

#include <cstdint>
#include <stdexcept>

namespace rvlab
{

    /// Raised when a geometric construction has no unique answer (parallel axes,
    /// zero relative velocity, zero angular momentum).
    class DegenerateGeometry : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    /// Raised when the orbit generator cannot satisfy its constraints.
    class GenerationFailed : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct BodyConstants
    {
        double mu{3.5316e12};     ///< gravitational parameter (m^3/s^2), Kerbin
        double radius{600000.0};  ///< body radius (m), Kerbin

        void validate() const;
        friend bool operator==(const BodyConstants &, const BodyConstants &) = default;
    };

    /// Classical elements. Angles in radians, normalized to [0, 2*pi).
    struct OrbitalElements
    {
        double a{0.0};     ///< semi-major axis (m)
        double e{0.0};     ///< eccentricity, elliptic only
        double i{0.0};     ///< inclination
        double omega{0.0}; ///< argument of periapsis
        double raan{0.0};  ///< longitude of the ascending node
        double nu{0.0};    ///< true anomaly

        friend bool operator==(const OrbitalElements &, const OrbitalElements &) = default;
    };

    struct Kinematics
    {
        Vec3 position; ///< m, celestial-body frame
        Vec3 velocity; ///< m/s, celestial-body frame

        friend bool operator==(const Kinematics &, const Kinematics &) = default;
    };

    /// Engine model shared by both vessels. Thrust is per vessel-frame axis
    /// group; propellant flow scales with the commanded thrust magnitude.
    struct EngineConfig
    {
        double max_thrust{8000.0};  ///< N, per axis group
        double max_flow{1.0};       ///< kg/s at max_thrust
        double dry_mass{4000.0};    ///< kg
        double propellant{1000.0};  ///< kg, initial load

        void validate() const;
        friend bool operator==(const EngineConfig &, const EngineConfig &) = default;
    };

    struct VesselState
    {
        Vec3 position;
        Vec3 velocity;
        double mass{0.0};       ///< kg, dry mass + propellant
        double propellant{0.0}; ///< kg
        bool propellant_exhausted{false};

        double dry_mass() const { return mass - propellant; }
        Kinematics kinematics() const { return {position, velocity}; }

        friend bool operator==(const VesselState &, const VesselState &) = default;
    };

    /// Vessel axes expressed in the celestial-body frame. The matrix with these
    /// columns maps vessel coordinates to body coordinates.
    struct FrameBasis
    {
        Vec3 right;   ///< x: right
        Vec3 forward; ///< y: toward the target
        Vec3 up;      ///< z: up

        /// Body-frame vector -> vessel-frame components.
        Vec3 to_vessel(const Vec3 &v) const { return {dot(v, right), dot(v, forward), dot(v, up)}; }
        /// Vessel-frame components -> body-frame vector.
        Vec3 to_body(const Vec3 &v) const { return right * v.x + forward * v.y + up * v.z; }

        friend bool operator==(const FrameBasis &, const FrameBasis &) = default;
    };

    struct OrbitConstraints
    {
        double distance_min{700.0};          ///< m, accepted separation lower bound
        double distance_max{3000.0};         ///< m, accepted separation upper bound
        double eccentricity_min{0.0};
        double eccentricity_max{0.004};
        double inclination_offset_max{0.004}; ///< rad, |i - i_evader| bound
        double radial_fraction_min{0.1};     ///< radial offset as a fraction of the sampled distance
        double radial_fraction_max{0.5};
        int max_attempts{10000};

        void validate() const;
        friend bool operator==(const OrbitConstraints &, const OrbitConstraints &) = default;
    };

    /// Wraps an angle into [0, 2*pi).
    double normalize_angle(double angle);

    Kinematics elements_to_state(const OrbitalElements &el, const BodyConstants &body);

    /// Throws DegenerateGeometry for zero angular momentum and
    /// std::invalid_argument for unbound (e >= 1) states.
    OrbitalElements state_to_elements(const Vec3 &position, const Vec3 &velocity, const BodyConstants &body);

    double specific_energy(const Kinematics &k, const BodyConstants &body);

    /// One fixed-size RK4 step under gravity plus a constant body-frame thrust.
    /// Mass decreases linearly at the flow implied by the thrust magnitude; if
    /// propellant runs out inside the step, the remainder is coasted and the
    /// returned state is flagged.
    VesselState propagate(const VesselState &state, const Vec3 &thrust, const EngineConfig &engine,
                          const BodyConstants &body, double dt);

    /// Right-handed vessel frame: forward points at the target, up is the
    /// component of vessel_up orthogonal to forward, right = forward x up.
    FrameBasis vessel_frame(const Vec3 &pursuer_pos, const Vec3 &evader_pos, const Vec3 &vessel_up);

    /// Unit relative velocity of the pursuer w.r.t. the evader, in vessel axes.
    Vec3 compute_prograde(const Vec3 &pursuer_pos, const Vec3 &evader_pos, const Vec3 &pursuer_vel,
                          const Vec3 &evader_vel, const Vec3 &vessel_up);

    /// Randomized pursuer orbit near the evader: periapsis placed at the
    /// evader's argument of latitude, raised by a sampled radial offset, with
    /// sampled eccentricity and inclination offset. Rejection-sampled until the
    /// instantaneous separation lies within the distance bounds.
    OrbitalElements generate_orbit(const OrbitalElements &evader, const OrbitConstraints &constraints,
                                   std::uint64_t seed, const BodyConstants &body = {});

} // namespace rvlab
