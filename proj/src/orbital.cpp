#include "rvlab/orbital.hpp"

#include "rvlab/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rvlab
{

    namespace
    {
        constexpr double kTwoPi = 2.0 * std::numbers::pi;

        // Below this fraction of |vessel_up| the orthogonal remainder carries no direction.
        constexpr double kFrameDegenerateTol = 1e-9;

        struct Derivative
        {
            Vec3 dr;
            Vec3 dv;
        };

        Vec3 gravity(const Vec3 &r, double mu)
        {
            const double rn = norm(r);
            return r * (-mu / (rn * rn * rn));
        }

        // Classical RK4 with thrust acceleration F / m(t), m(t) = m0 - flow * t.
        Kinematics rk4(const Kinematics &k, const Vec3 &thrust, double m0, double flow, double mu, double h)
        {
            auto accel = [&](const Vec3 &r, double t) { return gravity(r, mu) + thrust / (m0 - flow * t); };

            const Derivative k1{k.velocity, accel(k.position, 0.0)};
            const Derivative k2{k.velocity + k1.dv * (h / 2), accel(k.position + k1.dr * (h / 2), h / 2)};
            const Derivative k3{k.velocity + k2.dv * (h / 2), accel(k.position + k2.dr * (h / 2), h / 2)};
            const Derivative k4{k.velocity + k3.dv * h, accel(k.position + k3.dr * h, h)};

            return {
                    k.position + (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr) * (h / 6),
                    k.velocity + (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv) * (h / 6),
            };
        }
    } // namespace

    void BodyConstants::validate() const
    {
        if (!(mu > 0.0) || !(radius > 0.0))
            throw std::invalid_argument("body constants: mu and radius must be positive");
    }

    void EngineConfig::validate() const
    {
        if (!(max_thrust > 0.0) || !(max_flow >= 0.0) || !(dry_mass > 0.0) || !(propellant >= 0.0))
            throw std::invalid_argument("engine: max_thrust and dry_mass must be positive, flow and propellant non-negative");
    }

    void OrbitConstraints::validate() const
    {
        if (!(distance_min > 0.0) || !(distance_min < distance_max))
            throw std::invalid_argument("orbit constraints: need 0 < distance_min < distance_max");
        if (!(eccentricity_min >= 0.0) || !(eccentricity_min <= eccentricity_max) || !(eccentricity_max < 1.0))
            throw std::invalid_argument("orbit constraints: need 0 <= e_min <= e_max < 1");
        if (!(inclination_offset_max >= 0.0))
            throw std::invalid_argument("orbit constraints: inclination offset must be non-negative");
        if (!(radial_fraction_min >= 0.0) || !(radial_fraction_min <= radial_fraction_max))
            throw std::invalid_argument("orbit constraints: bad radial fraction range");
        if (max_attempts <= 0)
            throw std::invalid_argument("orbit constraints: max_attempts must be positive");
    }

    double normalize_angle(double angle)
    {
        double out = std::fmod(angle, kTwoPi);
        if (out < 0.0)
            out += kTwoPi;
        // fmod of a tiny negative angle can round up to exactly 2*pi
        if (out >= kTwoPi)
            out = 0.0;
        return out;
    }

    Kinematics elements_to_state(const OrbitalElements &el, const BodyConstants &body)
    {
        body.validate();
        if (!(el.a > 0.0))
            throw std::invalid_argument("elements_to_state: semi-major axis must be positive");
        if (!(el.e >= 0.0) || !(el.e < 1.0))
            throw std::invalid_argument("elements_to_state: eccentricity must lie in [0, 1)");

        const double p = el.a * (1.0 - el.e * el.e);
        const double cos_nu = std::cos(el.nu);
        const double sin_nu = std::sin(el.nu);
        const double r = p / (1.0 + el.e * cos_nu);
        const double vscale = std::sqrt(body.mu / p);

        // Perifocal frame
        const double xp = r * cos_nu;
        const double yp = r * sin_nu;
        const double vxp = -vscale * sin_nu;
        const double vyp = vscale * (el.e + cos_nu);

        const double co = std::cos(el.omega), so = std::sin(el.omega);
        const double cr = std::cos(el.raan), sr = std::sin(el.raan);
        const double ci = std::cos(el.i), si = std::sin(el.i);

        // Columns of R3(raan) R1(i) R3(omega) spanning the orbital plane
        const Vec3 p_hat{cr * co - sr * so * ci, sr * co + cr * so * ci, so * si};
        const Vec3 q_hat{-cr * so - sr * co * ci, -sr * so + cr * co * ci, co * si};

        return {p_hat * xp + q_hat * yp, p_hat * vxp + q_hat * vyp};
    }

    OrbitalElements state_to_elements(const Vec3 &position, const Vec3 &velocity, const BodyConstants &body)
    {
        body.validate();
        const double r = norm(position);
        const double v = norm(velocity);
        if (!(r > 0.0))
            throw DegenerateGeometry("state_to_elements: zero position vector");

        const Vec3 h = cross(position, velocity);
        const double hn = norm(h);
        if (!(hn > 1e-12 * r * v) || !(hn > 0.0))
            throw DegenerateGeometry("state_to_elements: zero angular momentum (rectilinear motion)");

        const double energy = v * v / 2.0 - body.mu / r;
        if (!(energy < 0.0))
            throw std::invalid_argument("state_to_elements: state is not bound (e >= 1)");

        OrbitalElements el;
        el.a = -body.mu / (2.0 * energy);

        const Vec3 e_vec = (position * (v * v - body.mu / r) - velocity * dot(position, velocity)) / body.mu;
        el.e = norm(e_vec);
        if (!(el.e < 1.0))
            throw std::invalid_argument("state_to_elements: state is not elliptic");

        const double h_xy = std::hypot(h.x, h.y);
        el.i = std::atan2(h_xy, h.z);
        // Equatorial orbits have no node line; the x axis stands in for it.
        el.raan = h_xy > 1e-15 * hn ? normalize_angle(std::atan2(h.x, -h.y)) : 0.0;

        const Vec3 node{std::cos(el.raan), std::sin(el.raan), 0.0};
        const Vec3 in_plane = cross(h / hn, node);

        const double arg_latitude = std::atan2(dot(position, in_plane), dot(position, node));
        // Circular orbits have no periapsis; omega = 0 puts all phase into nu.
        const double omega = el.e > 0.0 ? std::atan2(dot(e_vec, in_plane), dot(e_vec, node)) : 0.0;

        el.omega = normalize_angle(omega);
        el.nu = normalize_angle(arg_latitude - omega);
        return el;
    }

    double specific_energy(const Kinematics &k, const BodyConstants &body)
    {
        const double v = norm(k.velocity);
        return v * v / 2.0 - body.mu / norm(k.position);
    }

    VesselState propagate(const VesselState &state, const Vec3 &thrust, const EngineConfig &engine,
                          const BodyConstants &body, double dt)
    {
        if (!(dt > 0.0))
            throw std::invalid_argument("propagate: dt must be positive");
        const double thrust_mag = norm(thrust);
        // Three axis groups at full throttle each.
        if (thrust_mag > std::sqrt(3.0) * engine.max_thrust * (1.0 + 1e-12))
            throw std::invalid_argument("propagate: thrust exceeds engine capability");

        VesselState out = state;
        const double flow = thrust_mag / engine.max_thrust * engine.max_flow;

        if (thrust_mag == 0.0 || state.propellant <= 0.0)
        {
            out.propellant_exhausted = state.propellant_exhausted || (thrust_mag > 0.0);
            const Kinematics k = rk4(state.kinematics(), {}, state.mass, 0.0, body.mu, dt);
            out.position = k.position;
            out.velocity = k.velocity;
            return out;
        }

        const double burn_time = flow > 0.0 ? state.propellant / flow : dt;
        if (burn_time >= dt)
        {
            const Kinematics k = rk4(state.kinematics(), thrust, state.mass, flow, body.mu, dt);
            out.position = k.position;
            out.velocity = k.velocity;
            out.propellant = state.propellant - flow * dt;
            out.mass = state.mass - flow * dt;
            return out;
        }

        // Propellant runs dry inside the step: burn, then coast the remainder.
        Kinematics k = rk4(state.kinematics(), thrust, state.mass, flow, body.mu, burn_time);
        const double dry = state.dry_mass();
        if (dt - burn_time > 0.0)
            k = rk4(k, {}, dry, 0.0, body.mu, dt - burn_time);
        out.position = k.position;
        out.velocity = k.velocity;
        out.propellant = 0.0;
        out.mass = dry;
        out.propellant_exhausted = true;
        return out;
    }

    FrameBasis vessel_frame(const Vec3 &pursuer_pos, const Vec3 &evader_pos, const Vec3 &vessel_up)
    {
        const Vec3 los = evader_pos - pursuer_pos;
        const double los_n = norm(los);
        if (!(los_n > 0.0))
            throw DegenerateGeometry("vessel_frame: pursuer and evader coincide");
        const double up_n = norm(vessel_up);
        if (!(up_n > 0.0))
            throw DegenerateGeometry("vessel_frame: zero vessel_up");

        FrameBasis f;
        f.forward = los / los_n;
        // Gram-Schmidt: strip the forward component from vessel_up.
        const Vec3 up_orth = vessel_up - f.forward * dot(vessel_up, f.forward);
        const double orth_n = norm(up_orth);
        if (!(orth_n > kFrameDegenerateTol * up_n))
            throw DegenerateGeometry("vessel_frame: vessel_up is parallel to the line of sight");
        f.up = up_orth / orth_n;
        f.right = cross(f.forward, f.up);
        return f;
    }

    Vec3 compute_prograde(const Vec3 &pursuer_pos, const Vec3 &evader_pos, const Vec3 &pursuer_vel,
                          const Vec3 &evader_vel, const Vec3 &vessel_up)
    {
        const Vec3 rel = pursuer_vel - evader_vel;
        const double rel_n = norm(rel);
        if (!(rel_n > 0.0))
            throw DegenerateGeometry("compute_prograde: zero relative velocity");
        const FrameBasis f = vessel_frame(pursuer_pos, evader_pos, vessel_up);
        return f.to_vessel(rel / rel_n);
    }

    OrbitalElements generate_orbit(const OrbitalElements &evader, const OrbitConstraints &constraints,
                                   std::uint64_t seed, const BodyConstants &body)
    {
        constraints.validate();
        const Kinematics evader_state = elements_to_state(evader, body);
        const double evader_radius = norm(evader_state.position);

        Rng rng(seed);
        for (int attempt = 0; attempt < constraints.max_attempts; ++attempt)
        {
            const double e = rng.uniform(constraints.eccentricity_min, constraints.eccentricity_max);
            const double inc_offset = rng.uniform(-constraints.inclination_offset_max, constraints.inclination_offset_max);
            const double distance = rng.uniform(constraints.distance_min, constraints.distance_max);
            const double radial = distance * rng.uniform(constraints.radial_fraction_min, constraints.radial_fraction_max);

            OrbitalElements el;
            // nu = 0 puts the pursuer at periapsis: r = a (1 - e).
            el.a = (evader_radius + radial) / (1.0 - e);
            el.e = e;
            el.i = std::abs(evader.i + inc_offset);
            el.omega = normalize_angle(evader.omega + evader.nu);
            el.raan = normalize_angle(evader.raan);
            el.nu = 0.0;

            if (!(el.a * (1.0 - el.e) > body.radius))
                continue;

            const Kinematics pursuer_state = elements_to_state(el, body);
            const double separation = norm(pursuer_state.position - evader_state.position);
            if (separation >= constraints.distance_min && separation <= constraints.distance_max)
                return el;
        }
        throw GenerationFailed("generate_orbit: no orbit met the distance constraints within " +
                               std::to_string(constraints.max_attempts) + " attempts");
    }

} // namespace rvlab
