#include "rvlab/scenario.hpp"

#include <cmath>

namespace rvlab
{

    namespace
    {
        // sin(angle) between radial-out and the line of sight below which the
        // orbit normal replaces radial-out as the up reference.
        constexpr double kUpFallbackSin = 1e-3;

        double score_term(double value, const ScoreWeights::Term &term)
        {
            return std::pow(term.scale * value, term.exponent);
        }

        VesselState initial_vessel(const Kinematics &k, const EngineConfig &engine)
        {
            VesselState v;
            v.position = k.position;
            v.velocity = k.velocity;
            v.propellant = engine.propellant;
            v.mass = engine.dry_mass + engine.propellant;
            return v;
        }

        double range_rate_of(const Kinematics &p, const Kinematics &e)
        {
            const Vec3 rel_pos = e.position - p.position;
            const double r = norm(rel_pos);
            return r > 0.0 ? dot(rel_pos, e.velocity - p.velocity) / r : 0.0;
        }
    } // namespace

    void ScoreWeights::validate() const
    {
        for (const Term *t : {&distance, &velocity, &fuel, &time})
            if (!(t->scale > 0.0) || !(t->exponent > 0.0))
                throw std::invalid_argument("score weights: scales and exponents must be positive");
    }

    double compute_score(double distance, double speed, double fuel, double time, const ScoreWeights &w)
    {
        if (!(distance >= 0.0) || !(speed >= 0.0) || !(fuel >= 0.0) || !(time >= 0.0))
            throw std::invalid_argument("compute_score: components must be non-negative");
        return score_term(distance, w.distance) + score_term(speed, w.velocity) + score_term(fuel, w.fuel) +
               score_term(time, w.time);
    }

    Vec3 evader_policy_e3(const VesselState &evader, const VesselState &pursuer, const EvaderPolicy &policy)
    {
        const Vec3 away = evader.position - pursuer.position;
        const double range = norm(away);
        if (!(range < policy.threshold))
            return {};
        if (policy.direction == EscapeDirection::evader_prograde)
            return unit(evader.velocity) * policy.max_thrust;
        if (!(range > 0.0))
            return {};
        return away / range * policy.max_thrust;
    }

    void EpisodeConfig::validate() const
    {
        if (scenario_id != kScenarioId)
            throw std::invalid_argument("episode config: unsupported scenario '" + scenario_id + "'");
        if (!(max_duration > 0.0))
            throw std::invalid_argument("episode config: max_duration must be positive");
        if (!(decision_period > 0.0))
            throw std::invalid_argument("episode config: decision_period must be positive");
        if (!(integration_step > 0.0) || integration_step > decision_period)
            throw std::invalid_argument("episode config: integration_step must lie in (0, decision_period]");
        if (!(evader_threshold > 0.0))
            throw std::invalid_argument("episode config: evader_threshold must be positive");
        const double n = decision_period / integration_step;
        if (std::abs(n - std::round(n)) > 1e-9)
            throw std::invalid_argument("episode config: integration_step must divide decision_period");
        body.validate();
        pursuer_engine.validate();
        evader_engine.validate();
        weights.validate();
        if (!(evader_elements.a * (1.0 - evader_elements.e) > body.radius))
            throw std::invalid_argument("episode config: evader periapsis is below the body surface");
        if (pursuer_elements)
        {
            if (!(pursuer_elements->a * (1.0 - pursuer_elements->e) > body.radius))
                throw std::invalid_argument("episode config: pursuer periapsis is below the body surface");
        }
        else
        {
            pursuer_constraints.validate();
        }
    }

    int EpisodeConfig::substeps_per_tick() const
    {
        return static_cast<int>(std::lround(decision_period / integration_step));
    }

    std::string_view termination_label(Termination t)
    {
        switch (t)
        {
        case Termination::running:
            return "running";
        case Termination::max_duration:
            return "max_duration";
        case Termination::propellant_exhausted:
            return "propellant_exhausted";
        case Termination::aborted:
            return "aborted";
        }
        return "running";
    }

    std::optional<Termination> parse_termination(std::string_view s)
    {
        for (Termination t : {Termination::running, Termination::max_duration, Termination::propellant_exhausted,
                              Termination::aborted})
            if (termination_label(t) == s)
                return t;
        return std::nullopt;
    }

    FrameBasis pursuer_frame(const Kinematics &pursuer, const Vec3 &evader_pos)
    {
        const Vec3 radial_out = unit(pursuer.position);
        const Vec3 los = evader_pos - pursuer.position;
        const double los_n = norm(los);
        if (los_n > 0.0 && norm(cross(radial_out, los / los_n)) < kUpFallbackSin)
            return vessel_frame(pursuer.position, evader_pos, cross(pursuer.position, pursuer.velocity));
        return vessel_frame(pursuer.position, evader_pos, radial_out);
    }

    Observation make_observation(double time, const VesselState &pursuer, const VesselState &evader)
    {
        Observation obs;
        obs.time = time;
        obs.vehicle_mass = pursuer.mass;
        obs.vehicle_propellant = pursuer.propellant;
        obs.pursuer_pos = pursuer.position;
        obs.pursuer_vel = pursuer.velocity;
        obs.evader_pos = evader.position;
        obs.evader_vel = evader.velocity;
        obs.range = norm(evader.position - pursuer.position);
        obs.range_rate = range_rate_of(pursuer.kinematics(), evader.kinematics());

        const Vec3 rel_vel = pursuer.velocity - evader.velocity;
        if (norm(rel_vel) > 0.0 && obs.range > 0.0)
        {
            try
            {
                const FrameBasis frame = pursuer_frame(pursuer.kinematics(), evader.position);
                obs.prograde = frame.to_vessel(unit(rel_vel));
            }
            catch (const DegenerateGeometry &)
            {
                obs.prograde.reset();
            }
        }
        return obs;
    }

    Observation Episode::reset(const EpisodeConfig &config)
    {
        config.validate();
        config_ = config;

        const OrbitalElements pursuer_el = config.pursuer_elements
                                                   ? *config.pursuer_elements
                                                   : generate_orbit(config.evader_elements, config.pursuer_constraints,
                                                                    config.seed, config.body);

        pursuer_ = initial_vessel(elements_to_state(pursuer_el, config.body), config.pursuer_engine);
        evader_ = initial_vessel(elements_to_state(config.evader_elements, config.body), config.evader_engine);
        initial_propellant_ = pursuer_.propellant;
        tick_ = 0;
        started_ = true;
        done_ = false;
        termination_ = Termination::running;
        trajectory_.clear();
        closest_ = norm(evader_.position - pursuer_.position);
        speed_at_closest_ = norm(pursuer_.velocity - evader_.velocity);
        track(Action::coast());
        return observation();
    }

    Observation Episode::observation() const { return make_observation(time(), pursuer_, evader_); }

    void Episode::track(const Action &action)
    {
        const double range = norm(evader_.position - pursuer_.position);
        if (range < closest_)
        {
            closest_ = range;
            speed_at_closest_ = norm(pursuer_.velocity - evader_.velocity);
        }
        TrajectorySample s;
        // Anchored to the tick grid so sample times do not accumulate rounding.
        const int substeps = config_.substeps_per_tick();
        const auto index = static_cast<int>(trajectory_.size());
        s.t = (index / substeps) * config_.decision_period + (index % substeps) * config_.integration_step;
        s.pursuer = pursuer_.kinematics();
        s.evader = evader_.kinematics();
        s.action = action;
        s.range = range;
        s.range_rate = range_rate_of(s.pursuer, s.evader);
        s.propellant = pursuer_.propellant;
        trajectory_.push_back(s);
    }

    StepOutcome Episode::step(const Action &action)
    {
        if (!started_ || done_)
            throw EpisodeNotActive("step: episode is not active (call reset first; no steps after done)");
        if (!(action.duration > 0.0))
            throw std::invalid_argument("step: action duration must be positive");

        const Vec3 throttle = action_to_throttle(action);
        const EvaderPolicy evader_policy{config_.evader_threshold, config_.evader_engine.max_thrust, config_.escape};
        const int substeps = config_.substeps_per_tick();
        const double h = config_.integration_step;

        for (int k = 0; k < substeps; ++k)
        {
            Vec3 pursuer_thrust;
            const bool burning = k * h < action.duration - 1e-12;
            if (burning && !action.is_coast())
            {
                const FrameBasis frame = pursuer_frame(pursuer_.kinematics(), evader_.position);
                pursuer_thrust = frame.to_body(throttle) * config_.pursuer_engine.max_thrust;
            }
            const Vec3 evader_thrust = evader_policy_e3(evader_, pursuer_, evader_policy);

            const VesselState next_pursuer = propagate(pursuer_, pursuer_thrust, config_.pursuer_engine, config_.body, h);
            const VesselState next_evader = propagate(evader_, evader_thrust, config_.evader_engine, config_.body, h);
            pursuer_ = next_pursuer;
            evader_ = next_evader;
            track(action);
        }

        ++tick_;
        if (time() >= config_.max_duration - 1e-9)
        {
            done_ = true;
            termination_ = Termination::max_duration;
        }
        else if (config_.stop_on_propellant_exhausted && pursuer_.propellant <= 0.0)
        {
            done_ = true;
            termination_ = Termination::propellant_exhausted;
        }
        return {observation(), done_};
    }

    void Episode::abort()
    {
        if (!started_ || done_)
            return;
        done_ = true;
        termination_ = Termination::aborted;
    }

    EpisodeResult Episode::result() const
    {
        EpisodeResult r = summary();
        r.trajectory = trajectory_;
        return r;
    }

    EpisodeResult Episode::summary() const
    {
        EpisodeResult r;
        r.closest_distance = closest_;
        r.speed_at_closest = speed_at_closest_;
        r.fuel_used = initial_propellant_ - pursuer_.propellant;
        r.elapsed = time();
        r.ticks = tick_;
        r.termination = termination_;
        r.score = compute_score(r.closest_distance, r.speed_at_closest, r.fuel_used, r.elapsed, config_.weights);
        return r;
    }

} // namespace rvlab
