#pragma once

#include "rvlab/action.hpp"
#include "rvlab/orbital.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvlab
{

    inline constexpr const char *kScenarioId = "pursuer-evader-E3";

    /// Per-tick mission state handed to agents, plus derived augmentations.
    struct Observation
    {
        double time{0.0};               ///< s since reset
        double vehicle_mass{0.0};       ///< kg
        double vehicle_propellant{0.0}; ///< kg
        Vec3 pursuer_pos;
        Vec3 pursuer_vel;
        Vec3 evader_pos;
        Vec3 evader_vel;
        std::optional<Vec3> prograde; ///< vessel frame; absent when relative velocity is zero
        double range{0.0};            ///< m
        double range_rate{0.0};       ///< m/s, negative while closing

        friend bool operator==(const Observation &, const Observation &) = default;
    };

    struct ScoreWeights
    {
        struct Term
        {
            double scale{1.0};
            double exponent{1.0};
            friend bool operator==(const Term &, const Term &) = default;
        };

        Term distance{0.1, 2.0};
        Term velocity{0.5, 1.5};
        Term fuel{0.1, 1.25};
        Term time{0.01, 1.0};

        void validate() const;
        friend bool operator==(const ScoreWeights &, const ScoreWeights &) = default;
    };

    /// Sum over components of (scale * value)^exponent. Throws on negative input.
    double compute_score(double distance, double speed, double fuel, double time, const ScoreWeights &w = {});

    enum class EscapeDirection
    {
        relative_position, ///< straight away from the pursuer
        evader_prograde,   ///< along the evader's own velocity
    };

    struct EvaderPolicy
    {
        double threshold{400.0}; ///< m; triggers strictly below
        double max_thrust{8000.0};
        EscapeDirection direction{EscapeDirection::relative_position};
    };

    /// E3 evader: full thrust to escape once the pursuer is inside the threshold.
    Vec3 evader_policy_e3(const VesselState &evader, const VesselState &pursuer, const EvaderPolicy &policy);

    struct EpisodeConfig
    {
        std::string scenario_id{kScenarioId};
        std::uint64_t seed{0};
        double max_duration{240.0};   ///< s
        double decision_period{0.5};  ///< s
        double integration_step{0.1}; ///< s, must divide decision_period
        double evader_threshold{400.0};
        EscapeDirection escape{EscapeDirection::relative_position};
        OrbitalElements evader_elements{750000.0, 0.0, 0.1, 0.0, 0.5, 1.0};
        std::optional<OrbitalElements> pursuer_elements; ///< fixed orbit; generated from the seed when absent
        OrbitConstraints pursuer_constraints;
        BodyConstants body;
        EngineConfig pursuer_engine;
        EngineConfig evader_engine;
        ScoreWeights weights;
        bool stop_on_propellant_exhausted{true};

        void validate() const;
        int substeps_per_tick() const;

        friend bool operator==(const EpisodeConfig &, const EpisodeConfig &) = default;
    };

    enum class Termination
    {
        running,
        max_duration,
        propellant_exhausted,
        aborted,
    };

    std::string_view termination_label(Termination t);
    std::optional<Termination> parse_termination(std::string_view s);

    struct TrajectorySample
    {
        double t{0.0};
        Kinematics pursuer;
        Kinematics evader;
        Action action;
        double range{0.0};
        double range_rate{0.0};
        double propellant{0.0};

        friend bool operator==(const TrajectorySample &, const TrajectorySample &) = default;
    };

    struct EpisodeResult
    {
        double closest_distance{0.0}; ///< m, minimum over integrator substeps
        double speed_at_closest{0.0}; ///< m/s, relative speed at that substep
        double fuel_used{0.0};        ///< kg
        double elapsed{0.0};          ///< s
        double score{0.0};
        int ticks{0};
        Termination termination{Termination::running};
        std::vector<TrajectorySample> trajectory; ///< initial state plus one row per substep

        friend bool operator==(const EpisodeResult &, const EpisodeResult &) = default;
    };

    /// Axes used for the pursuer: up is radial-out, or the orbit normal when the
    /// target sits almost straight above or below.
    FrameBasis pursuer_frame(const Kinematics &pursuer, const Vec3 &evader_pos);

    Observation make_observation(double time, const VesselState &pursuer, const VesselState &evader);

    class EpisodeNotActive : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    struct StepOutcome
    {
        Observation observation;
        bool done{false};
    };

    /// One Pursuer-Evader episode. Strictly sequential: reset, then step until done.
    class Episode
    {
    public:
        Episode() = default;

        Observation reset(const EpisodeConfig &config);
        StepOutcome step(const Action &action);

        bool active() const { return started_ && !done_; }
        bool done() const { return done_; }
        int tick() const { return tick_; }
        double time() const { return tick_ * config_.decision_period; }
        const EpisodeConfig &config() const { return config_; }
        const VesselState &pursuer() const { return pursuer_; }
        const VesselState &evader() const { return evader_; }
        Observation observation() const;

        /// Marks a running episode as aborted (agent or transport failure).
        void abort();

        /// Result so far; final once done() is true.
        EpisodeResult result() const;
        /// result() without the trajectory.
        EpisodeResult summary() const;

    private:
        void track(const Action &action);

        EpisodeConfig config_;
        VesselState pursuer_;
        VesselState evader_;
        double initial_propellant_{0.0};
        int tick_{0};
        bool started_{false};
        bool done_{false};
        Termination termination_{Termination::running};
        double closest_{0.0};
        double speed_at_closest_{0.0};
        std::vector<TrajectorySample> trajectory_;
    };

} // namespace rvlab
