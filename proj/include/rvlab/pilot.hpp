#pragma once

#include "rvlab/gameplay.hpp"
#include "rvlab/navball.hpp"
#include "rvlab/scenario.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace rvlab
{

    struct PilotStats
    {
        long attempts{0};
        long failures{0};
        long defaults_emitted{0};
        std::vector<double> latencies_ms; ///< one per attempt
        std::map<std::string, long> failures_by_kind;
    };

    /// Anything that maps an observation to a throttle command.
    class Pilot
    {
    public:
        virtual ~Pilot() = default;

        virtual std::string kind() const = 0;
        virtual Action act(const Observation &obs) = 0;
        virtual PilotStats stats() const { return {}; }
        virtual nlohmann::json params() const { return nlohmann::json::object(); }
        /// True when identical inputs always yield identical actions.
        virtual bool deterministic() const { return true; }
    };

    /// Baseline fixture: burn straight at the target every tick.
    class NaivePilot final : public Pilot
    {
    public:
        std::string kind() const override { return "naive"; }
        Action act(const Observation &) override { return {ForeAft::forward, Lateral::none, Vertical::none}; }
    };

    class NavballPilot final : public Pilot
    {
    public:
        explicit NavballPilot(NavballParams params = {});

        std::string kind() const override { return "navball"; }
        Action act(const Observation &obs) override { return navball_action(obs, params_); }
        nlohmann::json params() const override;

    private:
        NavballParams params_;
    };

    /// Plays back a recorded action list; coasts once it runs out.
    class ReplayPilot final : public Pilot
    {
    public:
        explicit ReplayPilot(std::vector<Action> actions) : actions_(std::move(actions)) {}

        std::string kind() const override { return "replay"; }
        Action act(const Observation &) override
        {
            return next_ < actions_.size() ? actions_[next_++] : Action::coast();
        }

    private:
        std::vector<Action> actions_;
        std::size_t next_{0};
    };

    struct Flight
    {
        GameplayLog log;
        EpisodeResult result;
        PilotStats stats;
    };

    /// Runs one episode to completion, sampling every decision tick. A pilot
    /// exception aborts the episode; the partial log is flagged incomplete.
    Flight fly(Pilot &pilot, const EpisodeConfig &config);

} // namespace rvlab
