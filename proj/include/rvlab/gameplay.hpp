#pragma once

#include "rvlab/action.hpp"
#include "rvlab/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace rvlab
{

    struct GameplaySample
    {
        int tick{0};
        Observation observation; ///< state seen before the action
        Action action;

        friend bool operator==(const GameplaySample &, const GameplaySample &) = default;
    };

    struct GameplayMetadata
    {
        std::uint64_t seed{0};
        std::string scenario{kScenarioId};
        std::string agent;          ///< navball, naive, llm, oracle, mock, human
        nlohmann::json params = nlohmann::json::object();
        double decision_period{0.5};
        bool complete{true};        ///< false when the episode was cut short by a failure
        Termination termination{Termination::running};
        std::string error;

        friend bool operator==(const GameplayMetadata &, const GameplayMetadata &) = default;
    };

    /// Observation/action pairs at every decision tick, plus the configuration
    /// needed to replay them.
    struct GameplayLog
    {
        GameplayMetadata meta;
        EpisodeConfig config;
        std::vector<GameplaySample> samples;

        /// Ticks consecutive from 0, observation times exactly tick * period.
        void validate() const;

        friend bool operator==(const GameplayLog &, const GameplayLog &) = default;
    };

} // namespace rvlab
