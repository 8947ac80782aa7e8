#include "rvlab/pilot.hpp"

#include <cmath>
#include <stdexcept>

namespace rvlab
{

    void GameplayLog::validate() const
    {
        if (!(meta.decision_period > 0.0))
            throw std::invalid_argument("gameplay log: decision period must be positive");
        for (std::size_t k = 0; k < samples.size(); ++k)
        {
            const GameplaySample &s = samples[k];
            if (s.tick != static_cast<int>(k))
                throw std::invalid_argument("gameplay log: ticks must be consecutive from 0");
            if (s.observation.time != s.tick * meta.decision_period)
                throw std::invalid_argument("gameplay log: sample time off the decision grid at tick " +
                                            std::to_string(s.tick));
        }
    }

    NavballPilot::NavballPilot(NavballParams params) : params_(params) { params_.validate(); }

    nlohmann::json NavballPilot::params() const
    {
        nlohmann::json j{
                {"rotation_threshold", params_.rotation_threshold},
                {"approach_speed", params_.approach_speed},
                {"max_thrust", params_.max_thrust},
        };
        j["vessel_acceleration"] = params_.vessel_acceleration ? nlohmann::json(*params_.vessel_acceleration) : nlohmann::json();
        return j;
    }

    Flight fly(Pilot &pilot, const EpisodeConfig &config)
    {
        Flight flight;
        GameplayLog &log = flight.log;
        log.config = config;
        log.meta.seed = config.seed;
        log.meta.scenario = config.scenario_id;
        log.meta.agent = pilot.kind();
        log.meta.params = pilot.params();
        log.meta.decision_period = config.decision_period;

        Episode episode;
        Observation obs = episode.reset(config);
        while (!episode.done())
        {
            Action action;
            try
            {
                action = pilot.act(obs);
            }
            catch (const std::exception &e)
            {
                episode.abort();
                log.meta.complete = false;
                log.meta.error = e.what();
                break;
            }
            log.samples.push_back({episode.tick(), obs, action});
            obs = episode.step(action).observation;
        }

        flight.result = episode.result();
        log.meta.termination = flight.result.termination;
        flight.stats = pilot.stats();
        return flight;
    }

} // namespace rvlab
