#pragma once

#include "rvlab/action.hpp"
#include "rvlab/gameplay.hpp"
#include "rvlab/orbital.hpp"
#include "rvlab/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

// nlohmann ADL hooks. Readers are lenient about missing fields in
// configuration objects (defaults apply) and strict about field types.
namespace rvlab
{

    void to_json(nlohmann::json &j, const Vec3 &v);
    void from_json(const nlohmann::json &j, Vec3 &v);

    void to_json(nlohmann::json &j, const Action &a);
    void from_json(const nlohmann::json &j, Action &a);

    void to_json(nlohmann::json &j, const OrbitalElements &el);
    void from_json(const nlohmann::json &j, OrbitalElements &el);

    void to_json(nlohmann::json &j, const BodyConstants &b);
    void from_json(const nlohmann::json &j, BodyConstants &b);

    void to_json(nlohmann::json &j, const EngineConfig &e);
    void from_json(const nlohmann::json &j, EngineConfig &e);

    void to_json(nlohmann::json &j, const OrbitConstraints &c);
    void from_json(const nlohmann::json &j, OrbitConstraints &c);

    void to_json(nlohmann::json &j, const ScoreWeights &w);
    void from_json(const nlohmann::json &j, ScoreWeights &w);

    void to_json(nlohmann::json &j, const EpisodeConfig &c);
    /// Fields absent from j keep the values already in c.
    void from_json(const nlohmann::json &j, EpisodeConfig &c);

    void to_json(nlohmann::json &j, const Observation &o);
    void from_json(const nlohmann::json &j, Observation &o);

    void to_json(nlohmann::json &j, const Kinematics &k);
    void from_json(const nlohmann::json &j, Kinematics &k);

    /// {t, pursuer{pos,vel}, evader{pos,vel}, action, range, range_rate, propellant}
    void to_json(nlohmann::json &j, const TrajectorySample &s);
    void from_json(const nlohmann::json &j, TrajectorySample &s);

    /// Summary fields only; the trajectory travels separately.
    nlohmann::json result_summary(const EpisodeResult &r);

    void to_json(nlohmann::json &j, const GameplayLog &log);
    void from_json(const nlohmann::json &j, GameplayLog &log);

    GameplayLog read_gameplay_log(const std::filesystem::path &path);
    void write_gameplay_log(const GameplayLog &log, const std::filesystem::path &path);

    std::string read_text(const std::filesystem::path &path);
    void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace rvlab
