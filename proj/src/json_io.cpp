#include "rvlab/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rvlab
{

    namespace
    {
        using nlohmann::json;

        template <typename T>
        void read_opt(const json &j, const char *key, T &out)
        {
            if (auto it = j.find(key); it != j.end() && !it->is_null())
                out = it->get<T>();
        }

        std::string_view escape_label(EscapeDirection d)
        {
            return d == EscapeDirection::evader_prograde ? "evader_prograde" : "relative_position";
        }
    } // namespace

    void to_json(json &j, const Vec3 &v) { j = json::array({v.x, v.y, v.z}); }

    void from_json(const json &j, Vec3 &v)
    {
        if (!j.is_array() || j.size() != 3)
            throw std::invalid_argument("vector must be a 3-element array");
        v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }

    void to_json(json &j, const Action &a)
    {
        j = json{{"ft", label(a.ft)}, {"rt", label(a.rt)}, {"dt", label(a.dt)}};
        if (a.duration != 0.5)
            j["duration"] = a.duration;
    }

    void from_json(const json &j, Action &a)
    {
        if (!j.is_object())
            throw std::invalid_argument("action must be an object");
        a = Action{};
        const auto ft = parse_fore_aft(j.value("ft", std::string("none")));
        const auto rt = parse_lateral(j.value("rt", std::string("none")));
        const auto dt = parse_vertical(j.value("dt", std::string("none")));
        if (!ft || !rt || !dt)
            throw std::invalid_argument("action has a label outside {backward,none,forward} x {left,none,right} x {down,none,up}");
        a.ft = *ft;
        a.rt = *rt;
        a.dt = *dt;
        read_opt(j, "duration", a.duration);
        if (!(a.duration > 0.0))
            throw std::invalid_argument("action duration must be positive");
    }

    void to_json(json &j, const OrbitalElements &el)
    {
        j = json{{"a", el.a}, {"e", el.e}, {"i", el.i}, {"omega", el.omega}, {"raan", el.raan}, {"nu", el.nu}};
    }

    void from_json(const json &j, OrbitalElements &el)
    {
        el.a = j.at("a").get<double>();
        el.e = j.at("e").get<double>();
        el.i = j.at("i").get<double>();
        el.omega = j.at("omega").get<double>();
        el.raan = j.at("raan").get<double>();
        el.nu = j.at("nu").get<double>();
    }

    void to_json(json &j, const BodyConstants &b) { j = json{{"mu", b.mu}, {"radius", b.radius}}; }

    void from_json(const json &j, BodyConstants &b)
    {
        read_opt(j, "mu", b.mu);
        read_opt(j, "radius", b.radius);
    }

    void to_json(json &j, const EngineConfig &e)
    {
        j = json{{"max_thrust", e.max_thrust}, {"max_flow", e.max_flow}, {"dry_mass", e.dry_mass}, {"propellant", e.propellant}};
    }

    void from_json(const json &j, EngineConfig &e)
    {
        read_opt(j, "max_thrust", e.max_thrust);
        read_opt(j, "max_flow", e.max_flow);
        read_opt(j, "dry_mass", e.dry_mass);
        read_opt(j, "propellant", e.propellant);
    }

    void to_json(json &j, const OrbitConstraints &c)
    {
        j = json{
                {"distance_min", c.distance_min},
                {"distance_max", c.distance_max},
                {"eccentricity_min", c.eccentricity_min},
                {"eccentricity_max", c.eccentricity_max},
                {"inclination_offset_max", c.inclination_offset_max},
                {"radial_fraction_min", c.radial_fraction_min},
                {"radial_fraction_max", c.radial_fraction_max},
                {"max_attempts", c.max_attempts},
        };
    }

    void from_json(const json &j, OrbitConstraints &c)
    {
        read_opt(j, "distance_min", c.distance_min);
        read_opt(j, "distance_max", c.distance_max);
        read_opt(j, "eccentricity_min", c.eccentricity_min);
        read_opt(j, "eccentricity_max", c.eccentricity_max);
        read_opt(j, "inclination_offset_max", c.inclination_offset_max);
        read_opt(j, "radial_fraction_min", c.radial_fraction_min);
        read_opt(j, "radial_fraction_max", c.radial_fraction_max);
        read_opt(j, "max_attempts", c.max_attempts);
    }

    void to_json(json &j, const ScoreWeights &w)
    {
        auto term = [](const ScoreWeights::Term &t) { return json{{"scale", t.scale}, {"exponent", t.exponent}}; };
        j = json{{"distance", term(w.distance)}, {"velocity", term(w.velocity)}, {"fuel", term(w.fuel)}, {"time", term(w.time)}};
    }

    void from_json(const json &j, ScoreWeights &w)
    {
        auto term = [&j](const char *key, ScoreWeights::Term &t) {
            if (auto it = j.find(key); it != j.end())
            {
                read_opt(*it, "scale", t.scale);
                read_opt(*it, "exponent", t.exponent);
            }
        };
        term("distance", w.distance);
        term("velocity", w.velocity);
        term("fuel", w.fuel);
        term("time", w.time);
    }

    void to_json(json &j, const EpisodeConfig &c)
    {
        j = json{
                {"scenario_id", c.scenario_id},
                {"seed", c.seed},
                {"max_duration", c.max_duration},
                {"decision_period", c.decision_period},
                {"integration_step", c.integration_step},
                {"evader_threshold", c.evader_threshold},
                {"escape", escape_label(c.escape)},
                {"evader_elements", c.evader_elements},
                {"pursuer_elements", c.pursuer_elements ? json(*c.pursuer_elements) : json()},
                {"pursuer_constraints", c.pursuer_constraints},
                {"body", c.body},
                {"pursuer_engine", c.pursuer_engine},
                {"evader_engine", c.evader_engine},
                {"weights", c.weights},
                {"stop_on_propellant_exhausted", c.stop_on_propellant_exhausted},
        };
    }

    void from_json(const json &j, EpisodeConfig &c)
    {
        if (!j.is_object())
            throw std::invalid_argument("episode config must be an object");
        read_opt(j, "scenario_id", c.scenario_id);
        read_opt(j, "seed", c.seed);
        read_opt(j, "max_duration", c.max_duration);
        read_opt(j, "decision_period", c.decision_period);
        read_opt(j, "integration_step", c.integration_step);
        read_opt(j, "evader_threshold", c.evader_threshold);
        if (auto it = j.find("escape"); it != j.end() && it->is_string())
        {
            const auto s = it->get<std::string>();
            if (s == "relative_position")
                c.escape = EscapeDirection::relative_position;
            else if (s == "evader_prograde")
                c.escape = EscapeDirection::evader_prograde;
            else
                throw std::invalid_argument("unknown escape direction '" + s + "'");
        }
        read_opt(j, "evader_elements", c.evader_elements);
        if (auto it = j.find("pursuer_elements"); it != j.end())
            c.pursuer_elements = it->is_null() ? std::nullopt : std::optional<OrbitalElements>(it->get<OrbitalElements>());
        if (auto it = j.find("pursuer_constraints"); it != j.end())
            from_json(*it, c.pursuer_constraints);
        if (auto it = j.find("body"); it != j.end())
            from_json(*it, c.body);
        if (auto it = j.find("pursuer_engine"); it != j.end())
            from_json(*it, c.pursuer_engine);
        if (auto it = j.find("evader_engine"); it != j.end())
            from_json(*it, c.evader_engine);
        if (auto it = j.find("weights"); it != j.end())
            from_json(*it, c.weights);
        read_opt(j, "stop_on_propellant_exhausted", c.stop_on_propellant_exhausted);
    }

    void to_json(json &j, const Observation &o)
    {
        j = json{
                {"time", o.time},
                {"vehicle_mass", o.vehicle_mass},
                {"vehicle_propellant", o.vehicle_propellant},
                {"pursuer_pos", o.pursuer_pos},
                {"pursuer_vel", o.pursuer_vel},
                {"evader_pos", o.evader_pos},
                {"evader_vel", o.evader_vel},
                {"prograde", o.prograde ? json(*o.prograde) : json()},
                {"range", o.range},
                {"range_rate", o.range_rate},
        };
    }

    void from_json(const json &j, Observation &o)
    {
        o.time = j.at("time").get<double>();
        o.vehicle_mass = j.at("vehicle_mass").get<double>();
        o.vehicle_propellant = j.at("vehicle_propellant").get<double>();
        o.pursuer_pos = j.at("pursuer_pos").get<Vec3>();
        o.pursuer_vel = j.at("pursuer_vel").get<Vec3>();
        o.evader_pos = j.at("evader_pos").get<Vec3>();
        o.evader_vel = j.at("evader_vel").get<Vec3>();
        const auto &p = j.at("prograde");
        o.prograde = p.is_null() ? std::nullopt : std::optional<Vec3>(p.get<Vec3>());
        o.range = j.at("range").get<double>();
        o.range_rate = j.at("range_rate").get<double>();
    }

    void to_json(json &j, const Kinematics &k) { j = json{{"pos", k.position}, {"vel", k.velocity}}; }

    void from_json(const json &j, Kinematics &k)
    {
        k.position = j.at("pos").get<Vec3>();
        k.velocity = j.at("vel").get<Vec3>();
    }

    void to_json(json &j, const TrajectorySample &s)
    {
        j = json{
                {"t", s.t},
                {"pursuer", s.pursuer},
                {"evader", s.evader},
                {"action", s.action},
                {"range", s.range},
                {"range_rate", s.range_rate},
                {"propellant", s.propellant},
        };
    }

    void from_json(const json &j, TrajectorySample &s)
    {
        s.t = j.at("t").get<double>();
        s.pursuer = j.at("pursuer").get<Kinematics>();
        s.evader = j.at("evader").get<Kinematics>();
        s.action = j.at("action").get<Action>();
        s.range = j.at("range").get<double>();
        s.range_rate = j.at("range_rate").get<double>();
        s.propellant = j.at("propellant").get<double>();
    }

    json result_summary(const EpisodeResult &r)
    {
        return {
                {"closest_distance", r.closest_distance},
                {"speed_at_closest", r.speed_at_closest},
                {"fuel_used", r.fuel_used},
                {"elapsed", r.elapsed},
                {"score", r.score},
                {"ticks", r.ticks},
                {"termination", termination_label(r.termination)},
        };
    }

    void to_json(json &j, const GameplayLog &log)
    {
        json samples = json::array();
        for (const GameplaySample &s : log.samples)
            samples.push_back({{"tick", s.tick}, {"observation", s.observation}, {"action", s.action}});
        j = json{
                {"metadata",
                 {
                         {"seed", log.meta.seed},
                         {"scenario", log.meta.scenario},
                         {"agent", log.meta.agent},
                         {"params", log.meta.params},
                         {"decision_period", log.meta.decision_period},
                         {"complete", log.meta.complete},
                         {"termination", termination_label(log.meta.termination)},
                         {"error", log.meta.error},
                 }},
                {"config", log.config},
                {"samples", samples},
        };
    }

    void from_json(const json &j, GameplayLog &log)
    {
        const json &m = j.at("metadata");
        log.meta.seed = m.at("seed").get<std::uint64_t>();
        log.meta.scenario = m.at("scenario").get<std::string>();
        log.meta.agent = m.at("agent").get<std::string>();
        log.meta.params = m.value("params", json::object());
        log.meta.decision_period = m.at("decision_period").get<double>();
        log.meta.complete = m.at("complete").get<bool>();
        const auto term = parse_termination(m.at("termination").get<std::string>());
        if (!term)
            throw std::invalid_argument("gameplay log: unknown termination");
        log.meta.termination = *term;
        log.meta.error = m.value("error", std::string{});

        log.config = EpisodeConfig{};
        from_json(j.at("config"), log.config);

        log.samples.clear();
        for (const json &s : j.at("samples"))
            log.samples.push_back({s.at("tick").get<int>(), s.at("observation").get<Observation>(), s.at("action").get<Action>()});
    }

    std::string read_text(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_text(const std::filesystem::path &path, const std::string &text)
    {
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
        out << text;
    }

    GameplayLog read_gameplay_log(const std::filesystem::path &path)
    {
        return json::parse(read_text(path)).get<GameplayLog>();
    }

    void write_gameplay_log(const GameplayLog &log, const std::filesystem::path &path)
    {
        write_text(path, json(log).dump() + "\n");
    }

} // namespace rvlab
