// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "rvlab/dataset.hpp"
#include "rvlab/eval.hpp"
#include "rvlab/llm/agent.hpp"
#include "rvlab/llm/parse.hpp"
#include "rvlab/orbital.hpp"
#include "rvlab/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace rvlab;

namespace
{
    constexpr double pi = std::numbers::pi;
    const BodyConstants kerbin{};

    struct Outcome
    {
        bool ok{true};
        std::string detail;

        void fail(const std::string &why)
        {
            if (ok)
                detail = why;
            ok = false;
        }
    };

    struct Criterion
    {
        std::string name;
        double budget_s;
        std::function<Outcome()> run;
    };

    std::string fmt(const char *f, double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, v);
        return buf;
    }

    double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

    double angle_diff(double a, double b)
    {
        const double d = std::fmod(std::abs(a - b), 2 * pi);
        return std::min(d, 2 * pi - d);
    }

    Vec3 random_unit(Rng &rng)
    {
        for (;;)
        {
            const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const double n = norm(v);
            if (n > 0.1 && n <= 1.0)
                return v / n;
        }
    }

    Outcome scoring()
    {
        Outcome o;
        const double s = compute_score(100, 10, 100, 100);
        if (std::abs(s - 129.963) > 1e-3)
            o.fail("score(100,10,100,100) = " + fmt("%.6f", s));
        if (compute_score(0, 0, 0, 0) != 0.0)
            o.fail("zero input gives nonzero score");
        const ScoreWeights w;
        for (double t : {0.0, 7.0, 100.0, 240.0, 1234.5})
            if (compute_score(0, 0, 0, t) != w.time.scale * t)
                o.fail("time term not exactly linear at t=" + fmt("%g", t));
        if (compute_score(50, 3, 20, 200) - compute_score(50, 3, 20, 100) != 1.0)
            o.fail("100 s of extra time does not add exactly 1");
        if (o.ok)
            o.detail = "score " + fmt("%.4f", s);
        return o;
    }

    Outcome cross_entropy_consistency()
    {
        Outcome o;
        std::vector<Action> truth, pred;
        Rng rng(49);
        for (int k = 0; k < 1000; ++k)
        {
            const int c = static_cast<int>(rng.below(27));
            truth.push_back(action_from_class(c));
            pred.push_back(k < 49 ? truth.back() : action_from_class((c + 1 + static_cast<int>(rng.below(26))) % 27));
        }
        const double acc = eval::action_accuracy(pred, truth);
        const double ce = eval::cross_entropy(pred, truth);
        if (std::abs(acc - 0.049) > 1e-12)
            o.fail("accuracy " + fmt("%.4f", acc));
        if (std::abs(ce - 34.27) > 0.1)
            o.fail("mean CE " + fmt("%.4f", ce));
        if (o.ok)
            o.detail = "accuracy 0.049 -> CE " + fmt("%.4f", ce);
        return o;
    }

    Outcome frame_and_prograde()
    {
        Outcome o;
        Rng rng(2024);
        double worst_orth = 0, worst_norm = 0, worst_oracle = 0;
        for (int n = 0; n < 10000; ++n)
        {
            const Vec3 pp = random_unit(rng) * rng.uniform(6.1e5, 9e5);
            const Vec3 pe = pp + random_unit(rng) * rng.uniform(1, 5000);
            const Vec3 vp = random_unit(rng) * 2300.0;
            const Vec3 ve = vp + random_unit(rng) * rng.uniform(0.01, 100);
            const Vec3 up = unit(pp);

            const FrameBasis f = vessel_frame(pp, pe, up);
            const Vec3 cols[3] = {f.right, f.forward, f.up};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    worst_orth = std::max(worst_orth, std::abs(dot(cols[a], cols[b]) - (a == b ? 1.0 : 0.0)));

            const Vec3 p = compute_prograde(pp, pe, vp, ve, up);
            worst_norm = std::max(worst_norm, std::abs(norm(p) - 1.0));

            const Vec3 ef = unit(pe - pp);
            const Vec3 eu = unit(up - ef * dot(up, ef));
            const Vec3 er = cross(ef, eu);
            const Vec3 dv = unit(vp - ve);
            worst_oracle = std::max({worst_oracle, std::abs(p.x - dot(dv, er)), std::abs(p.y - dot(dv, ef)),
                                     std::abs(p.z - dot(dv, eu))});
        }
        if (worst_orth >= 1e-10)
            o.fail("orthonormality error " + fmt("%.3g", worst_orth));
        if (worst_norm >= 1e-12)
            o.fail("prograde norm error " + fmt("%.3g", worst_norm));
        if (worst_oracle >= 1e-12)
            o.fail("oracle disagreement " + fmt("%.3g", worst_oracle));
        if (o.ok)
            o.detail = "max |R^T R - I| " + fmt("%.2g", worst_orth) + ", oracle " + fmt("%.2g", worst_oracle);
        return o;
    }

    Outcome dynamics()
    {
        Outcome o;
        const Kinematics k0 = elements_to_state({750000.0, 0.05, 0.2, 0.3, 0.4, 0.5}, kerbin);
        VesselState s{k0.position, k0.velocity, 5000.0, 1000.0, false};
        const double e0 = specific_energy(s.kinematics(), kerbin);
        const double h0 = norm(cross(s.position, s.velocity));
        for (int k = 0; k < 3000; ++k)
            s = propagate(s, {}, EngineConfig{}, kerbin, 0.1);
        const double de = rel(specific_energy(s.kinematics(), kerbin), e0);
        const double dh = rel(norm(cross(s.position, s.velocity)), h0);
        if (de >= 1e-9)
            o.fail("energy drift " + fmt("%.3g", de));
        if (dh >= 1e-9)
            o.fail("angular momentum drift " + fmt("%.3g", dh));

        Rng rng(20240601);
        double worst = 0;
        for (int n = 0; n < 1000; ++n)
        {
            const OrbitalElements in{rng.uniform(650000, 5000000), rng.uniform(0.01, 0.8), rng.uniform(0.05, pi - 0.05),
                                     rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi)};
            const Kinematics k = elements_to_state(in, kerbin);
            const OrbitalElements out = state_to_elements(k.position, k.velocity, kerbin);
            worst = std::max({worst, rel(out.a, in.a), rel(out.e, in.e), angle_diff(out.i, in.i) / in.i,
                              angle_diff(out.omega, in.omega) / (2 * pi), angle_diff(out.raan, in.raan) / (2 * pi),
                              angle_diff(out.nu, in.nu) / (2 * pi)});
        }
        if (worst >= 1e-8)
            o.fail("element round-trip error " + fmt("%.3g", worst));
        if (o.ok)
            o.detail = "drift " + fmt("%.2g", std::max(de, dh)) + ", round-trip " + fmt("%.2g", worst);
        return o;
    }

    Outcome orbit_generation()
    {
        Outcome o;
        const OrbitalElements evader{750000.0, 0.0, 0.1, 0.0, 0.5, 1.0};
        const OrbitConstraints c;
        const Vec3 pe = elements_to_state(evader, kerbin).position;
        for (std::uint64_t seed = 0; seed < 100; ++seed)
        {
            const OrbitalElements el = generate_orbit(evader, c, seed, kerbin);
            const double d = norm(elements_to_state(el, kerbin).position - pe);
            if (el.nu != 0.0)
                o.fail("seed " + std::to_string(seed) + " has nu != 0");
            if (d < c.distance_min || d > c.distance_max)
                o.fail("seed " + std::to_string(seed) + " separation " + fmt("%.1f", d));
            if (!(generate_orbit(evader, c, seed, kerbin) == el))
                o.fail("seed " + std::to_string(seed) + " not deterministic");
        }
        if (o.ok)
            o.detail = "100 seeds within constraints";
        return o;
    }

    Outcome bot_efficacy()
    {
        Outcome o;
        const auto seeds = eval::seed_range(0, 10);
        const EpisodeConfig base;
        const auto bot = eval::run_campaign(
                "navball", [](std::uint64_t) { return std::make_unique<NavballPilot>(); }, base, seeds, {4, false});
        const auto naive = eval::run_campaign(
                "naive", [](std::uint64_t) { return std::make_unique<NaivePilot>(); }, base, seeds, {4, false});
        const double b = bot.totals.avg_distance, n = naive.totals.avg_distance;
        if (!(b < 0.25 * n))
            o.fail("bot " + fmt("%.2f", b) + " m vs naive " + fmt("%.2f", n) + " m");
        if (bot.totals.failure_rate != 0.0)
            o.fail("bot failure rate " + fmt("%g", bot.totals.failure_rate));
        if (o.ok)
            o.detail = "mean closest approach bot " + fmt("%.2f", b) + " m, naive " + fmt("%.2f", n) + " m";
        return o;
    }

    Outcome oracle_equivalence()
    {
        Outcome o;
        for (std::uint64_t seed = 0; seed < 5; ++seed)
        {
            EpisodeConfig c;
            c.seed = seed;
            NavballPilot bot;
            llm::LlmAgent agent(llm::AgentConfig{}, std::make_unique<llm::OracleClient>(), [](auto) {});
            const Flight a = fly(bot, c);
            const Flight b = fly(agent, c);
            if (!(a.result == b.result))
                o.fail("seed " + std::to_string(seed) + " results differ");
            if (b.stats.failures != 0)
                o.fail("seed " + std::to_string(seed) + " oracle reported failures");
        }
        if (o.ok)
            o.detail = "5 seeds bitwise identical";
        return o;
    }

    // Reply generator mixing well-formed calls, garbage text, broken calls and
    // transport errors.
    class Fuzzer
    {
    public:
        explicit Fuzzer(std::uint64_t seed) : rng_(seed) {}

        llm::ChatMessage next()
        {
            static const std::vector<std::string> pieces{
                    "forward", "backward", "left", "right", "up", "down", "none", "FORWARD", ".", "!", ",", " ", "\n",
                    "perform_action(", ")", "{", "}", "\"ft\"", "\"rt\"", "\"dt\"", ":", "=", "ft", "rt", "dt",
                    "\"sideways\"", "move", "throttle", "and", "\\", "\"",
                    "perform_action({\"ft\": \"forward\", \"rt\": \"left\", \"dt\": \"up\"})", "\xff", "\xc3\xa9"};
            switch (rng_.below(6))
            {
            case 0:
                throw llm::CompletionError(rng_.below(2) ? llm::FailureKind::timeout : llm::FailureKind::transport,
                                           "injected");
            case 1:
                return llm::make_call_message(action_from_class(static_cast<int>(rng_.below(27))));
            default:
                break;
            }
            std::string s;
            const auto len = rng_.below(30);
            for (std::uint64_t k = 0; k < len; ++k)
                s += rng_.below(8) == 0 ? std::string(1, static_cast<char>(rng_.below(256)))
                                        : pieces[rng_.below(pieces.size())];
            llm::ChatMessage m = llm::ChatMessage::assistant(s);
            if (rng_.below(3) == 0)
                m.function_call = llm::FunctionCall{rng_.below(4) ? "perform_action" : "other", s};
            return m;
        }

    private:
        Rng rng_;
    };

    Outcome robustness()
    {
        Outcome o;
        constexpr int n = 10000;

        // Independent tally of what each reply should produce.
        long expected_failures = 0;
        std::vector<std::optional<Action>> expected;
        {
            Fuzzer f(77);
            for (int k = 0; k < n; ++k)
            {
                try
                {
                    const llm::ParseOutcome p = llm::parse_action(f.next());
                    expected.push_back(p.action);
                    expected_failures += !p.ok();
                }
                catch (const llm::CompletionError &)
                {
                    expected.push_back(std::nullopt);
                    ++expected_failures;
                }
            }
        }

        auto fuzzer = std::make_shared<Fuzzer>(77);
        auto client = std::make_unique<llm::ScriptedClient>(
                [fuzzer](const llm::CompletionRequest &, std::size_t) { return fuzzer->next(); });
        long sleeps = 0;
        llm::AgentConfig cfg;
        cfg.window = 3;
        llm::LlmAgent agent(cfg, std::move(client), [&sleeps](auto) { ++sleeps; });

        EpisodeConfig c;
        Episode ep;
        const Observation obs = ep.reset(c);
        long crashes = 0, mismatched = 0;
        for (int k = 0; k < n; ++k)
        {
            try
            {
                const Action a = agent.get_action(obs);
                const Action want = expected[static_cast<std::size_t>(k)].value_or(cfg.default_action);
                mismatched += !(a == want);
            }
            catch (...)
            {
                ++crashes;
            }
        }

        const PilotStats s = agent.stats();
        long by_kind = 0;
        for (const auto &[kind, count] : s.failures_by_kind)
        {
            const auto parsed = llm::parse_failure_kind(kind);
            if (!parsed || *parsed == llm::FailureKind::none)
                o.fail("unclassified failure kind '" + kind + "'");
            by_kind += count;
        }
        if (crashes)
            o.fail(std::to_string(crashes) + " crashes");
        if (mismatched)
            o.fail(std::to_string(mismatched) + " actions differ from expectation");
        if (s.attempts != n || static_cast<long>(s.latencies_ms.size()) != n)
            o.fail("attempt accounting off");
        if (s.failures != expected_failures)
            o.fail("failures " + std::to_string(s.failures) + " vs expected " + std::to_string(expected_failures));
        if (by_kind != s.failures)
            o.fail("per-kind counts do not sum to failures");
        if (s.defaults_emitted != s.failures || sleeps != s.failures)
            o.fail("default/retry count differs from failures");
        if (o.ok)
            o.detail = std::to_string(n) + " replies, " + std::to_string(s.failures) + " failures, rate " +
                       fmt("%.4f", static_cast<double>(s.failures) / n);
        return o;
    }

    Outcome dataset_fidelity()
    {
        Outcome o;
        EpisodeConfig c;
        c.seed = 11;
        NavballPilot bot;
        const GameplayLog log = dataset::record_episode(bot, c);
        if (log.samples.size() != 480)
            o.fail("log has " + std::to_string(log.samples.size()) + " samples");

        auto lines = [](const std::string &s) {
            std::vector<std::string> out;
            std::istringstream in(s);
            std::string line;
            while (std::getline(in, line))
                out.push_back(line);
            return out;
        };

        const auto records = dataset::build(log, {});
        std::size_t chat_ok = 0, alpaca_ok = 0;
        const auto chat = lines(dataset::to_chat_jsonl(records));
        const auto alpaca = lines(dataset::to_alpaca(records));
        for (std::size_t k = 0; k < chat.size() && k < log.samples.size(); ++k)
        {
            const auto msgs = nlohmann::json::parse(chat[k]).at("messages");
            const auto p = llm::parse_action(llm::message_from_json(msgs.back()));
            chat_ok += p.ok() && *p.action == log.samples[k].action;
        }
        for (std::size_t k = 0; k < alpaca.size() && k < log.samples.size(); ++k)
        {
            const auto j = nlohmann::json::parse(alpaca[k]);
            const auto p = llm::parse_action(llm::ChatMessage::assistant(j.at("output").get<std::string>()));
            alpaca_ok += p.ok() && *p.action == log.samples[k].action;
        }
        if (chat_ok != 480 || chat.size() != 480)
            o.fail("chat-jsonl round trip " + std::to_string(chat_ok) + "/480");
        if (alpaca_ok != 480 || alpaca.size() != 480)
            o.fail("alpaca round trip " + std::to_string(alpaca_ok) + "/480");

        dataset::Options w;
        w.window = 3;
        const auto windowed = dataset::build(log, w);
        const bool window_ok = windowed.size() == 480 &&
                               std::all_of(windowed.begin(), windowed.end(), [](const auto &r) { return r.history.size() == 3; });
        if (!window_ok)
            o.fail("window=3 counting contract broken");

        dataset::Options la;
        la.lookahead = 3;
        const auto ahead = dataset::build(log, la);
        if (ahead.size() != 478 ||
            !std::all_of(ahead.begin(), ahead.end(), [](const auto &r) { return r.targets.size() == 3; }))
            o.fail("lookahead=3 produced " + std::to_string(ahead.size()) + " records");

        dataset::Options mixed;
        mixed.window = 3;
        mixed.lookahead = 3;
        mixed.cot = true;
        for (auto f : {dataset::Format::chat_jsonl, dataset::Format::alpaca})
            if (dataset::serialize(dataset::build(log, mixed), f) != dataset::serialize(dataset::build(log, mixed), f))
                o.fail("non-deterministic bytes for " + std::string(dataset::format_label(f)));
        if (o.ok)
            o.detail = "480/480 both formats, lookahead 478 records";
        return o;
    }
} // namespace

int main()
{
    const std::vector<Criterion> criteria{
            {"scoring formula", 1.0, scoring},
            {"cross-entropy consistency", 1.0, cross_entropy_consistency},
            {"frame/prograde math", 5.0, frame_and_prograde},
            {"dynamics", 10.0, dynamics},
            {"orbit generation", 5.0, orbit_generation},
            {"expert-bot efficacy", 60.0, bot_efficacy},
            {"oracle equivalence", 60.0, oracle_equivalence},
            {"robustness", 30.0, robustness},
            {"dataset fidelity", 10.0, dataset_fidelity},
    };

    int failed = 0;
    for (const Criterion &c : criteria)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception &e)
        {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= c.budget_s)
            o.fail("took " + fmt("%.2f", secs) + " s, budget " + fmt("%.0f", c.budget_s) + " s");
        failed += !o.ok;
        std::printf("%s %s (%.2f s): %s\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), secs, o.detail.c_str());
    }
    return failed == 0 ? 0 : 1;
}
