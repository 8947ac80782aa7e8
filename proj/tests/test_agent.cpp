#include "rvlab/llm/agent.hpp"
#include "rvlab/pilot.hpp"

#include <httplib.h>
#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

using namespace rvlab;
using namespace rvlab::llm;
using namespace std::chrono_literals;

namespace
{
    const Action fwd_left_up{ForeAft::forward, Lateral::left, Vertical::up};

    Observation some_observation()
    {
        EpisodeConfig c;
        Episode ep;
        return ep.reset(c);
    }

    struct SleepLog
    {
        std::vector<double> waits;
        Sleeper sleeper()
        {
            return [this](std::chrono::duration<double> d) { waits.push_back(d.count()); };
        }
    };

    // Local chat-completions stand-in that records what it receives.
    class StubServer
    {
    public:
        explicit StubServer(std::function<void(const httplib::Request &, httplib::Response &)> handler)
        {
            server_.Post("/v1/chat/completions", [this, handler](const httplib::Request &req, httplib::Response &res) {
                {
                    std::lock_guard lock(mutex_);
                    bodies_.push_back(req.body);
                    auth_.push_back(req.get_header_value("Authorization"));
                }
                handler(req, res);
            });
            port_ = server_.bind_to_any_port("127.0.0.1");
            thread_ = std::thread([this] { server_.listen_after_bind(); });
            server_.wait_until_ready();
        }

        ~StubServer()
        {
            server_.stop();
            thread_.join();
        }

        std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

        std::vector<std::string> bodies()
        {
            std::lock_guard lock(mutex_);
            return bodies_;
        }

        std::vector<std::string> auth()
        {
            std::lock_guard lock(mutex_);
            return auth_;
        }

    private:
        httplib::Server server_;
        int port_{0};
        std::thread thread_;
        std::mutex mutex_;
        std::vector<std::string> bodies_;
        std::vector<std::string> auth_;
    };

    std::string completion_with_call(const Action &a)
    {
        const nlohmann::json msg{{"role", "assistant"},
                                 {"content", nullptr},
                                 {"tool_calls",
                                  {{{"id", "call_0"},
                                    {"type", "function"},
                                    {"function", {{"name", "perform_action"}, {"arguments", format_call_arguments(a)}}}}}}};
        return nlohmann::json{{"id", "x"}, {"object", "chat.completion"}, {"choices", {{{"index", 0}, {"message", msg}}}}}
                .dump();
    }
} // namespace

TEST(LlmAgent, ScriptedStructuredCall)
{
    SleepLog sleeps;
    AgentConfig cfg;
    cfg.window = 3;
    LlmAgent agent(cfg, std::make_unique<ScriptedClient>(std::vector<ChatMessage>{make_call_message(fwd_left_up)}),
                   sleeps.sleeper());
    EXPECT_EQ(agent.window().size(), 0u);
    EXPECT_EQ(agent.get_action(some_observation()), fwd_left_up);
    EXPECT_EQ(agent.window().size(), 1u);
    EXPECT_EQ(agent.stats().failures, 0);
    EXPECT_TRUE(sleeps.waits.empty());
    EXPECT_EQ(agent.kind(), "mock");
}

TEST(LlmAgent, MalformedReplyFallsBackAfterOneSecond)
{
    SleepLog sleeps;
    AgentConfig cfg;
    cfg.window = 2;
    LlmAgent agent(cfg,
                   std::make_unique<ScriptedClient>(std::vector<ChatMessage>{ChatMessage::assistant("I cannot determine an action.")}),
                   sleeps.sleeper());
    const Action a = agent.get_action(some_observation());
    EXPECT_TRUE(a.is_coast());
    EXPECT_EQ(agent.stats().failures, 1);
    EXPECT_EQ(agent.stats().defaults_emitted, 1);
    EXPECT_EQ(agent.stats().failures_by_kind.at("no_action"), 1);
    ASSERT_EQ(sleeps.waits.size(), 1u);
    EXPECT_EQ(sleeps.waits[0], 1.0);
    EXPECT_EQ(agent.window().size(), 0u);
}

TEST(LlmAgent, RealSleepOnFailure)
{
    AgentConfig cfg;
    cfg.retry_wait = 0.2;
    LlmAgent agent(cfg, std::make_unique<ScriptedClient>(std::vector<ChatMessage>{ChatMessage::assistant("??")}));
    const auto t0 = std::chrono::steady_clock::now();
    agent.get_action(some_observation());
    EXPECT_GE(std::chrono::steady_clock::now() - t0, 200ms);
}

TEST(LlmAgent, ConfiguredDefaultAction)
{
    SleepLog sleeps;
    AgentConfig cfg;
    cfg.default_action = {ForeAft::backward, Lateral::none, Vertical::none};
    LlmAgent agent(cfg, std::make_unique<ScriptedClient>(std::vector<ChatMessage>{ChatMessage::assistant("hmm")}),
                   sleeps.sleeper());
    EXPECT_EQ(agent.get_action(some_observation()).ft, ForeAft::backward);
}

TEST(LlmAgent, ClientExceptionsAreClassified)
{
    SleepLog sleeps;
    auto client = std::make_unique<ScriptedClient>([](const CompletionRequest &, std::size_t n) -> ChatMessage {
        if (n == 0)
            throw CompletionError(FailureKind::timeout, "slow");
        if (n == 1)
            throw std::runtime_error("weird");
        return make_call_message(fwd_left_up);
    });
    LlmAgent agent(AgentConfig{}, std::move(client), sleeps.sleeper());
    const Observation o = some_observation();
    agent.get_action(o);
    agent.get_action(o);
    EXPECT_EQ(agent.get_action(o), fwd_left_up);
    const PilotStats s = agent.stats();
    EXPECT_EQ(s.attempts, 3);
    EXPECT_EQ(s.failures, 2);
    EXPECT_EQ(s.failures_by_kind.at("timeout"), 1);
    EXPECT_EQ(s.failures_by_kind.at("protocol"), 1);
    EXPECT_EQ(s.latencies_ms.size(), 3u);
}

TEST(LlmAgent, InteractionLogLines)
{
    SleepLog sleeps;
    std::ostringstream sink;
    LlmAgent agent(AgentConfig{},
                   std::make_unique<ScriptedClient>(
                           std::vector<ChatMessage>{make_call_message(fwd_left_up), ChatMessage::assistant("no idea")}, true),
                   sleeps.sleeper());
    agent.set_log_sink(&sink);
    agent.get_action(some_observation());
    agent.get_action(some_observation());

    std::istringstream in(sink.str());
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(in, line))
        rows.push_back(nlohmann::json::parse(line));
    ASSERT_EQ(rows.size(), 2u);
    for (const auto &r : rows)
        for (const char *k : {"tick", "latency_ms", "outcome", "prompts", "reply", "action"})
            EXPECT_TRUE(r.contains(k)) << k;
    EXPECT_EQ(rows[0]["outcome"], "ok");
    EXPECT_EQ(rows[1]["outcome"], "no_action");
    EXPECT_EQ(rows[1]["tick"], 1);
    EXPECT_EQ(rows[0]["action"], nlohmann::json({{"ft", "forward"}, {"rt", "left"}, {"dt", "up"}}));
}

TEST(LlmAgent, WindowFeedsPriorExchanges)
{
    SleepLog sleeps;
    auto scripted = std::make_unique<ScriptedClient>(std::vector<ChatMessage>{make_call_message(fwd_left_up)}, true);
    ScriptedClient *view = scripted.get();
    AgentConfig cfg;
    cfg.window = 2;
    LlmAgent agent(cfg, std::move(scripted), sleeps.sleeper());
    const Observation o = some_observation();
    for (int k = 0; k < 4; ++k)
        agent.get_action(o);
    const auto &msgs = view->requests().back().messages;
    ASSERT_EQ(msgs.size(), 1u + 4u + 1u);
    EXPECT_EQ(msgs[2].content, format_call_text(fwd_left_up));
    EXPECT_EQ(view->requests().front().messages[1].content, kPadding);
}

TEST(OracleClient, MatchesNavballOverFullEpisode)
{
    for (std::uint64_t seed : {0ULL, 3ULL})
    {
        EpisodeConfig c;
        c.seed = seed;
        NavballPilot bot;
        LlmAgent agent(AgentConfig{}, std::make_unique<OracleClient>(), [](auto) { FAIL() << "oracle never fails"; });
        const Flight a = fly(bot, c);
        const Flight b = fly(agent, c);
        ASSERT_EQ(a.log.samples.size(), b.log.samples.size());
        for (std::size_t k = 0; k < a.log.samples.size(); ++k)
            ASSERT_EQ(a.log.samples[k].action, b.log.samples[k].action) << k;
        EXPECT_EQ(a.result, b.result);
        EXPECT_EQ(b.stats.failures, 0);
        EXPECT_EQ(b.log.meta.agent, "oracle");
    }
}

TEST(ScriptedClient, RepliesInOrder)
{
    ScriptedClient c({ChatMessage::assistant("a"), ChatMessage::assistant("b")});
    EXPECT_EQ(c.complete({}).content, "a");
    EXPECT_EQ(c.complete({}).content, "b");
    EXPECT_THROW(c.complete({}), CompletionError);
    EXPECT_EQ(c.calls(), 3u);
}

TEST(RemoteClient, WireFormatCarriesSchemaVerbatim)
{
    StubServer stub([](const httplib::Request &, httplib::Response &res) {
        res.set_content(completion_with_call(fwd_left_up), "application/json");
    });
    RemoteConfig rc;
    rc.url = stub.url();
    rc.model = "test-model";
    rc.api_key = "sk-test";
    rc.timeout = 5;

    SleepLog sleeps;
    AgentConfig cfg;
    cfg.mode = PromptMode::cot_fewshot;
    LlmAgent agent(cfg, std::make_unique<RemoteClient>(rc), sleeps.sleeper());
    EXPECT_EQ(agent.get_action(some_observation()), fwd_left_up);
    EXPECT_EQ(agent.kind(), "llm");
    EXPECT_FALSE(agent.deterministic());

    const auto bodies = stub.bodies();
    ASSERT_EQ(bodies.size(), 1u);
    const auto body = nlohmann::json::parse(bodies[0]);
    EXPECT_EQ(body.at("model"), "test-model");
    EXPECT_EQ(body.at("tools").at(0).at("type"), "function");
    EXPECT_EQ(body.at("tools").at(0).at("function"), FunctionSchema{}.to_json());
    EXPECT_EQ(body.at("messages").at(0).at("role"), "system");
    EXPECT_EQ(body.at("messages").back().at("role"), "user");
    EXPECT_NE(body.at("messages").back().at("content").get<std::string>().find(kCotSuffix), std::string::npos);
    EXPECT_EQ(stub.auth().at(0), "Bearer sk-test");
}

TEST(RemoteClient, ApiKeyFromEnvironment)
{
    StubServer stub([](const httplib::Request &, httplib::Response &res) {
        res.set_content(completion_with_call(fwd_left_up), "application/json");
    });
    ::setenv("LLM_API_KEY", "from-env", 1);
    RemoteConfig rc;
    rc.url = stub.url();
    RemoteClient client(rc);
    ::unsetenv("LLM_API_KEY");
    client.complete({{ChatMessage::user("hi")}, {}, nullptr});
    EXPECT_EQ(stub.auth().at(0), "Bearer from-env");
}

TEST(RemoteClient, HttpErrorsAreClassified)
{
    int status = 401;
    StubServer stub([&status](const httplib::Request &, httplib::Response &res) {
        res.status = status;
        res.set_content("{}", "application/json");
    });
    RemoteConfig rc;
    rc.url = stub.url();
    rc.timeout = 5;
    RemoteClient client(rc);
    auto kind_of = [&] {
        try
        {
            client.complete({{ChatMessage::user("hi")}, {}, nullptr});
        }
        catch (const CompletionError &e)
        {
            return e.kind();
        }
        return FailureKind::none;
    };
    status = 401;
    EXPECT_EQ(kind_of(), FailureKind::auth);
    status = 403;
    EXPECT_EQ(kind_of(), FailureKind::auth);
    status = 504;
    EXPECT_EQ(kind_of(), FailureKind::timeout);
    status = 500;
    EXPECT_EQ(kind_of(), FailureKind::protocol);
    status = 200; // body lacks choices
    EXPECT_EQ(kind_of(), FailureKind::protocol);
}

TEST(RemoteClient, SlowEndpointTimesOut)
{
    StubServer stub([](const httplib::Request &, httplib::Response &res) {
        std::this_thread::sleep_for(1500ms);
        res.set_content(completion_with_call(fwd_left_up), "application/json");
    });
    RemoteConfig rc;
    rc.url = stub.url();
    rc.timeout = 0.3;
    SleepLog sleeps;
    LlmAgent agent(AgentConfig{}, std::make_unique<RemoteClient>(rc), sleeps.sleeper());
    EXPECT_TRUE(agent.get_action(some_observation()).is_coast());
    EXPECT_EQ(agent.stats().failures_by_kind.at("timeout"), 1);
    EXPECT_LT(agent.stats().latencies_ms.at(0), 1400.0);
}

TEST(RemoteClient, UnreachableEndpointIsATransportFailure)
{
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteConfig rc;
    rc.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    rc.timeout = 1;
    SleepLog sleeps;
    LlmAgent agent(AgentConfig{}, std::make_unique<RemoteClient>(rc), sleeps.sleeper());
    EXPECT_TRUE(agent.get_action(some_observation()).is_coast());
    EXPECT_EQ(agent.stats().failures, 1);
    const auto &kinds = agent.stats().failures_by_kind;
    EXPECT_TRUE(kinds.count("transport") == 1 || kinds.count("timeout") == 1);
}

TEST(RemoteClient, RejectsUrlWithoutScheme)
{
    RemoteConfig rc;
    rc.url = "localhost:8000/v1";
    EXPECT_THROW(RemoteClient{rc}, std::invalid_argument);
}
