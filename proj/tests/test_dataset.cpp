#include "rvlab/dataset.hpp"
#include "rvlab/json_io.hpp"
#include "rvlab/llm/parse.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace rvlab;
using namespace rvlab::dataset;

namespace
{
    // One full-length bot episode, shared across tests.
    const GameplayLog &bot_log()
    {
        static const GameplayLog log = [] {
            EpisodeConfig c;
            c.seed = 11;
            NavballPilot bot;
            return record_episode(bot, c);
        }();
        return log;
    }

    std::vector<std::string> lines(const std::string &s)
    {
        std::vector<std::string> out;
        std::istringstream in(s);
        std::string line;
        while (std::getline(in, line))
            out.push_back(line);
        return out;
    }

    std::vector<Action> logged_actions(const GameplayLog &log)
    {
        std::vector<Action> out;
        for (const auto &s : log.samples)
            out.push_back(s.action);
        return out;
    }
} // namespace

TEST(RecordEpisode, EveryTickSampled)
{
    const GameplayLog &log = bot_log();
    ASSERT_EQ(log.samples.size(), 480u);
    EXPECT_NO_THROW(log.validate());
    EXPECT_EQ(log.meta.agent, "navball");
    EXPECT_TRUE(log.meta.complete);
    for (std::size_t k = 0; k < log.samples.size(); ++k)
    {
        EXPECT_EQ(log.samples[k].tick, static_cast<int>(k));
        EXPECT_EQ(log.samples[k].observation.time, 0.5 * static_cast<double>(k));
    }
}

TEST(RecordEpisode, ReplayReproducesTrajectory)
{
    const GameplayLog &log = bot_log();
    NavballPilot bot;
    ReplayPilot replay(logged_actions(log));
    const Flight a = fly(bot, log.config);
    const Flight b = fly(replay, log.config);
    EXPECT_EQ(a.result.trajectory, b.result.trajectory);
    for (std::size_t k = 0; k < log.samples.size(); ++k)
        ASSERT_EQ(b.log.samples[k].observation, log.samples[k].observation) << k;
}

TEST(GameplayLog, JsonRoundTrip)
{
    const GameplayLog &log = bot_log();
    const nlohmann::json j = log;
    const GameplayLog back = j.get<GameplayLog>();
    EXPECT_EQ(back, log);

    const auto path = std::filesystem::temp_directory_path() / "rvlab_log_roundtrip.json";
    write_gameplay_log(log, path);
    EXPECT_EQ(read_gameplay_log(path), log);
    std::filesystem::remove(path);
}

TEST(GameplayLog, ValidationCatchesGaps)
{
    GameplayLog log = bot_log();
    log.samples.erase(log.samples.begin() + 5);
    EXPECT_THROW(log.validate(), std::invalid_argument);
}

TEST(Build, OneRecordPerSample)
{
    const auto records = build(bot_log(), {});
    ASSERT_EQ(records.size(), 480u);
    for (std::size_t k = 0; k < records.size(); ++k)
    {
        EXPECT_EQ(records[k].tick, static_cast<int>(k));
        EXPECT_EQ(records[k].seed, 11u);
        ASSERT_EQ(records[k].targets.size(), 1u);
        EXPECT_EQ(records[k].targets[0], bot_log().samples[k].action);
        EXPECT_TRUE(records[k].history.empty());
    }
}

TEST(Build, ChatJsonlDecodesToLoggedActions)
{
    const auto records = build(bot_log(), {});
    const auto rows = lines(to_chat_jsonl(records));
    ASSERT_EQ(rows.size(), 480u);
    int matched = 0;
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const auto j = nlohmann::json::parse(rows[k]);
        const auto &msgs = j.at("messages");
        EXPECT_EQ(msgs.front().at("role"), "system");
        EXPECT_EQ(msgs.back().at("role"), "assistant");
        const llm::ParseOutcome p = llm::parse_action(llm::message_from_json(msgs.back()));
        ASSERT_TRUE(p.ok()) << k;
        matched += *p.action == bot_log().samples[k].action;
    }
    EXPECT_EQ(matched, 480);
}

TEST(Build, AlpacaDecodesToLoggedActions)
{
    Options o;
    o.window = 2;
    const auto rows = lines(to_alpaca(build(bot_log(), o)));
    ASSERT_EQ(rows.size(), 480u);
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const auto j = nlohmann::json::parse(rows[k]);
        EXPECT_EQ(j.size(), 4u);
        EXPECT_EQ(j.at("history").size(), 2u);
        const llm::ParseOutcome p = llm::parse_action(llm::ChatMessage::assistant(j.at("output").get<std::string>()));
        ASSERT_TRUE(p.ok()) << k;
        EXPECT_EQ(*p.action, bot_log().samples[k].action) << k;
    }
}

TEST(Windowed, PaddingThenRealExchanges)
{
    const auto records = windowed(base_records(bot_log(), {}), 3);
    ASSERT_EQ(records.size(), 480u);
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        const auto &h = records[i].history;
        ASSERT_EQ(h.size(), 3u);
        const std::size_t real = std::min<std::size_t>(i, 3);
        for (std::size_t k = 0; k < 3 - real; ++k)
            EXPECT_EQ(h[k].user, llm::kPadding);
        for (std::size_t k = 0; k < real; ++k)
        {
            const std::size_t src = i - real + k;
            EXPECT_EQ(h[3 - real + k].user, records[src].state_prompt);
            EXPECT_EQ(h[3 - real + k].assistant, llm::format_call_text(bot_log().samples[src].action));
        }
    }
    EXPECT_THROW(windowed({}, -1), std::invalid_argument);
}

TEST(Lookahead, DropsTailAndCarriesNextActions)
{
    Options o;
    o.lookahead = 3;
    const auto records = build(bot_log(), o);
    ASSERT_EQ(records.size(), 478u);
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        ASSERT_EQ(records[i].targets.size(), 3u);
        for (std::size_t a = 0; a < 3; ++a)
            EXPECT_EQ(records[i].targets[a], bot_log().samples[i + a].action);
        const llm::SequenceOutcome seq = llm::parse_action_sequence(record_output(records[i]));
        ASSERT_TRUE(seq.ok());
        EXPECT_EQ(seq.actions, records[i].targets);
    }
    EXPECT_TRUE(lookahead(base_records(bot_log(), {}), 481).empty());
}

TEST(Cot, ReasoningPrecedesCallAndStillParses)
{
    Options o;
    o.cot = true;
    o.mode = llm::PromptMode::cot_fewshot;
    const auto records = build(bot_log(), o);
    for (std::size_t i = 0; i < records.size(); i += 37)
    {
        const std::string out = record_output(records[i]);
        EXPECT_EQ(out.rfind("The ", 0), 0u) << out;
        EXPECT_NE(out.find("Therefore we should call perform_action("), std::string::npos);
        const llm::ParseOutcome p = llm::parse_action(llm::ChatMessage::assistant(out));
        ASSERT_TRUE(p.ok());
        EXPECT_EQ(*p.action, records[i].targets[0]);
    }
}

TEST(Keywords, UserTurnsMarked)
{
    Options o;
    o.conversation_keywords = true;
    o.window = 1;
    const auto records = build(bot_log(), o);
    EXPECT_EQ(records[4].user.rfind(llm::kHumanKeyword, 0), 0u);
    EXPECT_EQ(records[4].history[0].user.rfind(llm::kHumanKeyword, 0), 0u);
}

TEST(Serialize, ByteDeterministic)
{
    Options o;
    o.window = 2;
    o.cot = true;
    for (Format f : {Format::chat_jsonl, Format::alpaca})
        EXPECT_EQ(serialize(build(bot_log(), o), f), serialize(build(bot_log(), o), f));
}

TEST(Provenance, OneLinePerRecord)
{
    const auto records = build(bot_log(), {});
    const auto rows = lines(provenance_jsonl(records));
    ASSERT_EQ(rows.size(), records.size());
    const auto j = nlohmann::json::parse(rows[7]);
    EXPECT_EQ(j, nlohmann::json({{"record", 7}, {"seed", 11}, {"tick", 7}, {"agent", "navball"}}));
}

TEST(Verify, AcceptsExportAndRejectsTampering)
{
    Options o;
    o.window = 2;
    o.lookahead = 2;
    for (Format f : {Format::chat_jsonl, Format::alpaca})
    {
        const auto records = build(bot_log(), o);
        const std::string data = serialize(records, f);
        const std::string prov = provenance_jsonl(records);
        const VerifyReport ok = verify({bot_log()}, data, prov, f, o);
        EXPECT_TRUE(ok.ok()) << (ok.errors.empty() ? "" : ok.errors.front());
        EXPECT_EQ(ok.verified, 479u);

        std::string tampered = data;
        const auto pos = tampered.find("\\\"forward\\\"");
        ASSERT_NE(pos, std::string::npos);
        tampered.replace(pos, 11, "\\\"backward\\\"");
        EXPECT_FALSE(verify({bot_log()}, tampered, prov, f, o).ok());

        std::string extra = data;
        extra.insert(1, "\"extra\": 1, ");
        EXPECT_FALSE(verify({bot_log()}, extra, prov, f, o).ok());
    }
}

TEST(Options, Validation)
{
    Options o;
    o.window = -1;
    EXPECT_THROW(o.validate(), std::invalid_argument);
    o = {};
    o.lookahead = 0;
    EXPECT_THROW(o.validate(), std::invalid_argument);
    EXPECT_EQ(parse_format("alpaca"), Format::alpaca);
    EXPECT_EQ(parse_format(format_label(Format::chat_jsonl)), Format::chat_jsonl);
    EXPECT_FALSE(parse_format("csv"));
}
