#pragma once

#include "rvlab/gameplay.hpp"
#include "rvlab/llm/prompts.hpp"
#include "rvlab/pilot.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rvlab::dataset
{

    enum class Format
    {
        chat_jsonl,
        alpaca,
    };

    std::string_view format_label(Format f);
    std::optional<Format> parse_format(std::string_view s);

    struct Options
    {
        llm::PromptMode mode{llm::PromptMode::augmented};
        bool conversation_keywords{false}; ///< HUMAN:/ASSISTANT: markers in user text
        int window{0};
        int lookahead{1};
        bool cot{false};
        double cot_deadband{0.08}; ///< |prograde component| treated as centered

        void validate() const;
    };

    /// One training example, traceable to (seed, tick) of its source log.
    struct Record
    {
        std::uint64_t seed{0};
        int tick{0};
        std::string agent;
        std::string system;
        std::string user;
        std::vector<llm::Exchange> history;
        std::vector<Action> targets; ///< first entry is the action taken at `tick`
        std::optional<std::string> reasoning;
        std::optional<Vec3> prograde;
        std::string state_prompt; ///< user turn as it appears in later records' history
    };

    /// Runs the agent through one episode and keeps every decision tick.
    GameplayLog record_episode(Pilot &agent, const EpisodeConfig &config);

    /// One record per sample, single-action targets, empty history.
    std::vector<Record> base_records(const GameplayLog &log, const Options &opts);

    /// History = previous min(i, n) exchanges, N/A-padded to n, most recent last.
    std::vector<Record> windowed(std::vector<Record> records, int n);

    /// Targets = next k actions; the final k-1 records are dropped.
    std::vector<Record> lookahead(std::vector<Record> records, int k);

    /// Prefixes every output with sign-driven reasoning about the prograde marker.
    std::vector<Record> annotate_cot(std::vector<Record> records, double deadband = 0.08);

    /// base_records -> windowed -> lookahead -> annotate_cot, as selected by opts.
    std::vector<Record> build(const GameplayLog &log, const Options &opts);

    /// Assistant text: reasoning (if any) followed by one call per target.
    std::string record_output(const Record &r);

    /// Final assistant message in chat form: a structured call for single
    /// targets, newline-separated call text for look-ahead targets.
    llm::ChatMessage record_reply(const Record &r);

    std::string to_chat_jsonl(const std::vector<Record> &records);
    std::string to_alpaca(const std::vector<Record> &records);
    std::string serialize(const std::vector<Record> &records, Format format);

    /// Sidecar lines {"record", "seed", "tick", "agent"} in record order.
    std::string provenance_jsonl(const std::vector<Record> &records);

    struct VerifyReport
    {
        std::size_t records{0};
        std::size_t verified{0};
        std::vector<std::string> errors;

        bool ok() const { return errors.empty() && verified == records; }
    };

    /// Strict re-read of an exported file and its provenance sidecar: exact
    /// field sets, every output decodes to the source log's actions at
    /// (seed, tick), and the bytes match a fresh rebuild.
    VerifyReport verify(const std::vector<GameplayLog> &logs, const std::string &exported, const std::string &provenance,
                        Format format, const Options &opts);

} // namespace rvlab::dataset
