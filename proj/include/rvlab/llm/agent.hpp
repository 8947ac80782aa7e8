#pragma once

#include "rvlab/llm/client.hpp"
#include "rvlab/llm/prompts.hpp"
#include "rvlab/pilot.hpp"

#include <chrono>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rvlab::llm
{

    struct AgentConfig
    {
        std::string endpoint{"http://127.0.0.1:8000/v1/chat/completions"};
        std::string model{"gpt-3.5-turbo"};
        double timeout{30.0}; ///< s
        double temperature{0.0};
        int window{0};
        bool window_padding{true};
        PromptMode mode{PromptMode::augmented};
        Action default_action{Action::coast()};
        double retry_wait{1.0}; ///< s, slept after every failure

        void validate() const;
    };

    /// One attempt, successful or not.
    struct InteractionRecord
    {
        int tick{0};
        double latency_ms{0.0};
        FailureKind outcome{FailureKind::none};
        std::string detail;
        std::vector<ChatMessage> prompts;
        std::optional<ChatMessage> reply;
        Action action;
    };

    nlohmann::json interaction_to_json(const InteractionRecord &r);

    using Sleeper = std::function<void(std::chrono::duration<double>)>;

    /// Prompt, call, parse; failures log, wait, and fall back to the default action.
    class LlmAgent final : public Pilot
    {
    public:
        LlmAgent(AgentConfig config, std::unique_ptr<CompletionClient> client, Sleeper sleeper = {});

        Action get_action(const Observation &obs);

        std::string kind() const override;
        Action act(const Observation &obs) override { return get_action(obs); }
        PilotStats stats() const override { return stats_; }
        nlohmann::json params() const override;
        bool deterministic() const override { return client_->deterministic(); }

        const SlidingWindow &window() const { return window_; }
        const PromptTemplate &prompt_template() const { return template_; }
        const std::vector<InteractionRecord> &records() const { return records_; }

        /// Newline-delimited interaction log; the stream must outlive the agent.
        void set_log_sink(std::ostream *sink) { sink_ = sink; }
        void keep_records(bool keep) { keep_records_ = keep; }

    private:
        void record(InteractionRecord rec);

        AgentConfig config_;
        std::unique_ptr<CompletionClient> client_;
        Sleeper sleeper_;
        PromptTemplate template_;
        SlidingWindow window_;
        FunctionSchema schema_;
        PilotStats stats_;
        std::vector<InteractionRecord> records_;
        bool keep_records_{true};
        std::ostream *sink_{nullptr};
        int tick_{0};
    };

} // namespace rvlab::llm
