#pragma once

#include "rvlab/llm/chat.hpp"
#include "rvlab/llm/parse.hpp"
#include "rvlab/navball.hpp"
#include "rvlab/scenario.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvlab::llm
{

    struct CompletionRequest
    {
        std::vector<ChatMessage> messages;
        FunctionSchema schema;
        /// Structured state behind the prompts. Remote and scripted backends
        /// ignore it; the oracle backend acts on it.
        const Observation *observation{nullptr};
    };

    /// Transport-level failure, classified for failure-rate accounting.
    class CompletionError : public std::runtime_error
    {
    public:
        CompletionError(FailureKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
        FailureKind kind() const { return kind_; }

    private:
        FailureKind kind_;
    };

    class CompletionClient
    {
    public:
        virtual ~CompletionClient() = default;
        virtual ChatMessage complete(const CompletionRequest &request) = 0;
        virtual std::string backend() const = 0;
        virtual bool deterministic() const { return true; }
    };

    /// Test double: replies from a queue (optionally cycling) or a generator.
    class ScriptedClient final : public CompletionClient
    {
    public:
        using Generator = std::function<ChatMessage(const CompletionRequest &, std::size_t call_index)>;

        explicit ScriptedClient(std::vector<ChatMessage> replies, bool cycle = false);
        explicit ScriptedClient(Generator generator);

        ChatMessage complete(const CompletionRequest &request) override;
        std::string backend() const override { return "mock"; }

        std::size_t calls() const { return calls_; }
        const std::vector<CompletionRequest> &requests() const { return requests_; }

    private:
        std::vector<ChatMessage> replies_;
        bool cycle_{false};
        Generator generator_;
        std::size_t calls_{0};
        std::vector<CompletionRequest> requests_;
    };

    /// Answers with the navball expert's action, formatted as a perform_action call.
    class OracleClient final : public CompletionClient
    {
    public:
        explicit OracleClient(NavballParams params = {});

        ChatMessage complete(const CompletionRequest &request) override;
        std::string backend() const override { return "oracle"; }

    private:
        NavballParams params_;
    };

    struct RemoteConfig
    {
        std::string url{"http://127.0.0.1:8000/v1/chat/completions"};
        std::string model{"gpt-3.5-turbo"};
        std::string api_key; ///< falls back to LLM_API_KEY when empty
        double timeout{30.0};
        double temperature{0.0};
        std::optional<int> max_tokens;
    };

    /// Request body in the common chat-completions wire format with the
    /// perform_action tool declared.
    nlohmann::json build_request_body(const CompletionRequest &request, const RemoteConfig &config);

    /// Extracts choices[0].message; throws CompletionError(protocol) otherwise.
    ChatMessage parse_response_body(const std::string &body);

    class RemoteClient final : public CompletionClient
    {
    public:
        explicit RemoteClient(RemoteConfig config);

        ChatMessage complete(const CompletionRequest &request) override;
        std::string backend() const override { return "remote"; }
        bool deterministic() const override { return false; }

    private:
        RemoteConfig config_;
        std::string origin_; ///< scheme://host[:port]
        std::string path_;
    };

} // namespace rvlab::llm
