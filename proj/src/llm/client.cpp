#include "rvlab/llm/client.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>

namespace rvlab::llm
{

    ScriptedClient::ScriptedClient(std::vector<ChatMessage> replies, bool cycle) : replies_(std::move(replies)), cycle_(cycle) {}

    ScriptedClient::ScriptedClient(Generator generator) : generator_(std::move(generator)) {}

    ChatMessage ScriptedClient::complete(const CompletionRequest &request)
    {
        const std::size_t index = calls_++;
        requests_.push_back(request);
        if (generator_)
            return generator_(request, index);
        if (replies_.empty())
            throw CompletionError(FailureKind::protocol, "scripted client has no replies");
        if (index < replies_.size())
            return replies_[index];
        if (cycle_)
            return replies_[index % replies_.size()];
        throw CompletionError(FailureKind::protocol, "scripted client ran out of replies");
    }

    OracleClient::OracleClient(NavballParams params) : params_(params) { params_.validate(); }

    ChatMessage OracleClient::complete(const CompletionRequest &request)
    {
        if (!request.observation)
            throw CompletionError(FailureKind::protocol, "oracle backend needs the structured observation");
        return make_call_message(navball_action(*request.observation, params_));
    }

    nlohmann::json build_request_body(const CompletionRequest &request, const RemoteConfig &config)
    {
        nlohmann::json messages = nlohmann::json::array();
        for (const ChatMessage &m : request.messages)
            messages.push_back(message_to_json(m));

        nlohmann::json body{
                {"model", config.model},
                {"messages", messages},
                {"temperature", config.temperature},
                {"tools", nlohmann::json::array({{{"type", "function"}, {"function", request.schema.to_json()}}})},
                {"tool_choice", "auto"},
        };
        if (config.max_tokens)
            body["max_tokens"] = *config.max_tokens;
        return body;
    }

    ChatMessage parse_response_body(const std::string &body)
    {
        const auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw CompletionError(FailureKind::protocol, "response body is not a JSON object");
        const auto choices = j.find("choices");
        if (choices == j.end() || !choices->is_array() || choices->empty() || !(*choices)[0].is_object())
            throw CompletionError(FailureKind::protocol, "response has no choices");
        const auto &choice = (*choices)[0];
        const auto msg = choice.find("message");
        if (msg == choice.end() || !msg->is_object())
            throw CompletionError(FailureKind::protocol, "response choice has no message");
        try
        {
            nlohmann::json m = *msg;
            if (!m.contains("role"))
                m["role"] = "assistant";
            return message_from_json(m);
        }
        catch (const std::exception &e)
        {
            throw CompletionError(FailureKind::protocol, std::string("bad response message: ") + e.what());
        }
    }

    RemoteClient::RemoteClient(RemoteConfig config) : config_(std::move(config))
    {
        if (!(config_.timeout > 0.0))
            throw std::invalid_argument("remote client: timeout must be positive");
        if (config_.api_key.empty())
            if (const char *key = std::getenv("LLM_API_KEY"))
                config_.api_key = key;

        const auto scheme_end = config_.url.find("://");
        if (scheme_end == std::string::npos)
            throw std::invalid_argument("remote client: endpoint URL needs a scheme: " + config_.url);
        const auto path_start = config_.url.find('/', scheme_end + 3);
        origin_ = config_.url.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
    }

    ChatMessage RemoteClient::complete(const CompletionRequest &request)
    {
        httplib::Client cli(origin_);
        if (!cli.is_valid())
            throw CompletionError(FailureKind::transport, "cannot create a client for " + origin_);

        const double whole = std::floor(config_.timeout);
        const auto sec = static_cast<time_t>(whole);
        const auto usec = static_cast<time_t>((config_.timeout - whole) * 1e6);
        cli.set_connection_timeout(sec, usec);
        cli.set_read_timeout(sec, usec);
        cli.set_write_timeout(sec, usec);

        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        const std::string body = build_request_body(request, config_).dump();
        const auto res = cli.Post(path_, headers, body, "application/json");
        if (!res)
        {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                                   err == httplib::Error::Write;
            throw CompletionError(timed_out ? FailureKind::timeout : FailureKind::transport,
                                  "request failed: " + httplib::to_string(err));
        }
        if (res->status == 401 || res->status == 403)
            throw CompletionError(FailureKind::auth, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        if (res->status == 408 || res->status == 504)
            throw CompletionError(FailureKind::timeout, "endpoint timed out (HTTP " + std::to_string(res->status) + ")");
        if (res->status < 200 || res->status >= 300)
            throw CompletionError(FailureKind::protocol, "unexpected HTTP status " + std::to_string(res->status));
        return parse_response_body(res->body);
    }

} // namespace rvlab::llm
