#include "rvlab/llm/agent.hpp"

#include <ostream>
#include <stdexcept>
#include <thread>

namespace rvlab::llm
{

    namespace
    {
        nlohmann::json action_json(const Action &a)
        {
            return {{"ft", label(a.ft)}, {"rt", label(a.rt)}, {"dt", label(a.dt)}};
        }
    } // namespace

    void AgentConfig::validate() const
    {
        if (!(timeout > 0.0))
            throw std::invalid_argument("agent config: timeout must be positive");
        if (window < 0)
            throw std::invalid_argument("agent config: window must be non-negative");
        if (!(retry_wait >= 0.0))
            throw std::invalid_argument("agent config: retry_wait must be non-negative");
    }

    nlohmann::json interaction_to_json(const InteractionRecord &r)
    {
        nlohmann::json prompts = nlohmann::json::array();
        for (const ChatMessage &m : r.prompts)
            prompts.push_back(message_to_json(m));
        return {
                {"tick", r.tick},
                {"latency_ms", r.latency_ms},
                {"outcome", r.outcome == FailureKind::none ? std::string("ok") : std::string(failure_label(r.outcome))},
                {"detail", r.detail},
                {"prompts", prompts},
                {"reply", r.reply ? message_to_json(*r.reply) : nlohmann::json()},
                {"action", action_json(r.action)},
        };
    }

    LlmAgent::LlmAgent(AgentConfig config, std::unique_ptr<CompletionClient> client, Sleeper sleeper)
        : config_(std::move(config)), client_(std::move(client)), sleeper_(std::move(sleeper)),
          template_(PromptTemplate::for_mode(config_.mode)),
          window_(static_cast<std::size_t>(config_.window < 0 ? 0 : config_.window), config_.window_padding)
    {
        config_.validate();
        if (!client_)
            throw std::invalid_argument("llm agent: no completion client");
        if (!sleeper_)
            sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
    }

    std::string LlmAgent::kind() const
    {
        const std::string backend = client_->backend();
        return backend == "remote" ? "llm" : backend;
    }

    nlohmann::json LlmAgent::params() const
    {
        return {
                {"backend", client_->backend()},
                {"model", config_.model},
                {"mode", mode_label(config_.mode)},
                {"window", config_.window},
                {"temperature", config_.temperature},
                {"timeout", config_.timeout},
                {"retry_wait", config_.retry_wait},
        };
    }

    Action LlmAgent::get_action(const Observation &obs)
    {
        InteractionRecord rec;
        rec.tick = tick_++;
        rec.prompts = build_prompts(obs, window_, template_);
        ++stats_.attempts;

        CompletionRequest request{rec.prompts, schema_, &obs};
        ParseOutcome parsed;
        const auto start = std::chrono::steady_clock::now();
        try
        {
            rec.reply = client_->complete(request);
            rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            parsed = parse_action(*rec.reply);
        }
        catch (const CompletionError &e)
        {
            rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            parsed = {std::nullopt, e.kind(), e.what()};
        }
        catch (const std::exception &e)
        {
            rec.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            parsed = {std::nullopt, FailureKind::protocol, e.what()};
        }
        stats_.latencies_ms.push_back(rec.latency_ms);

        if (parsed.ok())
        {
            rec.action = *parsed.action;
            rec.action.duration = config_.default_action.duration;
            window_.push({render_state_prompt(obs, template_), format_call_text(rec.action)});
            const Action out = rec.action;
            record(std::move(rec));
            return out;
        }

        rec.outcome = parsed.failure;
        rec.detail = parsed.detail;
        rec.action = config_.default_action;
        ++stats_.failures;
        ++stats_.defaults_emitted;
        ++stats_.failures_by_kind[std::string(failure_label(parsed.failure))];
        record(std::move(rec));
        sleeper_(std::chrono::duration<double>(config_.retry_wait));
        return config_.default_action;
    }

    void LlmAgent::record(InteractionRecord rec)
    {
        if (sink_)
            *sink_ << interaction_to_json(rec).dump() << '\n';
        if (keep_records_)
            records_.push_back(std::move(rec));
    }

} // namespace rvlab::llm
