#pragma once

#include "rvlab/llm/chat.hpp"
#include "rvlab/scenario.hpp"

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace rvlab::llm
{

    enum class PromptMode
    {
        plain,       ///< raw observations only
        augmented,   ///< observations plus prograde
        cot_fewshot, ///< augmented plus a worked exemplar and a reasoning cue
    };

    std::string_view mode_label(PromptMode m);
    std::optional<PromptMode> parse_mode(std::string_view s);

    inline constexpr std::string_view kQuestion = "what is the best throttle to capture evader?";
    inline constexpr std::string_view kCotSuffix = "Reason step-by-step.";
    inline constexpr std::string_view kObservationsPlaceholder = "{observations}";
    inline constexpr std::string_view kPadding = "N/A";
    inline constexpr std::string_view kHumanKeyword = "HUMAN: ";
    inline constexpr std::string_view kAssistantKeyword = "ASSISTANT: ";

    /// One past user/assistant turn.
    struct Exchange
    {
        std::string user;
        std::string assistant;

        friend bool operator==(const Exchange &, const Exchange &) = default;
    };

    struct PromptTemplate
    {
        std::string system_text;
        std::string user_text; ///< must contain {observations}
        std::optional<Exchange> exemplar;
        bool include_prograde{false};
        bool include_cot_suffix{false};
        /// Prefix user turns with HUMAN: and exemplar answers with ASSISTANT:.
        bool conversation_keywords{false};

        static PromptTemplate for_mode(PromptMode mode);
        void validate() const;
    };

    /// Last-n exchanges, oldest first; empty slots render as N/A pairs.
    class SlidingWindow
    {
    public:
        explicit SlidingWindow(std::size_t capacity = 0, bool padding = true) : capacity_(capacity), padding_(padding) {}

        void push(Exchange ex);
        void clear() { entries_.clear(); }

        std::size_t capacity() const { return capacity_; }
        std::size_t size() const { return entries_.size(); }
        bool padding() const { return padding_; }

        /// Padding (if enabled) first, then retained exchanges oldest to newest.
        std::vector<Exchange> history() const;

    private:
        std::size_t capacity_;
        bool padding_;
        std::deque<Exchange> entries_;
    };

    /// Fixed field order, 2 decimals for SI positions/velocities/masses, 3 for
    /// the unit prograde.
    std::string serialize_observation(const Observation &obs, bool include_prograde);

    /// "Given these observations {...}, what is the best throttle ...?"
    std::string render_state_prompt(const Observation &obs, const PromptTemplate &tmpl);

    /// Live question: exemplar block (if any), the state prompt and the CoT cue.
    std::string render_user_prompt(const Observation &obs, const PromptTemplate &tmpl);

    /// System, padded history, live user message.
    std::vector<ChatMessage> build_prompts(const Observation &obs, const SlidingWindow &window, const PromptTemplate &tmpl);

    /// Sign-driven explanation of the prograde marker and the chosen throttles,
    /// without the trailing call sentence.
    std::string cot_reasoning(const std::optional<Vec3> &prograde, const Action &action, double deadband = 0.08);

    /// cot_reasoning followed by "Therefore we should call perform_action(...)."
    std::string cot_answer(const std::optional<Vec3> &prograde, const Action &action, double deadband = 0.08);

    /// Worked example used by the few-shot template.
    Exchange cot_exemplar();

} // namespace rvlab::llm
