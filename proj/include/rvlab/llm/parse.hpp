#pragma once

#include "rvlab/action.hpp"
#include "rvlab/llm/chat.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rvlab::llm
{

    /// Why an agent call produced no action. `none` means success.
    enum class FailureKind
    {
        none,
        no_action,      ///< nothing extractable from the reply
        unknown_label,  ///< a label outside the enumerations
        ambiguous,      ///< two labels on one axis
        malformed_call, ///< call present but unreadable (bad JSON, wrong name)
        timeout,
        transport, ///< connection-level failure
        protocol,  ///< unexpected status or response body
        auth,
    };

    std::string_view failure_label(FailureKind k);
    std::optional<FailureKind> parse_failure_kind(std::string_view s);

    struct ParseOutcome
    {
        std::optional<Action> action;
        FailureKind failure{FailureKind::none};
        std::string detail;

        bool ok() const { return action.has_value(); }
    };

    /// Structured call first, then a perform_action(...) call written in the
    /// text, then directional keywords in the last sentence.
    ParseOutcome parse_action(const ChatMessage &reply);

    /// Every perform_action(...) call in the text, in order. Fails if any call
    /// is unreadable or none is present.
    struct SequenceOutcome
    {
        std::vector<Action> actions;
        FailureKind failure{FailureKind::none};
        std::string detail;

        bool ok() const { return failure == FailureKind::none; }
    };
    SequenceOutcome parse_action_sequence(std::string_view text);

} // namespace rvlab::llm
