#pragma once

#include "rvlab/action.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace rvlab::llm
{

    enum class Role
    {
        system,
        user,
        assistant
    };

    std::string_view role_label(Role r);
    std::optional<Role> parse_role(std::string_view s);

    struct FunctionCall
    {
        std::string name;
        std::string arguments; ///< raw JSON text, exactly as it travels on the wire

        friend bool operator==(const FunctionCall &, const FunctionCall &) = default;
    };

    struct ChatMessage
    {
        Role role{Role::user};
        std::string content;
        std::optional<FunctionCall> function_call; ///< assistant messages only

        static ChatMessage system(std::string text) { return {Role::system, std::move(text), std::nullopt}; }
        static ChatMessage user(std::string text) { return {Role::user, std::move(text), std::nullopt}; }
        static ChatMessage assistant(std::string text) { return {Role::assistant, std::move(text), std::nullopt}; }

        /// Throws std::invalid_argument when a non-assistant message carries a call.
        void validate() const;

        friend bool operator==(const ChatMessage &, const ChatMessage &) = default;
    };

    inline constexpr std::string_view kPerformAction = "perform_action";

    /// Declared tool: perform_action(ft, rt, dt) with enumerated string labels.
    struct FunctionSchema
    {
        std::string name{kPerformAction};
        std::string description{"Apply throttles in the vessel reference frame."};

        nlohmann::json to_json() const;
    };

    /// {"ft": "forward", "rt": "left", "dt": "up"}
    std::string format_call_arguments(const Action &a);

    /// perform_action({"ft": "forward", "rt": "left", "dt": "up"})
    std::string format_call_text(const Action &a);

    /// Assistant message carrying a structured perform_action call.
    ChatMessage make_call_message(const Action &a, std::string content = {});

    nlohmann::json message_to_json(const ChatMessage &m);
    /// Accepts both the legacy function_call field and tool_calls.
    ChatMessage message_from_json(const nlohmann::json &j);

} // namespace rvlab::llm
