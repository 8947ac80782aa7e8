#include "rvlab/llm/chat.hpp"

#include <stdexcept>

namespace rvlab::llm
{

    namespace
    {
        template <std::size_t N>
        nlohmann::json enum_values(const std::array<std::string_view, N> &labels)
        {
            nlohmann::json out = nlohmann::json::array();
            for (auto l : labels)
                out.push_back(std::string(l));
            return out;
        }
    } // namespace

    std::string_view role_label(Role r)
    {
        switch (r)
        {
        case Role::system:
            return "system";
        case Role::user:
            return "user";
        case Role::assistant:
            return "assistant";
        }
        return "user";
    }

    std::optional<Role> parse_role(std::string_view s)
    {
        if (s == "system")
            return Role::system;
        if (s == "user")
            return Role::user;
        if (s == "assistant")
            return Role::assistant;
        return std::nullopt;
    }

    void ChatMessage::validate() const
    {
        if (function_call && role != Role::assistant)
            throw std::invalid_argument("chat message: only assistant messages may carry a function call");
    }

    nlohmann::json FunctionSchema::to_json() const
    {
        using nlohmann::json;
        json props = json::object();
        props["ft"] = {{"type", "string"}, {"enum", enum_values(kForeAftLabels)}, {"description", "forward thrust"}};
        props["rt"] = {{"type", "string"}, {"enum", enum_values(kLateralLabels)}, {"description", "right thrust"}};
        props["dt"] = {{"type", "string"}, {"enum", enum_values(kVerticalLabels)}, {"description", "up thrust"}};
        return json{
                {"name", name},
                {"description", description},
                {"parameters", {{"type", "object"}, {"properties", props}, {"required", {"ft", "rt", "dt"}}}},
        };
    }

    std::string format_call_arguments(const Action &a)
    {
        std::string out = "{\"ft\": \"";
        out += label(a.ft);
        out += "\", \"rt\": \"";
        out += label(a.rt);
        out += "\", \"dt\": \"";
        out += label(a.dt);
        out += "\"}";
        return out;
    }

    std::string format_call_text(const Action &a)
    {
        return std::string(kPerformAction) + "(" + format_call_arguments(a) + ")";
    }

    ChatMessage make_call_message(const Action &a, std::string content)
    {
        return {Role::assistant, std::move(content), FunctionCall{std::string(kPerformAction), format_call_arguments(a)}};
    }

    nlohmann::json message_to_json(const ChatMessage &m)
    {
        nlohmann::json j;
        j["role"] = role_label(m.role);
        if (m.function_call && m.content.empty())
            j["content"] = nullptr;
        else
            j["content"] = m.content;
        if (m.function_call)
            j["function_call"] = {{"name", m.function_call->name}, {"arguments", m.function_call->arguments}};
        return j;
    }

    ChatMessage message_from_json(const nlohmann::json &j)
    {
        if (!j.is_object())
            throw std::invalid_argument("chat message: expected an object");
        ChatMessage m;
        const auto role = parse_role(j.value("role", std::string{}));
        if (!role)
            throw std::invalid_argument("chat message: unknown role");
        m.role = *role;
        if (auto it = j.find("content"); it != j.end() && it->is_string())
            m.content = it->get<std::string>();

        const nlohmann::json *call = nullptr;
        if (auto it = j.find("function_call"); it != j.end() && it->is_object())
            call = &*it;
        else if (auto tc = j.find("tool_calls"); tc != j.end() && tc->is_array() && !tc->empty())
        {
            const auto &first = (*tc)[0];
            if (first.is_object())
                if (auto fn = first.find("function"); fn != first.end() && fn->is_object())
                    call = &*fn;
        }
        if (call)
        {
            FunctionCall fc;
            fc.name = call->value("name", std::string{});
            if (auto args = call->find("arguments"); args != call->end())
                fc.arguments = args->is_string() ? args->get<std::string>() : args->dump();
            m.function_call = std::move(fc);
        }
        m.validate();
        return m;
    }

} // namespace rvlab::llm
