#include "rvlab/llm/parse.hpp"

#include <array>

namespace rvlab::llm
{

    namespace
    {
        constexpr std::array<std::string_view, 9> kFailureLabels{
                "none", "no_action", "unknown_label", "ambiguous", "malformed_call",
                "timeout", "transport", "protocol", "auth",
        };

        bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
        bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
        char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

        std::string to_lower(std::string_view s)
        {
            std::string out(s);
            for (char &c : out)
                c = lower(c);
            return out;
        }

        std::string_view trim(std::string_view s, std::string_view junk = " \t\r\n")
        {
            const auto b = s.find_first_not_of(junk);
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(junk);
            return s.substr(b, e - b + 1);
        }

        ParseOutcome fail(FailureKind kind, std::string detail) { return {std::nullopt, kind, std::move(detail)}; }

        // Applies one key/value pair; returns a failure outcome or nullopt on success.
        std::optional<ParseOutcome> assign(Action &a, bool &seen, std::string_view key, std::string_view value)
        {
            const std::string k = to_lower(trim(key, " \t\r\n\"'"));
            const std::string v = to_lower(trim(value, " \t\r\n\"'"));
            if (k == "ft")
            {
                const auto parsed = parse_fore_aft(v);
                if (!parsed)
                    return fail(FailureKind::unknown_label, "unknown ft label '" + v + "'");
                a.ft = *parsed;
            }
            else if (k == "rt")
            {
                const auto parsed = parse_lateral(v);
                if (!parsed)
                    return fail(FailureKind::unknown_label, "unknown rt label '" + v + "'");
                a.rt = *parsed;
            }
            else if (k == "dt")
            {
                const auto parsed = parse_vertical(v);
                if (!parsed)
                    return fail(FailureKind::unknown_label, "unknown dt label '" + v + "'");
                a.dt = *parsed;
            }
            else
            {
                return std::nullopt;
            }
            seen = true;
            return std::nullopt;
        }

        // JSON object first; otherwise the relaxed {ft: forward, rt: left} form.
        ParseOutcome parse_arguments(std::string_view args)
        {
            Action a;
            bool seen = false;
            const auto j = nlohmann::json::parse(args.begin(), args.end(), nullptr, false);
            if (!j.is_discarded())
            {
                if (!j.is_object())
                    return fail(FailureKind::malformed_call, "call arguments are not an object");
                for (const auto &[key, value] : j.items())
                {
                    if (key != "ft" && key != "rt" && key != "dt")
                        continue;
                    if (!value.is_string())
                        return fail(FailureKind::unknown_label, "label for " + key + " is not a string");
                    if (auto err = assign(a, seen, key, value.get_ref<const std::string &>()))
                        return *err;
                }
            }
            else
            {
                std::string_view body = trim(args);
                if (body.size() >= 2 && body.front() == '{' && body.back() == '}')
                    body = body.substr(1, body.size() - 2);
                while (!trim(body).empty())
                {
                    const auto comma = body.find(',');
                    const std::string_view item = body.substr(0, comma);
                    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
                    auto sep = item.find(':');
                    if (sep == std::string_view::npos)
                        sep = item.find('=');
                    if (sep == std::string_view::npos)
                        return fail(FailureKind::malformed_call, "unreadable call argument '" + std::string(trim(item)) + "'");
                    if (auto err = assign(a, seen, item.substr(0, sep), item.substr(sep + 1)))
                        return *err;
                }
            }
            if (!seen)
                return fail(FailureKind::malformed_call, "call carries no ft/rt/dt argument");
            return {a, FailureKind::none, {}};
        }

        struct TextCall
        {
            std::string_view arguments;
            bool closed{false};
        };

        std::vector<TextCall> find_text_calls(std::string_view text)
        {
            std::vector<TextCall> calls;
            std::size_t pos = 0;
            while ((pos = text.find(kPerformAction, pos)) != std::string_view::npos)
            {
                std::size_t k = pos + kPerformAction.size();
                pos = k;
                while (k < text.size() && is_space(text[k]))
                    ++k;
                if (k >= text.size() || text[k] != '(')
                    continue; // a mention, not a call
                const auto close = text.find(')', k + 1);
                if (close == std::string_view::npos)
                {
                    calls.push_back({text.substr(k + 1), false});
                    break;
                }
                calls.push_back({text.substr(k + 1, close - k - 1), true});
                pos = close + 1;
            }
            return calls;
        }

        std::string_view last_sentence(std::string_view text)
        {
            std::string_view rest = trim(text, " \t\r\n.!?");
            const auto cut = rest.find_last_of(".!?\n");
            return cut == std::string_view::npos ? rest : trim(rest.substr(cut + 1));
        }

        ParseOutcome parse_keywords(std::string_view text)
        {
            const std::string_view sentence = last_sentence(text);
            std::optional<ForeAft> ft;
            std::optional<Lateral> rt;
            std::optional<Vertical> dt;
            bool conflict = false;

            auto note = [&conflict](auto &slot, auto value) {
                if (slot && *slot != value)
                    conflict = true;
                slot = value;
            };

            std::size_t k = 0;
            while (k < sentence.size())
            {
                if (!is_alpha(sentence[k]))
                {
                    ++k;
                    continue;
                }
                std::size_t e = k;
                while (e < sentence.size() && is_alpha(sentence[e]))
                    ++e;
                const std::string word = to_lower(sentence.substr(k, e - k));
                k = e;
                if (word == "forward")
                    note(ft, ForeAft::forward);
                else if (word == "backward")
                    note(ft, ForeAft::backward);
                else if (word == "left")
                    note(rt, Lateral::left);
                else if (word == "right")
                    note(rt, Lateral::right);
                else if (word == "up")
                    note(dt, Vertical::up);
                else if (word == "down")
                    note(dt, Vertical::down);
            }

            if (conflict)
                return fail(FailureKind::ambiguous, "contradictory directions in '" + std::string(sentence) + "'");
            if (!ft && !rt && !dt)
                return fail(FailureKind::no_action, "no action found in reply");
            Action a;
            a.ft = ft.value_or(ForeAft::none);
            a.rt = rt.value_or(Lateral::none);
            a.dt = dt.value_or(Vertical::none);
            return {a, FailureKind::none, {}};
        }
    } // namespace

    std::string_view failure_label(FailureKind k) { return kFailureLabels[static_cast<std::size_t>(k)]; }

    std::optional<FailureKind> parse_failure_kind(std::string_view s)
    {
        for (std::size_t k = 0; k < kFailureLabels.size(); ++k)
            if (kFailureLabels[k] == s)
                return static_cast<FailureKind>(k);
        return std::nullopt;
    }

    ParseOutcome parse_action(const ChatMessage &reply)
    {
        if (reply.role != Role::assistant)
            return fail(FailureKind::no_action, "reply is not an assistant message");

        if (reply.function_call)
        {
            if (reply.function_call->name != kPerformAction)
                return fail(FailureKind::malformed_call, "unexpected function '" + reply.function_call->name + "'");
            return parse_arguments(reply.function_call->arguments);
        }

        const auto calls = find_text_calls(reply.content);
        if (!calls.empty())
        {
            if (!calls.front().closed)
                return fail(FailureKind::malformed_call, "unterminated perform_action call");
            return parse_arguments(calls.front().arguments);
        }

        return parse_keywords(reply.content);
    }

    SequenceOutcome parse_action_sequence(std::string_view text)
    {
        SequenceOutcome out;
        const auto calls = find_text_calls(text);
        if (calls.empty())
        {
            out.failure = FailureKind::no_action;
            out.detail = "no perform_action call in text";
            return out;
        }
        for (const TextCall &c : calls)
        {
            if (!c.closed)
            {
                out.actions.clear();
                out.failure = FailureKind::malformed_call;
                out.detail = "unterminated perform_action call";
                return out;
            }
            ParseOutcome one = parse_arguments(c.arguments);
            if (!one.ok())
            {
                out.actions.clear();
                out.failure = one.failure;
                out.detail = std::move(one.detail);
                return out;
            }
            out.actions.push_back(*one.action);
        }
        return out;
    }

} // namespace rvlab::llm
