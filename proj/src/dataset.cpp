#include "rvlab/dataset.hpp"

#include "rvlab/llm/parse.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rvlab::dataset
{

    namespace
    {
        using ojson = nlohmann::ordered_json;

        std::vector<std::string> split_lines(const std::string &text)
        {
            std::vector<std::string> lines;
            std::istringstream in(text);
            std::string line;
            while (std::getline(in, line))
                if (!line.empty())
                    lines.push_back(line);
            return lines;
        }

        std::string join_calls(const std::vector<Action> &targets)
        {
            std::string out;
            for (std::size_t k = 0; k < targets.size(); ++k)
            {
                if (k > 0)
                    out += "\n";
                out += llm::format_call_text(targets[k]);
            }
            return out;
        }

        std::set<std::string> keys_of(const nlohmann::json &j)
        {
            std::set<std::string> out;
            for (const auto &[k, _] : j.items())
                out.insert(k);
            return out;
        }

        // Strict chat-line reader. Returns the decoded targets or throws.
        std::vector<Action> read_chat_line(const nlohmann::json &j)
        {
            if (!j.is_object() || keys_of(j) != std::set<std::string>{"messages"})
                throw std::invalid_argument("chat record must be an object with exactly one field 'messages'");
            const auto &msgs = j.at("messages");
            if (!msgs.is_array() || msgs.size() < 3)
                throw std::invalid_argument("messages must hold system, user and assistant turns");

            std::size_t systems = 0, users = 0;
            for (std::size_t k = 0; k < msgs.size(); ++k)
            {
                const auto &m = msgs[k];
                if (!m.is_object())
                    throw std::invalid_argument("message is not an object");
                const auto keys = keys_of(m);
                const bool has_call = keys.count("function_call") > 0;
                const std::set<std::string> plain{"role", "content"};
                const std::set<std::string> with_call{"role", "content", "function_call"};
                if (keys != plain && keys != with_call)
                    throw std::invalid_argument("message has unexpected fields");
                const std::string role = m.at("role").get<std::string>();
                const auto &content = m.at("content");
                if (!content.is_string() && !(content.is_null() && has_call))
                    throw std::invalid_argument("message content must be a string");
                if (role == "system")
                {
                    if (k != 0)
                        throw std::invalid_argument("system message must come first");
                    ++systems;
                }
                else if (role == "user")
                    ++users;
                else if (role != "assistant")
                    throw std::invalid_argument("unknown role '" + role + "'");
                if (has_call)
                {
                    if (role != "assistant" || k + 1 != msgs.size())
                        throw std::invalid_argument("function_call only on the final assistant message");
                    if (keys_of(m.at("function_call")) != std::set<std::string>{"name", "arguments"})
                        throw std::invalid_argument("function_call must have exactly name and arguments");
                }
            }
            if (systems != 1 || users < 1 || msgs.back().at("role") != "assistant")
                throw std::invalid_argument("chat record needs one system, at least one user and a final assistant message");

            const llm::ChatMessage reply = llm::message_from_json(msgs.back());
            if (reply.function_call)
            {
                const llm::ParseOutcome p = llm::parse_action(reply);
                if (!p.ok())
                    throw std::invalid_argument("assistant call does not parse: " + p.detail);
                return {*p.action};
            }
            const llm::SequenceOutcome seq = llm::parse_action_sequence(reply.content);
            if (!seq.ok())
                throw std::invalid_argument("assistant text does not parse: " + seq.detail);
            return seq.actions;
        }

        std::vector<Action> read_alpaca_line(const nlohmann::json &j)
        {
            if (!j.is_object() || keys_of(j) != std::set<std::string>{"instruction", "output", "system", "history"})
                throw std::invalid_argument("alpaca record must have exactly instruction, output, system, history");
            for (const char *k : {"instruction", "output", "system"})
                if (!j.at(k).is_string())
                    throw std::invalid_argument(std::string(k) + " must be a string");
            const auto &hist = j.at("history");
            if (!hist.is_array())
                throw std::invalid_argument("history must be an array");
            for (const auto &pair : hist)
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
                    throw std::invalid_argument("history entries must be [user, assistant] string pairs");
            const llm::SequenceOutcome seq = llm::parse_action_sequence(j.at("output").get<std::string>());
            if (!seq.ok())
                throw std::invalid_argument("output does not parse: " + seq.detail);
            return seq.actions;
        }
    } // namespace

    std::string_view format_label(Format f) { return f == Format::alpaca ? "alpaca" : "chat-jsonl"; }

    std::optional<Format> parse_format(std::string_view s)
    {
        if (s == "chat-jsonl")
            return Format::chat_jsonl;
        if (s == "alpaca")
            return Format::alpaca;
        return std::nullopt;
    }

    void Options::validate() const
    {
        if (window < 0)
            throw std::invalid_argument("dataset: window must be non-negative");
        if (lookahead < 1)
            throw std::invalid_argument("dataset: lookahead must be at least 1");
        if (!(cot_deadband >= 0.0))
            throw std::invalid_argument("dataset: cot deadband must be non-negative");
    }

    GameplayLog record_episode(Pilot &agent, const EpisodeConfig &config) { return fly(agent, config).log; }

    std::vector<Record> base_records(const GameplayLog &log, const Options &opts)
    {
        opts.validate();
        log.validate();
        llm::PromptTemplate tmpl = llm::PromptTemplate::for_mode(opts.mode);
        tmpl.conversation_keywords = opts.conversation_keywords;

        std::vector<Record> out;
        out.reserve(log.samples.size());
        for (const GameplaySample &s : log.samples)
        {
            Record r;
            r.seed = log.meta.seed;
            r.tick = s.tick;
            r.agent = log.meta.agent;
            r.system = tmpl.system_text;
            r.user = llm::render_user_prompt(s.observation, tmpl);
            r.state_prompt = llm::render_state_prompt(s.observation, tmpl);
            r.targets = {s.action};
            r.prograde = s.observation.prograde;
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<Record> windowed(std::vector<Record> records, int n)
    {
        if (n < 0)
            throw std::invalid_argument("windowed: n must be non-negative");
        if (n == 0)
            return records;
        std::vector<llm::Exchange> past;
        for (Record &r : records)
        {
            const auto real = std::min<std::size_t>(past.size(), static_cast<std::size_t>(n));
            r.history.assign(static_cast<std::size_t>(n) - real, {std::string(llm::kPadding), std::string(llm::kPadding)});
            r.history.insert(r.history.end(), past.end() - static_cast<std::ptrdiff_t>(real), past.end());
            past.push_back({r.state_prompt, llm::format_call_text(r.targets.front())});
        }
        return records;
    }

    std::vector<Record> lookahead(std::vector<Record> records, int k)
    {
        if (k < 1)
            throw std::invalid_argument("lookahead: k must be at least 1");
        if (k == 1)
            return records;
        const auto kk = static_cast<std::size_t>(k);
        if (records.size() < kk)
            return {};
        std::vector<Action> taken;
        for (const Record &r : records)
            taken.push_back(r.targets.front());
        records.resize(records.size() - (kk - 1));
        for (std::size_t i = 0; i < records.size(); ++i)
            records[i].targets.assign(taken.begin() + static_cast<std::ptrdiff_t>(i),
                                      taken.begin() + static_cast<std::ptrdiff_t>(i + kk));
        return records;
    }

    std::vector<Record> annotate_cot(std::vector<Record> records, double deadband)
    {
        for (Record &r : records)
            r.reasoning = llm::cot_reasoning(r.prograde, r.targets.front(), deadband);
        return records;
    }

    std::vector<Record> build(const GameplayLog &log, const Options &opts)
    {
        std::vector<Record> records = base_records(log, opts);
        records = windowed(std::move(records), opts.window);
        records = lookahead(std::move(records), opts.lookahead);
        if (opts.cot)
            records = annotate_cot(std::move(records), opts.cot_deadband);
        return records;
    }

    std::string record_output(const Record &r)
    {
        if (r.targets.size() == 1)
        {
            if (r.reasoning)
                return *r.reasoning + " Therefore we should call " + llm::format_call_text(r.targets.front()) + ".";
            return llm::format_call_text(r.targets.front());
        }
        return (r.reasoning ? *r.reasoning + "\n" : std::string()) + join_calls(r.targets);
    }

    llm::ChatMessage record_reply(const Record &r)
    {
        if (r.targets.size() == 1)
            return llm::make_call_message(r.targets.front(), r.reasoning.value_or(std::string()));
        return llm::ChatMessage::assistant(record_output(r));
    }

    std::string to_chat_jsonl(const std::vector<Record> &records)
    {
        std::string out;
        for (const Record &r : records)
        {
            ojson msgs = ojson::array();
            auto push = [&msgs](const llm::ChatMessage &m) { msgs.push_back(ojson::parse(llm::message_to_json(m).dump())); };
            msgs.push_back(ojson{{"role", "system"}, {"content", r.system}});
            for (const llm::Exchange &ex : r.history)
            {
                msgs.push_back(ojson{{"role", "user"}, {"content", ex.user}});
                msgs.push_back(ojson{{"role", "assistant"}, {"content", ex.assistant}});
            }
            msgs.push_back(ojson{{"role", "user"}, {"content", r.user}});
            const llm::ChatMessage reply = record_reply(r);
            if (reply.function_call)
            {
                ojson m{{"role", "assistant"}};
                m["content"] = reply.content.empty() ? ojson() : ojson(reply.content);
                m["function_call"] = ojson{{"name", reply.function_call->name}, {"arguments", reply.function_call->arguments}};
                msgs.push_back(std::move(m));
            }
            else
            {
                push(reply);
            }
            out += ojson{{"messages", msgs}}.dump();
            out += '\n';
        }
        return out;
    }

    std::string to_alpaca(const std::vector<Record> &records)
    {
        std::string out;
        for (const Record &r : records)
        {
            ojson hist = ojson::array();
            for (const llm::Exchange &ex : r.history)
                hist.push_back(ojson::array({ex.user, ex.assistant}));
            const ojson j{{"instruction", r.user}, {"output", record_output(r)}, {"system", r.system}, {"history", hist}};
            out += j.dump();
            out += '\n';
        }
        return out;
    }

    std::string serialize(const std::vector<Record> &records, Format format)
    {
        return format == Format::alpaca ? to_alpaca(records) : to_chat_jsonl(records);
    }

    std::string provenance_jsonl(const std::vector<Record> &records)
    {
        std::string out;
        for (std::size_t k = 0; k < records.size(); ++k)
        {
            const ojson j{{"record", k}, {"seed", records[k].seed}, {"tick", records[k].tick}, {"agent", records[k].agent}};
            out += j.dump();
            out += '\n';
        }
        return out;
    }

    VerifyReport verify(const std::vector<GameplayLog> &logs, const std::string &exported, const std::string &provenance,
                        Format format, const Options &opts)
    {
        VerifyReport report;
        const auto lines = split_lines(exported);
        const auto prov = split_lines(provenance);
        report.records = lines.size();
        if (prov.size() != lines.size())
            report.errors.push_back("provenance has " + std::to_string(prov.size()) + " lines for " +
                                    std::to_string(lines.size()) + " records");

        std::map<std::pair<std::uint64_t, std::string>, const GameplayLog *> by_source;
        for (const GameplayLog &log : logs)
            by_source[{log.meta.seed, log.meta.agent}] = &log;

        for (std::size_t k = 0; k < lines.size() && k < prov.size(); ++k)
        {
            try
            {
                const auto p = nlohmann::json::parse(prov[k]);
                const auto seed = p.at("seed").get<std::uint64_t>();
                const auto tick = p.at("tick").get<int>();
                const auto agent = p.at("agent").get<std::string>();
                const auto src = by_source.find({seed, agent});
                if (src == by_source.end())
                    throw std::invalid_argument("no source log for seed " + std::to_string(seed));

                const auto line = nlohmann::json::parse(lines[k]);
                const std::vector<Action> decoded = format == Format::alpaca ? read_alpaca_line(line) : read_chat_line(line);
                if (static_cast<int>(decoded.size()) != opts.lookahead)
                    throw std::invalid_argument("decoded " + std::to_string(decoded.size()) + " actions, expected " +
                                                std::to_string(opts.lookahead));
                const auto &samples = src->second->samples;
                for (std::size_t a = 0; a < decoded.size(); ++a)
                {
                    const std::size_t at = static_cast<std::size_t>(tick) + a;
                    if (at >= samples.size() || !decoded[a].same_labels(samples[at].action))
                        throw std::invalid_argument("action " + std::to_string(a) + " differs from log at tick " +
                                                    std::to_string(at));
                }
                ++report.verified;
            }
            catch (const std::exception &e)
            {
                report.errors.push_back("record " + std::to_string(k) + ": " + e.what());
            }
        }

        std::vector<Record> rebuilt;
        for (const GameplayLog &log : logs)
        {
            auto part = build(log, opts);
            rebuilt.insert(rebuilt.end(), part.begin(), part.end());
        }
        if (serialize(rebuilt, format) != exported)
            report.errors.push_back("exported bytes differ from a fresh rebuild");
        if (provenance_jsonl(rebuilt) != provenance)
            report.errors.push_back("provenance differs from a fresh rebuild");
        return report;
    }

} // namespace rvlab::dataset
