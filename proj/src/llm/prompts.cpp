#include "rvlab/llm/prompts.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rvlab::llm
{

    namespace
    {
        constexpr std::string_view kSystemPreamble =
                "You operate as an autonomous agent controlling a pursuit spacecraft. Your goal is to apply throttles "
                "to capture the evader given the positions and velocities of the pursuer and evader in celestial body "
                "reference frame";
        constexpr std::string_view kSystemPrograde =
                " and the direction of pursuer's velocity relative to evader or prograde";
        constexpr std::string_view kSystemFrame =
                ". Throttles must be given in your vessel reference frame wherein the x axis points to the right, the "
                "y axis points towards the target and the z axis points upwards. The maximum throttle is 1.";
        constexpr std::string_view kSystemCot = " Reason step-by-step. After reasoning call the perform_action function.";

        std::string fixed(double v, int decimals)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
            std::string s(buf);
            // -0.00 and 0.00 must serialize identically
            if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
                s.erase(0, 1);
            return s;
        }

        std::string vec(const Vec3 &v, int decimals)
        {
            return "[" + fixed(v.x, decimals) + ", " + fixed(v.y, decimals) + ", " + fixed(v.z, decimals) + "]";
        }

        std::string substitute(const std::string &text, std::string_view placeholder, const std::string &value)
        {
            std::string out = text;
            const auto pos = out.find(placeholder);
            if (pos != std::string::npos)
                out.replace(pos, placeholder.size(), value);
            return out;
        }

        std::string join_labels(const std::vector<std::string_view> &words)
        {
            std::string out;
            for (std::size_t k = 0; k < words.size(); ++k)
            {
                if (k > 0)
                    out += (k + 1 == words.size()) ? " and " : ", ";
                out += words[k];
            }
            return out;
        }

        std::string axis_sentence(char axis, double value, double deadband, std::string_view positive,
                                  std::string_view negative)
        {
            std::string s = "The ";
            s += axis;
            s += " coordinate of prograde is ";
            if (value > deadband)
                s += "positive, indicating that pursuer is " + std::string(positive) + ".";
            else if (value < -deadband)
                s += "negative, indicating that pursuer is " + std::string(negative) + ".";
            else
            {
                s += "close to zero, indicating that pursuer is centered in the ";
                s += axis;
                s += " axis.";
            }
            return s;
        }

        Observation exemplar_observation()
        {
            Observation obs;
            obs.time = 42.5;
            obs.vehicle_mass = 4957.5;
            obs.vehicle_propellant = 957.5;
            obs.pursuer_pos = {385612.37, 600411.52, 74125.96};
            obs.pursuer_vel = {-1912.44, 1170.38, 216.07};
            obs.evader_pos = {385103.84, 600830.17, 74180.02};
            obs.evader_vel = {-1915.92, 1168.15, 217.61};
            obs.prograde = Vec3{0.452, 0.851, -0.267};
            obs.range = 661.58;
            obs.range_rate = -3.53;
            return obs;
        }
    } // namespace

    std::string_view mode_label(PromptMode m)
    {
        switch (m)
        {
        case PromptMode::plain:
            return "plain";
        case PromptMode::augmented:
            return "augmented";
        case PromptMode::cot_fewshot:
            return "cot-fewshot";
        }
        return "plain";
    }

    std::optional<PromptMode> parse_mode(std::string_view s)
    {
        for (PromptMode m : {PromptMode::plain, PromptMode::augmented, PromptMode::cot_fewshot})
            if (mode_label(m) == s)
                return m;
        return std::nullopt;
    }

    PromptTemplate PromptTemplate::for_mode(PromptMode mode)
    {
        PromptTemplate t;
        t.user_text = "Given these observations " + std::string(kObservationsPlaceholder) + ", " + std::string(kQuestion);
        t.system_text = std::string(kSystemPreamble);
        if (mode != PromptMode::plain)
        {
            t.system_text += kSystemPrograde;
            t.include_prograde = true;
        }
        t.system_text += kSystemFrame;
        if (mode == PromptMode::cot_fewshot)
        {
            t.system_text += kSystemCot;
            t.exemplar = cot_exemplar();
            t.include_cot_suffix = true;
        }
        return t;
    }

    void PromptTemplate::validate() const
    {
        const auto pos = user_text.find(kObservationsPlaceholder);
        if (pos == std::string::npos)
            throw std::invalid_argument("prompt template: user text lacks the {observations} placeholder");
        std::string rest = user_text;
        rest.erase(pos, kObservationsPlaceholder.size());
        if (rest.find('{') != std::string::npos)
            throw std::invalid_argument("prompt template: unknown placeholder in user text");
    }

    void SlidingWindow::push(Exchange ex)
    {
        if (capacity_ == 0)
            return;
        entries_.push_back(std::move(ex));
        while (entries_.size() > capacity_)
            entries_.pop_front();
    }

    std::vector<Exchange> SlidingWindow::history() const
    {
        std::vector<Exchange> out;
        if (padding_)
            for (std::size_t k = entries_.size(); k < capacity_; ++k)
                out.push_back({std::string(kPadding), std::string(kPadding)});
        out.insert(out.end(), entries_.begin(), entries_.end());
        return out;
    }

    std::string serialize_observation(const Observation &obs, bool include_prograde)
    {
        std::string s = "{";
        s += "\"time_s\": " + fixed(obs.time, 2);
        s += ", \"vehicle_mass_kg\": " + fixed(obs.vehicle_mass, 2);
        s += ", \"vehicle_propellant_kg\": " + fixed(obs.vehicle_propellant, 2);
        s += ", \"pursuer_position_m\": " + vec(obs.pursuer_pos, 2);
        s += ", \"pursuer_velocity_m_s\": " + vec(obs.pursuer_vel, 2);
        s += ", \"evader_position_m\": " + vec(obs.evader_pos, 2);
        s += ", \"evader_velocity_m_s\": " + vec(obs.evader_vel, 2);
        if (include_prograde)
            s += ", \"prograde\": " + (obs.prograde ? vec(*obs.prograde, 3) : std::string("\"none\""));
        s += "}";
        return s;
    }

    std::string render_state_prompt(const Observation &obs, const PromptTemplate &tmpl)
    {
        std::string s = substitute(tmpl.user_text, kObservationsPlaceholder, serialize_observation(obs, tmpl.include_prograde));
        if (tmpl.conversation_keywords)
            s.insert(0, kHumanKeyword);
        return s;
    }

    std::string render_user_prompt(const Observation &obs, const PromptTemplate &tmpl)
    {
        std::string s;
        if (tmpl.exemplar)
        {
            if (tmpl.conversation_keywords)
                s += kHumanKeyword;
            s += tmpl.exemplar->user;
            s += "\n";
            if (tmpl.conversation_keywords)
                s += kAssistantKeyword;
            s += tmpl.exemplar->assistant;
            s += "\n\nNow answer the following question:\n\n";
        }
        PromptTemplate live = tmpl;
        live.conversation_keywords = tmpl.conversation_keywords && !tmpl.exemplar;
        s += render_state_prompt(obs, live);
        if (tmpl.include_cot_suffix)
        {
            s += " ";
            s += kCotSuffix;
        }
        return s;
    }

    std::vector<ChatMessage> build_prompts(const Observation &obs, const SlidingWindow &window, const PromptTemplate &tmpl)
    {
        std::vector<ChatMessage> out;
        out.push_back(ChatMessage::system(tmpl.system_text));
        for (const Exchange &ex : window.history())
        {
            out.push_back(ChatMessage::user(ex.user));
            out.push_back(ChatMessage::assistant(ex.assistant));
        }
        out.push_back(ChatMessage::user(render_user_prompt(obs, tmpl)));
        return out;
    }

    std::string cot_reasoning(const std::optional<Vec3> &prograde, const Action &action, double deadband)
    {
        std::string s;
        if (!prograde)
        {
            s = "The relative velocity is zero, so there is no prograde motion relative to the evader.";
        }
        else
        {
            const Vec3 &p = *prograde;
            s += axis_sentence('x', p.x, deadband, "moving to the right", "moving to the left");
            s += " ";
            // Positive y means the relative velocity points at the target.
            s += axis_sentence('y', p.y, 0.0, "approaching", "moving away");
            s += " ";
            s += axis_sentence('z', p.z, deadband, "moving up", "moving down");
        }

        std::vector<std::string> clauses;
        clauses.push_back(action.rt == Lateral::none ? "holding steady in the x axis" : "moving in the opposite direction in the x axis");
        switch (action.ft)
        {
        case ForeAft::forward:
            clauses.push_back("towards the target in the y axis");
            break;
        case ForeAft::backward:
            clauses.push_back("braking away from the target in the y axis");
            break;
        case ForeAft::none:
            clauses.push_back("keeping our speed in the y axis");
            break;
        }
        clauses.push_back(action.dt == Vertical::none ? "holding steady in the z axis" : "moving in the opposite direction in the z axis");
        s += " To capture the evader we should counteract pursuer's motion, " + clauses[0] + ", " + clauses[1] + ", and " +
             clauses[2] + ".";

        std::vector<std::string_view> moves;
        if (action.rt != Lateral::none)
            moves.push_back(label(action.rt));
        if (action.ft != ForeAft::none)
            moves.push_back(label(action.ft));
        if (action.dt != Vertical::none)
            moves.push_back(label(action.dt));
        if (moves.empty())
            s += " This means we should not apply any throttle.";
        else
            s += " This means we should apply throttles to move " + join_labels(moves) + ".";
        return s;
    }

    std::string cot_answer(const std::optional<Vec3> &prograde, const Action &action, double deadband)
    {
        return cot_reasoning(prograde, action, deadband) + " Therefore we should call " + format_call_text(action) + ".";
    }

    Exchange cot_exemplar()
    {
        const Observation obs = exemplar_observation();
        PromptTemplate t;
        t.user_text = "Given these observations " + std::string(kObservationsPlaceholder) + ", " + std::string(kQuestion);
        t.include_prograde = true;
        const Action act{ForeAft::forward, Lateral::left, Vertical::up};
        return {render_state_prompt(obs, t), cot_answer(obs.prograde, act)};
    }

} // namespace rvlab::llm
