#include "rvlab/action.hpp"

#include <stdexcept>

namespace rvlab
{

    namespace
    {
        template <typename E>
        std::optional<E> lookup(const std::array<std::string_view, 3> &labels, std::string_view s)
        {
            for (std::size_t k = 0; k < labels.size(); ++k)
                if (labels[k] == s)
                    return static_cast<E>(k);
            return std::nullopt;
        }

        double axis_value(int index) { return static_cast<double>(index - 1); }
    } // namespace

    std::string_view label(ForeAft v) { return kForeAftLabels[static_cast<std::size_t>(v)]; }
    std::string_view label(Lateral v) { return kLateralLabels[static_cast<std::size_t>(v)]; }
    std::string_view label(Vertical v) { return kVerticalLabels[static_cast<std::size_t>(v)]; }

    std::optional<ForeAft> parse_fore_aft(std::string_view s) { return lookup<ForeAft>(kForeAftLabels, s); }
    std::optional<Lateral> parse_lateral(std::string_view s) { return lookup<Lateral>(kLateralLabels, s); }
    std::optional<Vertical> parse_vertical(std::string_view s) { return lookup<Vertical>(kVerticalLabels, s); }

    std::string describe(const Action &a)
    {
        std::string out = "ft=";
        out += label(a.ft);
        out += " rt=";
        out += label(a.rt);
        out += " dt=";
        out += label(a.dt);
        return out;
    }

    int action_class(const Action &a)
    {
        return static_cast<int>(a.ft) * 9 + static_cast<int>(a.rt) * 3 + static_cast<int>(a.dt);
    }

    Action action_from_class(int cls)
    {
        if (cls < 0 || cls >= 27)
            throw std::out_of_range("action_from_class: class index must lie in [0, 27)");
        Action a;
        a.ft = static_cast<ForeAft>(cls / 9);
        a.rt = static_cast<Lateral>((cls / 3) % 3);
        a.dt = static_cast<Vertical>(cls % 3);
        return a;
    }

    Vec3 action_to_throttle(const Action &a)
    {
        // Enum order is (negative, none, positive) on every axis.
        return {axis_value(static_cast<int>(a.rt)), axis_value(static_cast<int>(a.ft)), axis_value(static_cast<int>(a.dt))};
    }

} // namespace rvlab
