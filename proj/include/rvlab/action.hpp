#pragma once

#include "rvlab/vec3.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace rvlab
{

    enum class ForeAft
    {
        backward,
        none,
        forward
    };

    enum class Lateral
    {
        left,
        none,
        right
    };

    enum class Vertical
    {
        down,
        none,
        up
    };

    /// Discrete throttle command on the three vessel axes.
    struct Action
    {
        ForeAft ft{ForeAft::none};
        Lateral rt{Lateral::none};
        Vertical dt{Vertical::none};
        double duration{0.5}; ///< s

        static Action coast() { return {}; }
        bool is_coast() const { return ft == ForeAft::none && rt == Lateral::none && dt == Vertical::none; }

        /// Label equality; duration is transport metadata.
        bool same_labels(const Action &o) const { return ft == o.ft && rt == o.rt && dt == o.dt; }

        friend bool operator==(const Action &, const Action &) = default;
    };

    inline constexpr std::array<std::string_view, 3> kForeAftLabels{"backward", "none", "forward"};
    inline constexpr std::array<std::string_view, 3> kLateralLabels{"left", "none", "right"};
    inline constexpr std::array<std::string_view, 3> kVerticalLabels{"down", "none", "up"};

    std::string_view label(ForeAft v);
    std::string_view label(Lateral v);
    std::string_view label(Vertical v);

    std::optional<ForeAft> parse_fore_aft(std::string_view s);
    std::optional<Lateral> parse_lateral(std::string_view s);
    std::optional<Vertical> parse_vertical(std::string_view s);

    /// "ft=forward rt=left dt=up" style rendering for logs and tables.
    std::string describe(const Action &a);

    /// Class index in [0, 27) for the (ft, rt, dt) triple.
    int action_class(const Action &a);
    Action action_from_class(int cls);

    /// Vessel-frame throttle: x right, y forward, z up; components in {-1, 0, 1}.
    Vec3 action_to_throttle(const Action &a);

} // namespace rvlab
