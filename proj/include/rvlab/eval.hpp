#pragma once

#include "rvlab/action.hpp"
#include "rvlab/pilot.hpp"
#include "rvlab/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rvlab::eval
{

    inline constexpr double kEpsilon = 2.220446049250313e-16;

    struct EpisodeRow
    {
        std::uint64_t seed{0};
        EpisodeResult result; ///< trajectory dropped unless the campaign keeps it
        long attempts{0};
        long failures{0};
        long defaults_emitted{0};
        std::vector<double> latencies_ms;
    };

    struct CampaignAggregate
    {
        double best_distance{0.0};
        double avg_distance{0.0};
        double best_speed{0.0};
        double avg_speed{0.0};
        double avg_fuel{0.0};
        double failure_rate{0.0};
        double latency_best_ms{0.0};
        double latency_avg_ms{0.0};
        double latency_stddev_ms{0.0}; ///< population
        double best_score{0.0};
        long attempts{0};
        long failures{0};

        friend bool operator==(const CampaignAggregate &, const CampaignAggregate &) = default;
    };

    /// Reduces per-episode rows; latency figures come from every attempt's record.
    CampaignAggregate aggregate(const std::vector<EpisodeRow> &rows);

    struct CampaignReport
    {
        std::string agent;
        bool deterministic{true};
        std::vector<EpisodeRow> episodes;
        CampaignAggregate totals;

        nlohmann::json to_json() const;
        std::string table() const;
    };

    using PilotFactory = std::function<std::unique_ptr<Pilot>(std::uint64_t seed)>;

    struct CampaignOptions
    {
        int workers{1};
        bool keep_trajectories{false};
    };

    /// One episode per seed. Every pilot is built before any episode runs, so a
    /// construction failure aborts the campaign with nothing reported.
    CampaignReport run_campaign(const std::string &agent, const PilotFactory &factory, const EpisodeConfig &base,
                                const std::vector<std::uint64_t> &seeds, const CampaignOptions &opts = {});

    std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);

    /// Fraction of samples whose full (ft, rt, dt) triple matches.
    double action_accuracy(const std::vector<Action> &predicted, const std::vector<Action> &truth);

    /// Mean of -ln(clamp(p_truth, eps, 1)) for one-hot predictions over the 27 classes.
    double cross_entropy(const std::vector<Action> &predicted, const std::vector<Action> &truth);

    /// Newline-delimited trajectory rows, one per stored sample.
    std::string trajectory_jsonl(const std::vector<TrajectorySample> &trajectory);

    /// t,range,range_rate per row.
    std::string relative_motion_csv(const std::vector<TrajectorySample> &trajectory);

    /// Writes episode_<seed>.jsonl and episode_<seed>_relative.csv per row. Needs
    /// trajectories kept.
    std::vector<std::filesystem::path> export_trajectories(const CampaignReport &report, const std::filesystem::path &dir);

    /// Range and range-rate against time, as a standalone SVG document.
    std::string render_relative_svg(const std::vector<TrajectorySample> &trajectory, const std::string &title);

} // namespace rvlab::eval
