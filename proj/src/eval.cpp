#include "rvlab/eval.hpp"

#include "rvlab/json_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rvlab::eval
{

    namespace
    {
        using nlohmann::json;

        std::string fixed(double v, int digits)
        {
            std::ostringstream out;
            out << std::fixed << std::setprecision(digits) << v;
            return out.str();
        }

        std::string exact(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        double mean(const std::vector<double> &xs)
        {
            return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        }

        json row_json(const EpisodeRow &row)
        {
            json j = result_summary(row.result);
            j["seed"] = row.seed;
            j["attempts"] = row.attempts;
            j["failures"] = row.failures;
            j["defaults_emitted"] = row.defaults_emitted;
            j["latencies_ms"] = row.latencies_ms;
            return j;
        }
    } // namespace

    CampaignAggregate aggregate(const std::vector<EpisodeRow> &rows)
    {
        CampaignAggregate a;
        if (rows.empty())
            return a;

        std::vector<double> dist, speed, fuel, latencies;
        a.best_score = std::numeric_limits<double>::infinity();
        for (const EpisodeRow &r : rows)
        {
            dist.push_back(r.result.closest_distance);
            speed.push_back(r.result.speed_at_closest);
            fuel.push_back(r.result.fuel_used);
            a.best_score = std::min(a.best_score, r.result.score);
            a.attempts += r.attempts;
            a.failures += r.failures;
            latencies.insert(latencies.end(), r.latencies_ms.begin(), r.latencies_ms.end());
        }
        a.best_distance = *std::min_element(dist.begin(), dist.end());
        a.avg_distance = mean(dist);
        a.best_speed = *std::min_element(speed.begin(), speed.end());
        a.avg_speed = mean(speed);
        a.avg_fuel = mean(fuel);
        a.failure_rate = a.attempts > 0 ? static_cast<double>(a.failures) / static_cast<double>(a.attempts) : 0.0;
        if (!latencies.empty())
        {
            a.latency_best_ms = *std::min_element(latencies.begin(), latencies.end());
            a.latency_avg_ms = mean(latencies);
            double ss = 0.0;
            for (double x : latencies)
                ss += (x - a.latency_avg_ms) * (x - a.latency_avg_ms);
            a.latency_stddev_ms = std::sqrt(ss / static_cast<double>(latencies.size()));
        }
        return a;
    }

    json CampaignReport::to_json() const
    {
        json rows = json::array();
        for (const EpisodeRow &r : episodes)
            rows.push_back(row_json(r));
        return json{
                {"agent", agent},
                {"deterministic", deterministic},
                {"episodes", rows},
                {"aggregate",
                 {
                         {"best_distance", totals.best_distance},
                         {"avg_distance", totals.avg_distance},
                         {"best_speed", totals.best_speed},
                         {"avg_speed", totals.avg_speed},
                         {"avg_fuel", totals.avg_fuel},
                         {"failure_rate", totals.failure_rate},
                         {"latency_best_ms", totals.latency_best_ms},
                         {"latency_avg_ms", totals.latency_avg_ms},
                         {"latency_stddev_ms", totals.latency_stddev_ms},
                         {"best_score", totals.best_score},
                         {"attempts", totals.attempts},
                         {"failures", totals.failures},
                 }},
        };
    }

    std::string CampaignReport::table() const
    {
        std::ostringstream out;
        out << "agent: " << agent << (deterministic ? "" : " (non-deterministic)") << "\n";
        out << std::setw(8) << "seed" << std::setw(12) << "dist (m)" << std::setw(12) << "speed" << std::setw(12)
            << "fuel (kg)" << std::setw(10) << "time (s)" << std::setw(12) << "score" << std::setw(10) << "failures"
            << "  end\n";
        for (const EpisodeRow &r : episodes)
        {
            out << std::setw(8) << r.seed << std::setw(12) << fixed(r.result.closest_distance, 2) << std::setw(12)
                << fixed(r.result.speed_at_closest, 2) << std::setw(12) << fixed(r.result.fuel_used, 2) << std::setw(10)
                << fixed(r.result.elapsed, 1) << std::setw(12) << fixed(r.result.score, 3) << std::setw(10) << r.failures
                << "  " << termination_label(r.result.termination) << "\n";
        }
        out << "best dist " << fixed(totals.best_distance, 2) << " m, avg dist " << fixed(totals.avg_distance, 2)
            << " m, best speed " << fixed(totals.best_speed, 2) << " m/s, avg speed " << fixed(totals.avg_speed, 2)
            << " m/s, avg fuel " << fixed(totals.avg_fuel, 2) << " kg\n";
        out << "failure rate " << fixed(totals.failure_rate, 4) << ", latency best/avg/std " << fixed(totals.latency_best_ms, 2)
            << "/" << fixed(totals.latency_avg_ms, 2) << "/" << fixed(totals.latency_stddev_ms, 2) << " ms, best score "
            << fixed(totals.best_score, 3) << "\n";
        return out.str();
    }

    CampaignReport run_campaign(const std::string &agent, const PilotFactory &factory, const EpisodeConfig &base,
                                const std::vector<std::uint64_t> &seeds, const CampaignOptions &opts)
    {
        if (seeds.empty())
            throw std::invalid_argument("run_campaign: at least one seed is required");
        if (opts.workers < 1)
            throw std::invalid_argument("run_campaign: workers must be at least 1");
        base.validate();

        std::vector<std::unique_ptr<Pilot>> pilots;
        pilots.reserve(seeds.size());
        for (std::uint64_t seed : seeds)
        {
            auto pilot = factory(seed);
            if (!pilot)
                throw std::runtime_error("run_campaign: agent factory returned nothing for seed " + std::to_string(seed));
            pilots.push_back(std::move(pilot));
        }

        std::vector<EpisodeRow> rows(seeds.size());
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;

        auto work = [&] {
            for (std::size_t k = next++; k < seeds.size(); k = next++)
            {
                try
                {
                    EpisodeConfig cfg = base;
                    cfg.seed = seeds[k];
                    Flight flight = fly(*pilots[k], cfg);
                    EpisodeRow &row = rows[k];
                    row.seed = seeds[k];
                    row.result = std::move(flight.result);
                    if (!opts.keep_trajectories)
                        row.result.trajectory.clear();
                    row.attempts = flight.stats.attempts;
                    row.failures = flight.stats.failures;
                    row.defaults_emitted = flight.stats.defaults_emitted;
                    row.latencies_ms = std::move(flight.stats.latencies_ms);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        };

        const auto n = std::min<std::size_t>(static_cast<std::size_t>(opts.workers), seeds.size());
        if (n == 1)
        {
            work();
        }
        else
        {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < n; ++w)
                pool.emplace_back(work);
            for (auto &t : pool)
                t.join();
        }
        if (error)
            std::rethrow_exception(error);

        CampaignReport report;
        report.agent = agent;
        report.deterministic = std::all_of(pilots.begin(), pilots.end(), [](const auto &p) { return p->deterministic(); });
        report.episodes = std::move(rows);
        report.totals = aggregate(report.episodes);
        return report;
    }

    std::vector<std::uint64_t> seed_range(std::uint64_t first, int count)
    {
        if (count < 1)
            throw std::invalid_argument("seed_range: count must be at least 1");
        std::vector<std::uint64_t> out(static_cast<std::size_t>(count));
        std::iota(out.begin(), out.end(), first);
        return out;
    }

    double action_accuracy(const std::vector<Action> &predicted, const std::vector<Action> &truth)
    {
        if (predicted.size() != truth.size())
            throw std::invalid_argument("action_accuracy: sequences differ in length");
        if (truth.empty())
            throw std::invalid_argument("action_accuracy: empty sequences");
        std::size_t hits = 0;
        for (std::size_t k = 0; k < truth.size(); ++k)
            hits += predicted[k].same_labels(truth[k]) ? 1 : 0;
        return static_cast<double>(hits) / static_cast<double>(truth.size());
    }

    double cross_entropy(const std::vector<Action> &predicted, const std::vector<Action> &truth)
    {
        if (predicted.size() != truth.size())
            throw std::invalid_argument("cross_entropy: sequences differ in length");
        if (truth.empty())
            throw std::invalid_argument("cross_entropy: empty sequences");
        double total = 0.0;
        for (std::size_t k = 0; k < truth.size(); ++k)
        {
            const double p = action_class(predicted[k]) == action_class(truth[k]) ? 1.0 : 0.0;
            total += -std::log(std::clamp(p, kEpsilon, 1.0));
        }
        return total / static_cast<double>(truth.size());
    }

    std::string trajectory_jsonl(const std::vector<TrajectorySample> &trajectory)
    {
        std::string out;
        for (const TrajectorySample &s : trajectory)
        {
            out += json(s).dump();
            out += '\n';
        }
        return out;
    }

    std::string relative_motion_csv(const std::vector<TrajectorySample> &trajectory)
    {
        std::string out = "t,range,range_rate\n";
        for (const TrajectorySample &s : trajectory)
            out += exact(s.t) + "," + exact(s.range) + "," + exact(s.range_rate) + "\n";
        return out;
    }

    std::vector<std::filesystem::path> export_trajectories(const CampaignReport &report, const std::filesystem::path &dir)
    {
        std::filesystem::create_directories(dir);
        std::vector<std::filesystem::path> written;
        for (const EpisodeRow &row : report.episodes)
        {
            if (row.result.trajectory.empty())
                throw std::invalid_argument("export_trajectories: seed " + std::to_string(row.seed) +
                                            " has no stored trajectory");
            const std::string stem = "episode_" + std::to_string(row.seed);
            const auto rows_path = dir / (stem + ".jsonl");
            const auto rel_path = dir / (stem + "_relative.csv");
            write_text(rows_path, trajectory_jsonl(row.result.trajectory));
            write_text(rel_path, relative_motion_csv(row.result.trajectory));
            written.push_back(rows_path);
            written.push_back(rel_path);
        }
        return written;
    }

    std::string render_relative_svg(const std::vector<TrajectorySample> &trajectory, const std::string &title)
    {
        constexpr double W = 800, H = 300, pad = 50;
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << 2 * H << "\">\n";
        svg << "<text x=\"" << pad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
        if (trajectory.size() < 2)
        {
            svg << "</svg>\n";
            return svg.str();
        }

        const double t0 = trajectory.front().t;
        const double t1 = std::max(trajectory.back().t, t0 + 1e-9);
        auto panel = [&](double top, const char *label, const char *colour, auto value) {
            double lo = value(trajectory.front()), hi = lo;
            for (const auto &s : trajectory)
            {
                lo = std::min(lo, value(s));
                hi = std::max(hi, value(s));
            }
            if (hi - lo < 1e-9)
                hi = lo + 1.0;
            svg << "<rect x=\"" << pad << "\" y=\"" << top + pad << "\" width=\"" << W - 2 * pad << "\" height=\""
                << H - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
            svg << "<text x=\"" << pad << "\" y=\"" << top + pad - 6 << "\" font-family=\"sans-serif\" font-size=\"12\">"
                << label << " [" << fixed(lo, 1) << ", " << fixed(hi, 1) << "]</text>\n";
            svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (const auto &s : trajectory)
            {
                const double x = pad + (s.t - t0) / (t1 - t0) * (W - 2 * pad);
                const double y = top + H - pad - (value(s) - lo) / (hi - lo) * (H - 2 * pad);
                svg << fixed(x, 2) << "," << fixed(y, 2) << " ";
            }
            svg << "\"/>\n";
        };
        panel(20, "range (m)", "#1f77b4", [](const TrajectorySample &s) { return s.range; });
        panel(H, "range rate (m/s)", "#d62728", [](const TrajectorySample &s) { return s.range_rate; });
        svg << "<text x=\"" << W / 2 << "\" y=\"" << 2 * H - 10 << "\" font-family=\"sans-serif\" font-size=\"12\">t (s), "
            << fixed(t0, 1) << " to " << fixed(t1, 1) << "</text>\n";
        svg << "</svg>\n";
        return svg.str();
    }

} // namespace rvlab::eval
