#include "rvlab/dataset.hpp"
#include "rvlab/eval.hpp"
#include "rvlab/json_io.hpp"
#include "rvlab/llm/agent.hpp"
#include "rvlab/pilot.hpp"
#include "rvlab/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <pthread.h>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rvlab;

namespace
{

    rvlab::EpisodeConfig load_config(const std::string &path, double max_duration)
    {
        EpisodeConfig cfg;
        if (!path.empty())
            from_json(json::parse(read_text(path)), cfg);
        if (max_duration > 0.0)
            cfg.max_duration = max_duration;
        cfg.validate();
        return cfg;
    }

    struct AgentOptions
    {
        std::string agent{"navball"};
        std::string endpoint;
        std::string model;
        double timeout{30.0};
        double temperature{0.0};
        int window{0};
        std::string mode{"augmented"};
        double retry_wait{1.0};
        std::string mock_replies; ///< file, one reply per line, cycled
        std::string interaction_log;
    };

    void add_agent_options(CLI::App *cmd, AgentOptions &o, bool with_llm)
    {
        std::vector<std::string> agents{"navball", "naive", "oracle", "mock"};
        if (with_llm)
            agents.push_back("llm");
        cmd->add_option("--agent", o.agent, "Pilot")->check(CLI::IsMember(agents));
        cmd->add_option("--endpoint", o.endpoint, "Chat-completions URL (llm)");
        cmd->add_option("--model", o.model, "Model name (llm)");
        cmd->add_option("--timeout", o.timeout, "Completion timeout in seconds")->check(CLI::PositiveNumber);
        cmd->add_option("--temperature", o.temperature, "Sampling temperature");
        cmd->add_option("--window", o.window, "Sliding-window size")->check(CLI::NonNegativeNumber);
        cmd->add_option("--mode", o.mode, "Prompting mode")->check(CLI::IsMember({"plain", "augmented", "cot-fewshot"}));
        cmd->add_option("--retry-wait", o.retry_wait, "Seconds to wait after a failed completion")
                ->check(CLI::NonNegativeNumber);
        cmd->add_option("--mock-replies", o.mock_replies, "Reply file for the mock backend, one reply per line");
        cmd->add_option("--interaction-log", o.interaction_log, "Append LLM interaction records here (JSONL)");
    }

    std::vector<llm::ChatMessage> mock_replies(const std::string &path)
    {
        if (path.empty())
            return {llm::ChatMessage::assistant("perform_action({\"ft\": \"forward\", \"rt\": \"none\", \"dt\": \"none\"})")};
        std::vector<llm::ChatMessage> out;
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open " + path);
        for (std::string line; std::getline(in, line);)
            out.push_back(llm::ChatMessage::assistant(line));
        if (out.empty())
            throw std::runtime_error(path + " holds no replies");
        return out;
    }

    eval::PilotFactory make_factory(const AgentOptions &o, std::shared_ptr<std::ofstream> log_sink)
    {
        if (o.agent == "navball")
            return [](std::uint64_t) { return std::make_unique<NavballPilot>(); };
        if (o.agent == "naive")
            return [](std::uint64_t) { return std::make_unique<NaivePilot>(); };

        llm::AgentConfig cfg;
        if (!o.endpoint.empty())
            cfg.endpoint = o.endpoint;
        if (!o.model.empty())
            cfg.model = o.model;
        cfg.timeout = o.timeout;
        cfg.temperature = o.temperature;
        cfg.window = o.window;
        cfg.mode = *llm::parse_mode(o.mode);
        cfg.retry_wait = o.retry_wait;
        cfg.validate();

        const std::vector<llm::ChatMessage> replies = o.agent == "mock" ? mock_replies(o.mock_replies)
                                                                          : std::vector<llm::ChatMessage>{};
        const std::string agent = o.agent;
        return [cfg, replies, agent, log_sink](std::uint64_t) -> std::unique_ptr<Pilot> {
            std::unique_ptr<llm::CompletionClient> client;
            if (agent == "oracle")
                client = std::make_unique<llm::OracleClient>();
            else if (agent == "mock")
                client = std::make_unique<llm::ScriptedClient>(replies, true);
            else
            {
                llm::RemoteConfig rc;
                rc.url = cfg.endpoint;
                rc.model = cfg.model;
                rc.timeout = cfg.timeout;
                rc.temperature = cfg.temperature;
                client = std::make_unique<llm::RemoteClient>(rc);
            }
            auto pilot = std::make_unique<llm::LlmAgent>(cfg, std::move(client));
            pilot->keep_records(false);
            if (log_sink)
                pilot->set_log_sink(log_sink.get());
            return pilot;
        };
    }

    std::vector<fs::path> collect_logs(const std::vector<std::string> &inputs)
    {
        std::vector<fs::path> out;
        for (const auto &in : inputs)
        {
            if (fs::is_directory(in))
            {
                std::vector<fs::path> found;
                for (const auto &e : fs::directory_iterator(in))
                    if (e.is_regular_file() && e.path().extension() == ".json")
                        found.push_back(e.path());
                std::sort(found.begin(), found.end());
                out.insert(out.end(), found.begin(), found.end());
            }
            else
            {
                out.emplace_back(in);
            }
        }
        return out;
    }

    fs::path with_suffix(const fs::path &p, const std::string &suffix)
    {
        return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
    }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Pursuit-evasion rendezvous lab: simulator, expert bot, LLM agent harness, datasets and evaluation"};
    app.require_subcommand(1);

    // gen-orbits
    auto *gen = app.add_subcommand("gen-orbits", "Generate pursuer orbits as a JSON array of elements");
    int gen_count = 10;
    std::uint64_t gen_seed = 0;
    std::string gen_config, gen_out;
    gen->add_option("--count", gen_count, "Number of orbits")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "First seed; orbit k uses seed + k");
    gen->add_option("--config", gen_config, "Episode config JSON supplying evader orbit and constraints");
    gen->add_option("--out", gen_out, "Output file (stdout when omitted)");

    // record
    auto *rec = app.add_subcommand("record", "Fly episodes and write one gameplay log per seed");
    AgentOptions rec_agent;
    std::uint64_t rec_seed = 0;
    int rec_count = 1;
    std::string rec_out = "logs", rec_config;
    double rec_duration = 0.0;
    add_agent_options(rec, rec_agent, false);
    rec->add_option("--seed", rec_seed, "First seed");
    rec->add_option("--count", rec_count, "Episodes")->check(CLI::PositiveNumber);
    rec->add_option("--out-dir", rec_out, "Directory for log files");
    rec->add_option("--config", rec_config, "Episode config JSON");
    rec->add_option("--max-duration", rec_duration, "Override episode length in seconds");

    // dataset
    auto *ds = app.add_subcommand("dataset", "Export gameplay logs as a fine-tuning dataset");
    std::vector<std::string> ds_inputs;
    std::string ds_format = "chat-jsonl", ds_out = "dataset.jsonl", ds_mode = "augmented";
    dataset::Options ds_opts;
    double ds_split = 0.0;
    bool ds_verify = false;
    ds->add_option("logs", ds_inputs, "Gameplay log files or directories")->required();
    ds->add_option("--format", ds_format, "Output format")->check(CLI::IsMember({"chat-jsonl", "alpaca"}));
    ds->add_option("--window", ds_opts.window, "Past exchanges kept as history")->check(CLI::NonNegativeNumber);
    ds->add_option("--lookahead", ds_opts.lookahead, "Future actions per target")->check(CLI::PositiveNumber);
    ds->add_flag("--cot", ds_opts.cot, "Prefix outputs with prograde reasoning");
    ds->add_flag("--keywords", ds_opts.conversation_keywords, "HUMAN:/ASSISTANT: markers in prompt text");
    ds->add_option("--mode", ds_mode, "Prompt mode")->check(CLI::IsMember({"plain", "augmented", "cot-fewshot"}));
    ds->add_option("--split", ds_split, "Fraction of episodes held out for validation")->check(CLI::Range(0.0, 1.0));
    ds->add_option("--out", ds_out, "Output file; a .provenance.jsonl sidecar is written next to it");
    ds->add_flag("--verify", ds_verify, "Re-read the export and check it against the logs");

    // eval
    auto *ev = app.add_subcommand("eval", "Run an evaluation campaign");
    AgentOptions ev_agent;
    int ev_episodes = 10, ev_workers = 1;
    std::uint64_t ev_seed = 0;
    std::string ev_report, ev_config, ev_traj;
    double ev_duration = 0.0;
    add_agent_options(ev, ev_agent, true);
    ev->add_option("--episodes", ev_episodes, "Episodes")->check(CLI::PositiveNumber);
    ev->add_option("--seed", ev_seed, "First seed");
    ev->add_option("--workers", ev_workers, "Parallel episodes")->check(CLI::PositiveNumber);
    ev->add_option("--report", ev_report, "JSON report path");
    ev->add_option("--config", ev_config, "Episode config JSON");
    ev->add_option("--max-duration", ev_duration, "Override episode length in seconds");
    ev->add_option("--trajectories", ev_traj, "Directory for per-episode trajectory exports");

    // serve
    auto *sv = app.add_subcommand("serve", "Run the mission service for human piloting");
    service::ServerOptions sv_opts;
    std::string sv_static, sv_logs;
    sv->add_option("--port", sv_opts.port, "TCP port");
    sv->add_option("--address", sv_opts.address, "Bind address");
    sv->add_option("--static", sv_static, "Console assets directory");
    sv->add_option("--log-dir", sv_logs, "Directory for finished session logs");
    sv->add_option("--pacing", sv_opts.pacing, "Wall-clock seconds per simulated second")->check(CLI::PositiveNumber);
    sv->add_option("--threads", sv_opts.threads, "I/O threads")->check(CLI::PositiveNumber);

    // plot
    auto *pl = app.add_subcommand("plot", "Render range and range rate from a trajectory file as SVG");
    std::string pl_in, pl_out;
    pl->add_option("trajectory", pl_in, "Trajectory JSONL")->required()->check(CLI::ExistingFile);
    pl->add_option("--out", pl_out, "SVG path (defaults to the input name with .svg)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*gen)
        {
            const EpisodeConfig cfg = load_config(gen_config, 0.0);
            json out = json::array();
            for (int k = 0; k < gen_count; ++k)
                out.push_back(generate_orbit(cfg.evader_elements, cfg.pursuer_constraints,
                                             gen_seed + static_cast<std::uint64_t>(k), cfg.body));
            if (gen_out.empty())
                std::cout << out.dump(2) << "\n";
            else
                write_text(gen_out, out.dump(2) + "\n");
        }
        else if (*rec)
        {
            const EpisodeConfig base = load_config(rec_config, rec_duration);
            const auto factory = make_factory(rec_agent, nullptr);
            for (int k = 0; k < rec_count; ++k)
            {
                EpisodeConfig cfg = base;
                cfg.seed = rec_seed + static_cast<std::uint64_t>(k);
                auto pilot = factory(cfg.seed);
                const GameplayLog log = dataset::record_episode(*pilot, cfg);
                const fs::path path = fs::path(rec_out) / (log.meta.agent + "_" + std::to_string(cfg.seed) + ".json");
                write_gameplay_log(log, path);
                std::cout << path.string() << ": " << log.samples.size() << " samples, "
                          << termination_label(log.meta.termination) << (log.meta.complete ? "" : " (incomplete)") << "\n";
            }
        }
        else if (*ds)
        {
            ds_opts.mode = *llm::parse_mode(ds_mode);
            const dataset::Format format = *dataset::parse_format(ds_format);
            std::vector<GameplayLog> logs;
            for (const auto &p : collect_logs(ds_inputs))
                logs.push_back(read_gameplay_log(p));
            if (logs.empty())
                throw std::runtime_error("no gameplay logs found");

            const auto held = static_cast<std::size_t>(ds_split * static_cast<double>(logs.size()) + 0.5);
            const std::vector<GameplayLog> train(logs.begin(), logs.end() - static_cast<std::ptrdiff_t>(held));
            const std::vector<GameplayLog> val(logs.end() - static_cast<std::ptrdiff_t>(held), logs.end());

            bool ok = true;
            auto emit = [&](const std::vector<GameplayLog> &part, const fs::path &path) {
                std::vector<dataset::Record> records;
                for (const auto &log : part)
                {
                    auto r = dataset::build(log, ds_opts);
                    records.insert(records.end(), r.begin(), r.end());
                }
                const std::string text = dataset::serialize(records, format);
                const std::string prov = dataset::provenance_jsonl(records);
                write_text(path, text);
                write_text(with_suffix(path, ".provenance").replace_extension(".jsonl"), prov);
                std::cout << path.string() << ": " << records.size() << " records\n";
                if (ds_verify)
                {
                    const auto report = dataset::verify(part, text, prov, format, ds_opts);
                    std::cout << "  verified " << report.verified << "/" << report.records << "\n";
                    for (const auto &e : report.errors)
                        std::cout << "  " << e << "\n";
                    ok = ok && report.ok();
                }
            };
            if (held == 0)
            {
                emit(train, ds_out);
            }
            else
            {
                emit(train, with_suffix(ds_out, ".train"));
                emit(val, with_suffix(ds_out, ".val"));
            }
            return ok ? 0 : 2;
        }
        else if (*ev)
        {
            const EpisodeConfig base = load_config(ev_config, ev_duration);
            std::shared_ptr<std::ofstream> sink;
            if (!ev_agent.interaction_log.empty())
            {
                if (ev_workers > 1)
                    throw std::invalid_argument("--interaction-log needs --workers 1");
                sink = std::make_shared<std::ofstream>(ev_agent.interaction_log, std::ios::app);
            }
            eval::CampaignOptions copts;
            copts.workers = ev_workers;
            copts.keep_trajectories = !ev_traj.empty();
            const auto report = eval::run_campaign(ev_agent.agent, make_factory(ev_agent, sink), base,
                                                   eval::seed_range(ev_seed, ev_episodes), copts);
            std::cout << report.table();
            if (!ev_report.empty())
                write_text(ev_report, report.to_json().dump(2) + "\n");
            if (!ev_traj.empty())
                eval::export_trajectories(report, ev_traj);
        }
        else if (*sv)
        {
            sv_opts.static_dir = sv_static;
            sv_opts.log_dir = sv_logs;
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);
            service::Server server(sv_opts);
            const auto port = server.start();
            std::cout << "listening on " << sv_opts.address << ":" << port << std::endl;
            int sig = 0;
            sigwait(&signals, &sig);
            server.stop();
        }
        else if (*pl)
        {
            std::vector<TrajectorySample> rows;
            std::ifstream in(pl_in);
            for (std::string line; std::getline(in, line);)
                if (!line.empty())
                    rows.push_back(json::parse(line).get<TrajectorySample>());
            const fs::path out = pl_out.empty() ? fs::path(pl_in).replace_extension(".svg") : fs::path(pl_out);
            write_text(out, eval::render_relative_svg(rows, fs::path(pl_in).filename().string()));
            std::cout << out.string() << "\n";
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
