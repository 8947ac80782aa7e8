#pragma once

#include "rvlab/gameplay.hpp"
#include "rvlab/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvlab::service
{

    enum class SessionStatus
    {
        created,
        running,
        done,
    };

    std::string_view status_label(SessionStatus s);

    /// Request-level failure carrying the HTTP status to report.
    class ServiceError : public std::runtime_error
    {
    public:
        ServiceError(int status, const std::string &what) : std::runtime_error(what), status_(status) {}
        int status() const { return status_; }

    private:
        int status_;
    };

    /// Receives a session's pushed messages in tick order.
    class Subscriber
    {
    public:
        virtual ~Subscriber() = default;
        /// `last` marks the final message of the session.
        virtual void deliver(std::shared_ptr<const std::string> message, bool last) = 0;
    };

    /// {type:"state", tick, time, observation, prograde, range, range_rate, fuel, score}
    nlohmann::json state_message(int tick, const Observation &obs, const EpisodeResult &so_far, const EpisodeConfig &cfg);

    /// {type:"done", tick, termination, result}
    nlohmann::json done_message(const EpisodeResult &result);

    /// One human-piloted episode. All members are safe to call from any thread.
    class Session
    {
    public:
        Session(std::string id, EpisodeConfig config);

        const std::string &id() const { return id_; }
        const EpisodeConfig &config() const { return config_; }
        SessionStatus status() const;

        /// created -> running; publishes the tick-0 state.
        void start();

        /// Pending command for the next tick; a later call in the same tick wins.
        void submit(const Action &action);

        /// Applies the pending command (coast if none), steps one tick and
        /// publishes the new state, plus the final message once done.
        /// Returns true while the episode is still running.
        bool advance();

        nlohmann::json status_json() const;
        nlohmann::json result_json() const;
        GameplayLog log() const;

        void subscribe(std::weak_ptr<Subscriber> sub);

    private:
        void publish(const nlohmann::json &message, bool last);

        const std::string id_;
        const EpisodeConfig config_;
        mutable std::mutex mutex_;
        SessionStatus status_{SessionStatus::created};
        Episode episode_;
        Observation current_;
        std::optional<Action> pending_;
        GameplayLog log_;
        std::shared_ptr<const std::string> last_message_;
        bool last_is_final_{false};
        std::vector<std::weak_ptr<Subscriber>> subscribers_;
    };

    class SessionManager
    {
    public:
        /// Config fields absent from body keep their defaults. Throws ServiceError(400).
        std::shared_ptr<Session> create(const nlohmann::json &body);

        /// Throws ServiceError(404) for unknown ids.
        std::shared_ptr<Session> get(const std::string &id) const;

        std::size_t size() const;

    private:
        mutable std::mutex mutex_;
        std::map<std::string, std::shared_ptr<Session>> sessions_;
        std::uint64_t next_id_{1};
    };

    struct ServerOptions
    {
        std::string address{"127.0.0.1"};
        unsigned short port{8080}; ///< 0 picks a free port
        std::filesystem::path static_dir; ///< console assets; empty disables static serving
        std::filesystem::path log_dir;    ///< finished sessions are written here when set
        double pacing{1.0};               ///< wall-clock seconds per simulated second
        int threads{2};
    };

    /// HTTP + WebSocket front end. Each running session advances on its own
    /// wall-clock timer, one tick per decision period.
    class Server
    {
    public:
        explicit Server(ServerOptions opts);
        ~Server();

        Server(const Server &) = delete;
        Server &operator=(const Server &) = delete;

        /// Binds, starts worker threads and returns the bound port.
        unsigned short start();
        void stop();
        /// Blocks until stop() is called from elsewhere.
        void wait();

        SessionManager &sessions();

        struct Impl;

    private:
        std::unique_ptr<Impl> impl_;
    };

} // namespace rvlab::service
