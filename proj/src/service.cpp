#include "rvlab/service.hpp"

#include "rvlab/json_io.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <thread>

namespace rvlab::service
{

    namespace beast = boost::beast;
    namespace http = beast::http;
    namespace websocket = beast::websocket;
    namespace net = boost::asio;
    using tcp = net::ip::tcp;
    using nlohmann::json;

    std::string_view status_label(SessionStatus s)
    {
        switch (s)
        {
        case SessionStatus::created:
            return "created";
        case SessionStatus::running:
            return "running";
        case SessionStatus::done:
            return "done";
        }
        return "created";
    }

    json state_message(int tick, const Observation &obs, const EpisodeResult &so_far, const EpisodeConfig &cfg)
    {
        const ScoreWeights &w = cfg.weights;
        auto term = [](const ScoreWeights::Term &t, double v) { return std::pow(t.scale * v, t.exponent); };
        return json{
                {"type", "state"},
                {"tick", tick},
                {"time", obs.time},
                {"observation", obs},
                {"prograde", obs.prograde ? json(*obs.prograde) : json()},
                {"range", obs.range},
                {"range_rate", obs.range_rate},
                {"fuel", {{"used", so_far.fuel_used}, {"remaining", obs.vehicle_propellant}}},
                {"score",
                 {
                         {"closest_distance", so_far.closest_distance},
                         {"speed_at_closest", so_far.speed_at_closest},
                         {"distance", term(w.distance, so_far.closest_distance)},
                         {"velocity", term(w.velocity, so_far.speed_at_closest)},
                         {"fuel", term(w.fuel, so_far.fuel_used)},
                         {"time", term(w.time, so_far.elapsed)},
                         {"total", so_far.score},
                 }},
        };
    }

    json done_message(const EpisodeResult &result)
    {
        return json{
                {"type", "done"},
                {"tick", result.ticks},
                {"termination", termination_label(result.termination)},
                {"result", result_summary(result)},
        };
    }

    // ---------------------------------------------------------------- Session

    Session::Session(std::string id, EpisodeConfig config) : id_(std::move(id)), config_(std::move(config))
    {
        current_ = episode_.reset(config_);
        log_.config = config_;
        log_.meta.seed = config_.seed;
        log_.meta.scenario = config_.scenario_id;
        log_.meta.agent = "human";
        log_.meta.decision_period = config_.decision_period;
    }

    SessionStatus Session::status() const
    {
        std::lock_guard lock(mutex_);
        return status_;
    }

    void Session::start()
    {
        std::lock_guard lock(mutex_);
        if (status_ != SessionStatus::created)
            throw ServiceError(409, "session " + id_ + " is already " + std::string(status_label(status_)));
        status_ = SessionStatus::running;
        publish(state_message(episode_.tick(), current_, episode_.summary(), config_), false);
    }

    void Session::submit(const Action &action)
    {
        std::lock_guard lock(mutex_);
        if (status_ != SessionStatus::running)
            throw ServiceError(409, "session " + id_ + " is " + std::string(status_label(status_)) + ", not running");
        pending_ = action;
    }

    bool Session::advance()
    {
        std::lock_guard lock(mutex_);
        if (status_ != SessionStatus::running)
            return false;
        const Action action = pending_.value_or(Action::coast());
        pending_.reset();
        log_.samples.push_back({episode_.tick(), current_, action});
        const StepOutcome out = episode_.step(action);
        current_ = out.observation;
        const EpisodeResult so_far = episode_.summary();
        publish(state_message(episode_.tick(), current_, so_far, config_), false);
        if (!out.done)
            return true;
        status_ = SessionStatus::done;
        log_.meta.termination = so_far.termination;
        publish(done_message(so_far), true);
        return false;
    }

    json Session::status_json() const
    {
        std::lock_guard lock(mutex_);
        return json{{"id", id_}, {"status", status_label(status_)}, {"tick", episode_.tick()}, {"time", episode_.time()}};
    }

    json Session::result_json() const
    {
        std::lock_guard lock(mutex_);
        return json{{"id", id_},
                    {"status", status_label(status_)},
                    {"final", status_ == SessionStatus::done},
                    {"result", result_summary(episode_.summary())}};
    }

    GameplayLog Session::log() const
    {
        std::lock_guard lock(mutex_);
        GameplayLog out = log_;
        out.meta.complete = status_ == SessionStatus::done;
        return out;
    }

    void Session::subscribe(std::weak_ptr<Subscriber> sub)
    {
        std::lock_guard lock(mutex_);
        if (auto s = sub.lock(); s && last_message_)
            s->deliver(last_message_, last_is_final_);
        subscribers_.push_back(std::move(sub));
    }

    void Session::publish(const json &message, bool last)
    {
        last_message_ = std::make_shared<const std::string>(message.dump());
        last_is_final_ = last;
        std::erase_if(subscribers_, [](const auto &w) { return w.expired(); });
        for (const auto &w : subscribers_)
            if (auto s = w.lock())
                s->deliver(last_message_, last);
    }

    // --------------------------------------------------------- SessionManager

    std::shared_ptr<Session> SessionManager::create(const json &body)
    {
        EpisodeConfig cfg;
        try
        {
            if (!body.is_null())
                from_json(body, cfg);
            cfg.validate();
        }
        catch (const std::exception &e)
        {
            throw ServiceError(400, std::string("invalid config: ") + e.what());
        }

        std::lock_guard lock(mutex_);
        const std::string id = "s" + std::to_string(next_id_++);
        std::shared_ptr<Session> session;
        try
        {
            session = std::make_shared<Session>(id, cfg);
        }
        catch (const std::exception &e)
        {
            throw ServiceError(400, std::string("cannot initialise episode: ") + e.what());
        }
        sessions_.emplace(id, session);
        return session;
    }

    std::shared_ptr<Session> SessionManager::get(const std::string &id) const
    {
        std::lock_guard lock(mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end())
            throw ServiceError(404, "no session '" + id + "'");
        return it->second;
    }

    std::size_t SessionManager::size() const
    {
        std::lock_guard lock(mutex_);
        return sessions_.size();
    }

    // ----------------------------------------------------------------- Server

    namespace
    {
        using Response = http::response<http::string_body>;

        std::string_view target_of(const http::request<http::string_body> &req)
        {
            const auto t = req.target();
            return {t.data(), t.size()};
        }

        std::vector<std::string> split_path(std::string_view target)
        {
            target = target.substr(0, target.find('?'));
            std::vector<std::string> parts;
            std::size_t pos = 0;
            while (pos <= target.size())
            {
                const auto slash = target.find('/', pos);
                const auto end = slash == std::string_view::npos ? target.size() : slash;
                if (end > pos)
                    parts.emplace_back(target.substr(pos, end - pos));
                pos = end + 1;
            }
            return parts;
        }

        std::string_view mime_type(const std::filesystem::path &p)
        {
            const auto ext = p.extension().string();
            if (ext == ".html" || ext == ".htm")
                return "text/html";
            if (ext == ".js" || ext == ".mjs")
                return "application/javascript";
            if (ext == ".css")
                return "text/css";
            if (ext == ".json" || ext == ".map")
                return "application/json";
            if (ext == ".svg")
                return "image/svg+xml";
            if (ext == ".png")
                return "image/png";
            if (ext == ".ico")
                return "image/x-icon";
            return "application/octet-stream";
        }

        Response make_response(const http::request<http::string_body> &req, http::status status, std::string body,
                               std::string_view type = "application/json")
        {
            Response res{status, req.version()};
            res.set(http::field::server, "rvlab");
            res.set(http::field::content_type, std::string(type));
            res.set(http::field::access_control_allow_origin, "*");
            res.keep_alive(req.keep_alive());
            res.body() = std::move(body);
            res.prepare_payload();
            return res;
        }

        Response json_response(const http::request<http::string_body> &req, http::status status, const json &body)
        {
            return make_response(req, status, body.dump());
        }

        Response error_response(const http::request<http::string_body> &req, int status, const std::string &what)
        {
            return json_response(req, static_cast<http::status>(status), json{{"error", what}});
        }
    } // namespace

    struct Server::Impl
    {
        struct Ticker : std::enable_shared_from_this<Ticker>
        {
            Ticker(net::io_context &ioc, std::shared_ptr<Session> s, std::chrono::nanoseconds p, Impl &o)
                : timer(net::make_strand(ioc)), session(std::move(s)), period(p), owner(o)
            {
            }

            void arm()
            {
                ++ticks;
                timer.expires_at(origin + period * ticks);
                timer.async_wait([self = shared_from_this()](beast::error_code ec) {
                    if (!ec)
                        self->fire();
                });
            }

            void fire()
            {
                bool running = false;
                try
                {
                    running = session->advance();
                }
                catch (const std::exception &e)
                {
                    std::cerr << "session " << session->id() << ": " << e.what() << "\n";
                }
                if (running)
                    arm();
                else
                    owner.finished(session);
            }

            net::steady_timer timer;
            std::shared_ptr<Session> session;
            std::chrono::nanoseconds period;
            Impl &owner;
            std::chrono::steady_clock::time_point origin{std::chrono::steady_clock::now()};
            long ticks{0};
        };

        explicit Impl(ServerOptions o) : opts(std::move(o)), acceptor(ioc) {}

        void launch(const std::shared_ptr<Session> &session)
        {
            const auto period = std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::duration<double>(session->config().decision_period * opts.pacing));
            auto ticker = std::make_shared<Ticker>(ioc, session, period, *this);
            {
                std::lock_guard lock(tickers_mutex);
                tickers[session->id()] = ticker;
            }
            net::post(ticker->timer.get_executor(), [ticker] { ticker->arm(); });
        }

        void finished(const std::shared_ptr<Session> &session)
        {
            if (!opts.log_dir.empty())
            {
                try
                {
                    write_gameplay_log(session->log(), opts.log_dir / ("session_" + session->id() + ".json"));
                }
                catch (const std::exception &e)
                {
                    std::cerr << "session " << session->id() << ": " << e.what() << "\n";
                }
            }
            std::lock_guard lock(tickers_mutex);
            tickers.erase(session->id());
        }

        Response handle(const http::request<http::string_body> &req)
        {
            try
            {
                return route(req);
            }
            catch (const ServiceError &e)
            {
                return error_response(req, e.status(), e.what());
            }
            catch (const json::exception &e)
            {
                return error_response(req, 400, e.what());
            }
            catch (const std::invalid_argument &e)
            {
                return error_response(req, 400, e.what());
            }
            catch (const std::exception &e)
            {
                return error_response(req, 500, e.what());
            }
        }

        Response route(const http::request<http::string_body> &req)
        {
            const auto method = req.method();
            const auto parts = split_path(target_of(req));

            if (method == http::verb::options)
            {
                Response res = make_response(req, http::status::no_content, "");
                res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
                res.set(http::field::access_control_allow_headers, "Content-Type");
                return res;
            }

            if (!parts.empty() && parts[0] == "sessions")
            {
                if (parts.size() == 1)
                {
                    if (method != http::verb::post)
                        throw ServiceError(405, "use POST /sessions");
                    const json body = req.body().empty() ? json::object() : json::parse(req.body());
                    auto session = sessions.create(body);
                    return json_response(req, http::status::created, session->status_json());
                }
                auto session = sessions.get(parts[1]);
                const std::string verb = parts.size() > 2 ? parts[2] : "";
                if (parts.size() > 3)
                    throw ServiceError(404, "unknown route");
                if (verb.empty() && method == http::verb::get)
                    return json_response(req, http::status::ok, session->status_json());
                if (verb == "start" && method == http::verb::post)
                {
                    session->start();
                    launch(session);
                    return json_response(req, http::status::ok, session->status_json());
                }
                if (verb == "action" && method == http::verb::post)
                {
                    const Action action = json::parse(req.body()).get<Action>();
                    session->submit(action);
                    return json_response(req, http::status::ok, json{{"accepted", true}, {"action", action}});
                }
                if (verb == "result" && method == http::verb::get)
                    return json_response(req, http::status::ok, session->result_json());
                if (verb == "log" && method == http::verb::get)
                    return json_response(req, http::status::ok, json(session->log()));
                throw ServiceError(404, "unknown route");
            }

            if (method == http::verb::get && !opts.static_dir.empty())
                return serve_static(req, parts);
            throw ServiceError(404, "not found");
        }

        Response serve_static(const http::request<http::string_body> &req, const std::vector<std::string> &parts)
        {
            std::filesystem::path rel;
            for (const auto &p : parts)
            {
                if (p == ".." || p == ".")
                    throw ServiceError(400, "bad path");
                rel /= p;
            }
            std::filesystem::path full = opts.static_dir / rel;
            if (std::filesystem::is_directory(full))
                full /= "index.html";
            if (!std::filesystem::is_regular_file(full))
                throw ServiceError(404, "not found");
            return make_response(req, http::status::ok, read_text(full), mime_type(full));
        }

        ServerOptions opts;
        net::io_context ioc;
        tcp::acceptor acceptor;
        SessionManager sessions;
        std::vector<std::thread> threads;
        std::mutex tickers_mutex;
        std::map<std::string, std::shared_ptr<Ticker>> tickers;
        std::mutex stop_mutex;
        std::condition_variable stop_cv;
        bool stopped{false};
    };

    namespace
    {
        class WsConnection final : public Subscriber, public std::enable_shared_from_this<WsConnection>
        {
        public:
            WsConnection(tcp::socket &&socket, std::shared_ptr<Session> session)
                : ws_(std::move(socket)), session_(std::move(session))
            {
            }

            void run(http::request<http::string_body> req)
            {
                ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
                ws_.text(true);
                ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
            }

            void deliver(std::shared_ptr<const std::string> message, bool last) override
            {
                net::post(ws_.get_executor(), [self = shared_from_this(), message, last] { self->enqueue(message, last); });
            }

        private:
            void on_accept(beast::error_code ec)
            {
                if (ec)
                    return;
                open_ = true;
                session_->subscribe(weak_from_this());
                read();
            }

            void read()
            {
                ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                    if (ec)
                    {
                        self->open_ = false;
                        return;
                    }
                    self->buffer_.consume(n);
                    self->read();
                });
            }

            void enqueue(std::shared_ptr<const std::string> message, bool last)
            {
                if (!open_ || closing_)
                    return;
                queue_.emplace_back(std::move(message), last);
                if (queue_.size() == 1)
                    write_next();
            }

            void write_next()
            {
                ws_.async_write(net::buffer(*queue_.front().first),
                                [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
            }

            void on_write(beast::error_code ec)
            {
                if (ec)
                {
                    open_ = false;
                    queue_.clear();
                    return;
                }
                const bool last = queue_.front().second;
                queue_.pop_front();
                if (last)
                {
                    closing_ = true;
                    queue_.clear();
                    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
                    return;
                }
                if (!queue_.empty())
                    write_next();
            }

            websocket::stream<beast::tcp_stream> ws_;
            beast::flat_buffer buffer_;
            std::shared_ptr<Session> session_;
            std::deque<std::pair<std::shared_ptr<const std::string>, bool>> queue_;
            bool open_{false};
            bool closing_{false};
        };

        class HttpConnection final : public std::enable_shared_from_this<HttpConnection>
        {
        public:
            HttpConnection(tcp::socket &&socket, Server::Impl &impl) : stream_(std::move(socket)), impl_(impl) {}

            void run()
            {
                net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
            }

        private:
            void read()
            {
                req_ = {};
                stream_.expires_after(std::chrono::seconds(60));
                http::async_read(stream_, buffer_, req_,
                                 [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
            }

            void on_read(beast::error_code ec)
            {
                if (ec == http::error::end_of_stream)
                    return close();
                if (ec)
                    return;

                if (websocket::is_upgrade(req_))
                {
                    const auto parts = split_path(target_of(req_));
                    if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream")
                    {
                        try
                        {
                            auto session = impl_.sessions.get(parts[1]);
                            stream_.expires_never();
                            std::make_shared<WsConnection>(stream_.release_socket(), std::move(session))->run(std::move(req_));
                            return;
                        }
                        catch (const ServiceError &e)
                        {
                            return write(error_response(req_, e.status(), e.what()));
                        }
                    }
                    return write(error_response(req_, 404, "no stream at this path"));
                }
                write(impl_.handle(req_));
            }

            void write(Response res)
            {
                auto sp = std::make_shared<Response>(std::move(res));
                http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
                    if (ec)
                        return;
                    if (sp->need_eof())
                        return self->close();
                    self->read();
                });
            }

            void close()
            {
                beast::error_code ec;
                stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            }

            beast::tcp_stream stream_;
            beast::flat_buffer buffer_;
            http::request<http::string_body> req_;
            Server::Impl &impl_;
        };

        void accept_loop(Server::Impl &impl)
        {
            impl.acceptor.async_accept(net::make_strand(impl.ioc), [&impl](beast::error_code ec, tcp::socket socket) {
                if (ec == net::error::operation_aborted)
                    return;
                if (!ec)
                    std::make_shared<HttpConnection>(std::move(socket), impl)->run();
                accept_loop(impl);
            });
        }
    } // namespace

    Server::Server(ServerOptions opts) : impl_(std::make_unique<Impl>(std::move(opts)))
    {
        if (!(impl_->opts.pacing > 0.0))
            throw std::invalid_argument("server: pacing must be positive");
        if (impl_->opts.threads < 1)
            throw std::invalid_argument("server: threads must be at least 1");
    }

    Server::~Server() { stop(); }

    unsigned short Server::start()
    {
        Impl &impl = *impl_;
        const tcp::endpoint endpoint{net::ip::make_address(impl.opts.address), impl.opts.port};
        impl.acceptor.open(endpoint.protocol());
        impl.acceptor.set_option(net::socket_base::reuse_address(true));
        impl.acceptor.bind(endpoint);
        impl.acceptor.listen(net::socket_base::max_listen_connections);
        accept_loop(impl);
        for (int k = 0; k < impl.opts.threads; ++k)
            impl.threads.emplace_back([&impl] { impl.ioc.run(); });
        return impl.acceptor.local_endpoint().port();
    }

    void Server::stop()
    {
        Impl &impl = *impl_;
        {
            std::lock_guard lock(impl.stop_mutex);
            if (impl.stopped)
                return;
            impl.stopped = true;
        }
        impl.ioc.stop();
        for (auto &t : impl.threads)
            if (t.joinable())
                t.join();
        impl.threads.clear();
        {
            std::lock_guard lock(impl.tickers_mutex);
            impl.tickers.clear();
        }
        impl.stop_cv.notify_all();
    }

    void Server::wait()
    {
        std::unique_lock lock(impl_->stop_mutex);
        impl_->stop_cv.wait(lock, [this] { return impl_->stopped; });
    }

    SessionManager &Server::sessions() { return impl_->sessions; }

} // namespace rvlab::service
