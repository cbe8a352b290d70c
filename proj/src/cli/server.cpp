// SPDX-License-Identifier: Apache-2.0
#include <foampilot/cli/server.hpp>

#include <fmt/format.h>
#include <httplib.h>

#include <arpa/inet.h>
#include <csignal>
#include <pthread.h>

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace foampilot
{

bool is_loopback_address(std::string_view address) noexcept
{
    if (address == "localhost")
        return true;
    std::string text(address);
    in_addr v4 {};
    if (inet_pton(AF_INET, text.c_str(), &v4) == 1)
        return (ntohl(v4.s_addr) >> 24) == 127;
    in6_addr v6 {};
    if (inet_pton(AF_INET6, text.c_str(), &v6) == 1)
        return IN6_IS_ADDR_LOOPBACK(&v6);
    return false;
}

namespace
{

    using nlohmann::json;

    struct StoredEvent
    {
        std::size_t seq;
        std::string type;
        json data;
    };

    json event_json(SessionEvent const& event)
    {
        switch (event.kind)
        {
            case SessionEvent::Kind::MessageAppended:
                return { { "role", std::string(to_string(event.message->role())) },
                         { "content", event.message->content() } };
            case SessionEvent::Kind::ToolRequested:
                return { { "approval_id", event.approval_id }, { "tool", event.tool }, { "input", event.input } };
            case SessionEvent::Kind::ToolResult:
            {
                json data { { "approval_id", event.approval_id }, { "tool", event.tool } };
                if (event.result)
                {
                    data["ok"] = event.result->ok;
                    data["output"] = event.result->output;
                    data["exit_code"] = event.result->exit_code ? json(*event.result->exit_code) : json(nullptr);
                    data["truncated"] = event.result->truncated;
                }
                return data;
            }
            case SessionEvent::Kind::StatusChanged: return { { "status", event.status } };
        }
        return json::object();
    }

    std::string_view event_type(SessionEvent::Kind kind)
    {
        switch (kind)
        {
            case SessionEvent::Kind::MessageAppended: return "message";
            case SessionEvent::Kind::ToolRequested: return "tool_request";
            case SessionEvent::Kind::ToolResult: return "tool_result";
            case SessionEvent::Kind::StatusChanged: return "status";
        }
        return "message";
    }

    std::string sse_frame(StoredEvent const& event)
    {
        json payload = event.data;
        payload["seq"] = event.seq;
        return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", event.seq, event.type, payload.dump());
    }

    void reply(httplib::Response& res, int status, json const& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    void reply_error(httplib::Response& res, int status, std::string const& message)
    {
        reply(res, status, json { { "error", message } });
    }

    std::optional<json> parse_body(httplib::Request const& req, httplib::Response& res)
    {
        if (req.body.empty())
            return json::object();
        auto doc = json::parse(req.body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
        {
            reply_error(res, 400, "request body must be a JSON object");
            return std::nullopt;
        }
        return doc;
    }

    std::string new_session_id()
    {
        static std::mutex m;
        static std::mt19937_64 rng { std::random_device {}() };
        std::lock_guard lock(m);
        return fmt::format("{:016x}", rng());
    }

    class ServerSession
    {
    public:
        ServerSession(std::string id, PreparedSession prepared, Services const& services):
            _id(std::move(id)),
            _prepared(std::move(prepared)),
            _llm(services.make_llm()),
            _agent(*_llm, _prepared.tools, services.config.policy,
                   [this](ApprovalRequest const& r) { return await_decision(r); },
                   [this](SessionEvent const& e) { record(e); })
        {
            if (_prepared.initial_prompt)
                _inbox.push_back(*_prepared.initial_prompt);
            _worker = std::thread([this] { work(); });
        }

        ~ServerSession() { close(); }

        std::string const& id() const noexcept { return _id; }

        /// False when the session no longer accepts messages.
        bool enqueue(std::string text)
        {
            std::lock_guard lock(_m);
            if (_closed)
                return false;
            _inbox.push_back(std::move(text));
            _cv.notify_all();
            return true;
        }

        enum class Resolution
        {
            Accepted,
            Conflict,
            Unknown,
        };

        Resolution resolve(std::string const& approvalId, ApprovalDecision decision)
        {
            std::lock_guard lock(_m);
            if (_resolved.contains(approvalId) || _finishedCalls.contains(approvalId))
                return Resolution::Conflict;
            if (!_announced.contains(approvalId))
                return Resolution::Unknown;
            _resolved.insert(approvalId);
            _decisions[approvalId] = decision;
            _cv.notify_all();
            return Resolution::Accepted;
        }

        /// Stops accepting work and aborts the running loop; joins the worker.
        void close()
        {
            {
                std::lock_guard lock(_m);
                if (_closed && !_worker.joinable())
                    return;
                _closed = true;
                _inbox.clear();
                _agent.request_abort();
                _cv.notify_all();
            }
            if (_worker.joinable())
                _worker.join();
        }

        /// Appends events with seq > `after` to `out`; waits up to `timeout`
        /// for at least one. Returns false once the session is closed and
        /// fully drained.
        bool next_events(std::size_t& after, std::string& out, std::chrono::milliseconds timeout,
                         std::atomic<bool> const& stopping)
        {
            std::unique_lock lock(_m);
            _cv.wait_for(lock, timeout, [&] { return _events.size() > after || _closed || stopping; });
            for (; after < _events.size(); ++after)
                out += sse_frame(_events[after]);
            return !(_closed || stopping);
        }

        void wake()
        {
            std::lock_guard lock(_m);
            _cv.notify_all();
        }

        json summary() const
        {
            std::lock_guard lock(_m);
            json pending = json::object();
            for (auto const& [id, request]: _awaiting)
                pending[id] = { { "tool", request.tool }, { "input", request.rendered_input } };
            json outcome = nullptr;
            if (_outcome)
                outcome = { { "status", std::string(to_string(_outcome->status)) },
                            { "final_text", _outcome->final_text },
                            { "loop_count", _outcome->loop_count } };
            std::string state = _busy ? "running" : (_closed ? "closed" : "idle");
            return { { "session_id", _id },
                     { "mode", std::string(to_string(_prepared.mode)) },
                     { "state", state },
                     { "outcome", outcome },
                     { "pending_approvals", pending },
                     { "event_count", _events.size() } };
        }

    private:
        struct OutcomeSummary
        {
            LoopStatus status;
            std::string final_text;
            int loop_count;
        };

        void record(SessionEvent const& event)
        {
            std::lock_guard lock(_m);
            if (event.kind == SessionEvent::Kind::ToolRequested)
                _announced.insert(event.approval_id);
            else if (event.kind == SessionEvent::Kind::ToolResult)
            {
                _announced.erase(event.approval_id);
                _finishedCalls.insert(event.approval_id);
            }
            _events.push_back(StoredEvent { _events.size() + 1, std::string(event_type(event.kind)), event_json(event) });
            _cv.notify_all();
        }

        ApprovalDecision await_decision(ApprovalRequest const& request)
        {
            std::unique_lock lock(_m);
            _awaiting.emplace(request.approval_id, request);
            _cv.notify_all();
            _cv.wait(lock, [&] { return _closed || _decisions.contains(request.approval_id); });
            _awaiting.erase(request.approval_id);
            if (auto it = _decisions.find(request.approval_id); it != _decisions.end())
                return it->second;
            return ApprovalDecision::Abort;
        }

        void work()
        {
            std::unique_lock lock(_m);
            for (;;)
            {
                _cv.wait(lock, [&] { return _closed || !_inbox.empty(); });
                if (_inbox.empty())
                    return;
                auto text = std::move(_inbox.front());
                _inbox.pop_front();
                _busy = true;
                lock.unlock();
                std::optional<OutcomeSummary> summary;
                try
                {
                    auto outcome = _agent.run(std::move(text));
                    summary = OutcomeSummary { outcome.status, std::move(outcome.final_text), outcome.loop_count };
                }
                catch (std::exception const& e)
                {
                    summary = OutcomeSummary { LoopStatus::GaveUp, std::string("Session failed: ") + e.what(), 0 };
                }
                lock.lock();
                _busy = false;
                _outcome = std::move(summary);
                _cv.notify_all();
            }
        }

        std::string _id;
        PreparedSession _prepared;
        std::unique_ptr<ChatProvider> _llm;
        AgentSession _agent;

        mutable std::mutex _m;
        std::condition_variable _cv;
        std::vector<StoredEvent> _events;
        std::deque<std::string> _inbox;
        std::set<std::string> _announced;
        std::set<std::string> _finishedCalls;
        std::set<std::string> _resolved;
        std::map<std::string, ApprovalDecision> _decisions;
        std::map<std::string, ApprovalRequest> _awaiting;
        std::optional<OutcomeSummary> _outcome;
        bool _busy = false;
        bool _closed = false;
        std::thread _worker;
    };

    constexpr char const* PlaceholderPage =
        "<!doctype html><html><head><meta charset=\"utf-8\"><title>foampilot</title></head>"
        "<body><p>foampilot is serving the session API under /api. The console bundle is not installed.</p>"
        "</body></html>";

} // namespace

struct ApiServer::Impl
{
    Services services;
    ServeOptions options;
    httplib::Server http;
    std::atomic<bool> stopping = false;
    int port = 0;
    std::thread thread;

    mutable std::mutex m;
    std::map<std::string, std::shared_ptr<ServerSession>> sessions;

    Impl(Services s, ServeOptions o): services(std::move(s)), options(std::move(o)) { routes(); }

    std::shared_ptr<ServerSession> find(std::string const& id) const
    {
        std::lock_guard lock(m);
        auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    }

    void routes()
    {
        http.Post("/api/sessions", [this](httplib::Request const& req, httplib::Response& res) {
            auto body = parse_body(req, res);
            if (!body)
                return;
            if (stopping)
                return reply_error(res, 503, "server is shutting down");
            try
            {
                auto mode = parse_session_mode(body->value("mode", std::string("chat")));
                auto params = session_params_from_json(body->value("params", json::object()));
                auto prepared = prepare_session(mode, params, services);
                auto id = new_session_id();
                auto session = std::make_shared<ServerSession>(id, std::move(prepared), services);
                {
                    std::lock_guard lock(m);
                    sessions.emplace(id, std::move(session));
                }
                reply(res, 201, json { { "session_id", id } });
            }
            catch (std::exception const& e)
            {
                reply_error(res, 400, e.what());
            }
        });

        http.Get(R"(/api/sessions/([^/]+))", [this](httplib::Request const& req, httplib::Response& res) {
            auto session = find(req.matches[1]);
            if (!session)
                return reply_error(res, 404, "unknown session");
            reply(res, 200, session->summary());
        });

        http.Post(R"(/api/sessions/([^/]+)/messages)", [this](httplib::Request const& req, httplib::Response& res) {
            auto session = find(req.matches[1]);
            if (!session)
                return reply_error(res, 404, "unknown session");
            auto body = parse_body(req, res);
            if (!body)
                return;
            auto text = body->value("text", std::string());
            if (text.empty())
                return reply_error(res, 400, "text is required");
            if (!session->enqueue(std::move(text)))
                return reply_error(res, 409, "session is closed");
            reply(res, 202, json { { "accepted", true } });
        });

        http.Post(R"(/api/sessions/([^/]+)/approvals/([^/]+))",
                  [this](httplib::Request const& req, httplib::Response& res) {
                      auto session = find(req.matches[1]);
                      if (!session)
                          return reply_error(res, 404, "unknown session");
                      auto body = parse_body(req, res);
                      if (!body)
                          return;
                      auto decision = body->value("decision", std::string());
                      if (decision != "approve" && decision != "deny")
                          return reply_error(res, 400, "decision must be approve or deny");
                      std::string approvalId = req.matches[2];
                      switch (session->resolve(approvalId, decision == "approve" ? ApprovalDecision::Approve
                                                                                 : ApprovalDecision::Deny))
                      {
                          case ServerSession::Resolution::Accepted:
                              return reply(res, 200, json { { "approval_id", approvalId }, { "decision", decision } });
                          case ServerSession::Resolution::Conflict:
                              return reply_error(res, 409, "approval already resolved");
                          case ServerSession::Resolution::Unknown:
                              return reply_error(res, 404, "unknown approval");
                      }
                  });

        http.Get(R"(/api/sessions/([^/]+)/events)", [this](httplib::Request const& req, httplib::Response& res) {
            auto session = find(req.matches[1]);
            if (!session)
                return reply_error(res, 404, "unknown session");
            std::size_t after = 0;
            auto resume = req.get_header_value("Last-Event-ID");
            if (resume.empty())
                resume = req.get_param_value("last_event_id");
            if (!resume.empty())
            {
                try
                {
                    after = std::stoull(resume);
                }
                catch (std::exception const&)
                {
                    return reply_error(res, 400, "bad Last-Event-ID");
                }
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_header("X-Accel-Buffering", "no");
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, session, after, idle = std::chrono::milliseconds(0)](std::size_t,
                                                                            httplib::DataSink& sink) mutable {
                    constexpr std::chrono::milliseconds slice { 200 };
                    std::string chunk;
                    bool const open = session->next_events(after, chunk, slice, stopping);
                    if (!chunk.empty())
                    {
                        idle = {};
                        if (!sink.write(chunk.data(), chunk.size()))
                            return false;
                    }
                    else if ((idle += slice) >= options.keepalive)
                    {
                        idle = {};
                        constexpr std::string_view ping = ": keepalive\n\n";
                        if (!sink.write(ping.data(), ping.size()))
                            return false;
                    }
                    if (!open)
                        sink.done();
                    return true;
                });
        });

        if (!options.static_dir.empty() && fs::is_directory(options.static_dir))
            http.set_mount_point("/", options.static_dir.string());
        else
            http.Get("/", [](httplib::Request const&, httplib::Response& res) {
                res.set_content(PlaceholderPage, "text/html");
            });
    }

    int bind()
    {
        if (options.port == 0)
            port = http.bind_to_any_port(options.bind);
        else
            port = http.bind_to_port(options.bind, options.port) ? options.port : -1;
        if (port <= 0)
            throw std::runtime_error(fmt::format("cannot listen on {}:{}", options.bind, options.port));
        return port;
    }

    void stop()
    {
        if (stopping.exchange(true))
        {
            if (thread.joinable())
                thread.join();
            return;
        }
        std::vector<std::shared_ptr<ServerSession>> all;
        {
            std::lock_guard lock(m);
            for (auto const& [id, s]: sessions)
                all.push_back(s);
        }
        for (auto const& s: all)
            s->close();
        http.stop();
        if (thread.joinable())
            thread.join();
    }
};

ApiServer::ApiServer(Services services, ServeOptions options):
    _impl(std::make_unique<Impl>(std::move(services), std::move(options)))
{
}

ApiServer::~ApiServer()
{
    stop();
}

int ApiServer::start()
{
    auto port = _impl->bind();
    _impl->thread = std::thread([this] { _impl->http.listen_after_bind(); });
    _impl->http.wait_until_ready();
    return port;
}

void ApiServer::run()
{
    _impl->bind();
    _impl->http.listen_after_bind();
}

void ApiServer::stop()
{
    _impl->stop();
}

int ApiServer::port() const noexcept
{
    return _impl->port;
}

nlohmann::json ApiServer::session_summary(std::string const& id) const
{
    auto session = _impl->find(id);
    return session ? session->summary() : nlohmann::json(nullptr);
}

int cmd_serve(ServeOptions const& options, Services services, std::ostream& out, std::ostream& err)
{
    try
    {
        // Signals are taken synchronously by this thread; worker threads
        // inherit the blocked mask.
        sigset_t signals;
        sigemptyset(&signals);
        sigaddset(&signals, SIGINT);
        sigaddset(&signals, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &signals, nullptr);

        ApiServer server(std::move(services), options);
        auto port = server.start();
        out << fmt::format("serving on http://{}:{}\n", options.bind, port) << std::flush;

        int received = 0;
        sigwait(&signals, &received);
        out << "shutting down\n" << std::flush;
        server.stop();
        return 0;
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << std::endl;
        return 2;
    }
}

} // namespace foampilot
