// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/cli/modes.hpp>

#include <memory>
#include <string>

namespace foampilot
{

struct ServeOptions
{
    std::string bind = "127.0.0.1";
    /// 0 picks a free port.
    int port = DefaultServePort;
    /// Console bundle served at "/"; a placeholder page when empty.
    fs::path static_dir;
    /// How long an idle event stream waits before sending a keepalive comment.
    std::chrono::milliseconds keepalive { 15000 };
};

[[nodiscard]] bool is_loopback_address(std::string_view address) noexcept;

/// Agent sessions over HTTP with server-sent events.
///
///   POST /api/sessions                           {mode, params} -> 201 {session_id}
///   POST /api/sessions/{id}/messages             {text} -> 202
///   GET  /api/sessions/{id}/events               text/event-stream, resumable with Last-Event-ID
///   POST /api/sessions/{id}/approvals/{approval} {decision} -> 200, 409 when already resolved
///   GET  /api/sessions/{id}                      session summary
class ApiServer
{
public:
    ApiServer(Services services, ServeOptions options);
    ~ApiServer();

    ApiServer(ApiServer const&) = delete;
    ApiServer& operator=(ApiServer const&) = delete;

    /// Binds and serves on a background thread. Returns the bound port.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    /// Lets running tool calls finish, aborts every session (pending
    /// approvals resolve as abort) and closes the listener. Idempotent.
    void stop();

    [[nodiscard]] int port() const noexcept;
    /// The JSON served by GET /api/sessions/{id}; null for unknown ids.
    [[nodiscard]] nlohmann::json session_summary(std::string const& id) const;

private:
    struct Impl;
    std::unique_ptr<Impl> _impl;
};

/// Runs the server until SIGINT or SIGTERM.
int cmd_serve(ServeOptions const& options, Services services, std::ostream& out, std::ostream& err);

} // namespace foampilot
