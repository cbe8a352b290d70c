// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/agent/session.hpp>
#include <foampilot/casekit/case_tree.hpp>
#include <foampilot/cli/config.hpp>
#include <foampilot/index/vector_index.hpp>
#include <foampilot/tools/toolbelt.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace foampilot
{

/// Bad command line or request parameters; reported with exit code 2.
class UsageError: public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

enum class SessionMode
{
    Chat,
    Configure,
    RunSerial,
    RunHpc,
    Ask,
};

[[nodiscard]] std::string_view to_string(SessionMode mode) noexcept;
/// Accepts chat, configure, run_serial, run_hpc, ask.
[[nodiscard]] SessionMode parse_session_mode(std::string_view text);

/// Long-lived collaborators shared by every session of one process.
struct Services
{
    AppConfig config;
    /// Each session gets its own provider, so scripted providers replay from
    /// the start for every session.
    std::function<std::unique_ptr<ChatProvider>()> make_llm;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<ProcessRunner> runner;
};

/// `llmSpec` is empty for the configured HTTP provider or "mock:PATH" for a
/// scripted one (paired with the hash embedder).
[[nodiscard]] Services make_services(AppConfig config, std::optional<std::string> const& llmSpec = std::nullopt);

struct SessionParams
{
    std::optional<fs::path> case_path;
    std::optional<fs::path> bashrc;
    std::optional<fs::path> index_path;
    /// The question for Ask, the request for Configure.
    std::string text;
    std::optional<fs::path> workdir;
};

[[nodiscard]] SessionParams session_params_from_json(nlohmann::json const& doc);

struct PreparedSession
{
    SessionMode mode = SessionMode::Chat;
    std::shared_ptr<VectorIndex const> index;
    ToolRegistry tools;
    /// Absent for chat, which waits for the first user turn.
    std::optional<std::string> initial_prompt;
    fs::path workdir;
    /// Case state before the session, for the configure diff.
    std::optional<CaseTree> case_before;
};

/// Validates parameters, loads what the mode needs and assembles its tools.
/// Throws UsageError for missing or invalid inputs.
[[nodiscard]] PreparedSession prepare_session(SessionMode mode, SessionParams const& params, Services const& services);

} // namespace foampilot
