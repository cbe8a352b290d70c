// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/index/vector_index.hpp>
#include <foampilot/llm/provider.hpp>
#include <foampilot/tools/approval.hpp>
#include <foampilot/tools/process.hpp>
#include <foampilot/tools/truncate.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace foampilot
{

inline constexpr std::string_view ShellToolName = "shell";
inline constexpr std::string_view ScriptToolName = "script";
inline constexpr std::string_view RetrieveToolName = "retrieve";

inline constexpr std::chrono::seconds DefaultShellTimeout { 600 };
inline constexpr std::chrono::seconds DefaultScriptTimeout { 300 };
inline constexpr std::size_t DefaultRetrievalK = 4;

struct ToolSpec
{
    std::string name;
    std::string description;
    std::string input_schema_hint;
};

struct ToolResult
{
    bool ok = false;
    std::string output;
    std::optional<int> exit_code;
    std::chrono::duration<double> duration {};
    bool truncated = false;
};

class WorkdirMissing: public std::runtime_error
{
public:
    explicit WorkdirMissing(std::filesystem::path const& dir);
};

class InterpreterMissing: public std::runtime_error
{
public:
    explicit InterpreterMissing(std::string const& interpreter);
};

class IndexNotLoaded: public std::runtime_error
{
public:
    IndexNotLoaded(): std::runtime_error("retrieval index is not loaded or empty") {}
};

class EmbedderError: public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Everything a gated process tool needs besides its own input.
struct ExecutionContext
{
    std::filesystem::path workdir;
    ApprovalGate const& gate;
    ProcessRunner& runner;
    std::string approval_id;
};

ToolResult run_shell(std::string const& command, ExecutionContext const& ctx,
                     std::chrono::duration<double> timeout = DefaultShellTimeout);

struct ScriptOptions
{
    std::string interpreter = "python3";
    /// Where temporary script files go; the system temp dir when empty.
    std::filesystem::path scratch_dir;
    std::chrono::duration<double> timeout = DefaultScriptTimeout;
};

ToolResult run_script(std::string const& source, ExecutionContext const& ctx, ScriptOptions const& options = {});

/// Resolves a bare command name against PATH.
[[nodiscard]] std::optional<std::filesystem::path> find_executable(std::string const& name);

ToolResult retrieve(std::string const& query, std::size_t k, VectorIndex const* index, Embedder& embedder);

/// Input to a registered tool: the parsed action_input plus the identity the
/// agent loop assigned to this call.
struct ToolCall
{
    std::string approval_id;
    nlohmann::json input;
    ApprovalGate const& gate;
};

using ToolHandler = std::function<ToolResult(ToolCall const&)>;

class ToolRegistry
{
public:
    /// Throws std::invalid_argument on a duplicate name.
    void add(ToolSpec spec, ToolHandler handler);

    [[nodiscard]] bool contains(std::string_view name) const;
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::vector<ToolSpec> specs() const;
    [[nodiscard]] bool empty() const noexcept { return _tools.empty(); }

    /// Unknown names produce a failed result naming the available tools.
    ToolResult dispatch(std::string_view name, ToolCall const& call) const;

private:
    struct Entry
    {
        ToolSpec spec;
        ToolHandler handler;
    };
    std::vector<Entry> _tools;
};

struct ToolbeltOptions
{
    bool shell = true;
    bool script = false;
    bool retrieve = false;

    std::filesystem::path workdir = ".";
    ProcessRunner* runner = nullptr;
    std::chrono::duration<double> shell_timeout = DefaultShellTimeout;
    ScriptOptions script_options;

    VectorIndex const* index = nullptr;
    Embedder* embedder = nullptr;
    std::size_t retrieval_k = DefaultRetrievalK;
};

/// Registers the requested subset of shell, script and retrieve, in that order.
[[nodiscard]] ToolRegistry make_toolbelt(ToolbeltOptions const& options);

} // namespace foampilot
