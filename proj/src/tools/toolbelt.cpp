// SPDX-License-Identifier: Apache-2.0
#include <foampilot/tools/toolbelt.hpp>

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <memory>

#include <unistd.h>

namespace foampilot
{

WorkdirMissing::WorkdirMissing(std::filesystem::path const& dir):
    std::runtime_error("working directory does not exist: " + dir.string())
{
}

InterpreterMissing::InterpreterMissing(std::string const& interpreter):
    std::runtime_error("script interpreter not found: " + interpreter)
{
}

namespace
{

    namespace fs = std::filesystem;

    ToolResult denied()
    {
        return ToolResult { .ok = false, .output = std::string(DeniedObservation) };
    }

    std::string shell_quote(std::string_view s)
    {
        std::string out = "'";
        for (char c: s)
        {
            if (c == '\'')
                out += "'\\''";
            else
                out += c;
        }
        return out + "'";
    }

    ToolResult execute(std::string const& command, ExecutionContext const& ctx, std::chrono::duration<double> timeout)
    {
        auto const run = ctx.runner.run(ProcessRequest { command, ctx.workdir, timeout });
        auto [output, truncated] = truncate_output(run.output, ShellOutputLimits.head, ShellOutputLimits.tail);

        ToolResult result;
        result.duration = run.duration;
        result.truncated = truncated;
        result.output = std::move(output);
        if (run.timed_out)
        {
            result.ok = false;
            result.output += fmt::format("\ntimed out after {}s", static_cast<long long>(timeout.count()));
            return result;
        }
        result.exit_code = run.exit_code;
        result.ok = run.exit_code == 0;
        return result;
    }

    /// Removes the file on scope exit.
    struct TempFile
    {
        fs::path path;
        ~TempFile()
        {
            std::error_code ignored;
            fs::remove(path, ignored);
        }
    };

    std::string first_word(std::string const& s)
    {
        auto const space = s.find(' ');
        return space == std::string::npos ? s : s.substr(0, space);
    }

    std::optional<std::string> text_field(nlohmann::json const& input, std::initializer_list<char const*> keys)
    {
        if (input.is_string())
            return input.get<std::string>();
        if (input.is_object())
            for (auto const* key: keys)
                if (auto it = input.find(key); it != input.end() && it->is_string())
                    return it->get<std::string>();
        return std::nullopt;
    }

    ToolResult invalid_input(std::string_view tool, std::string_view expected)
    {
        return ToolResult { .ok = false, .output = fmt::format("Invalid input for {}: expected {}.", tool, expected) };
    }

} // namespace

std::optional<fs::path> find_executable(std::string const& name)
{
    if (name.empty())
        return std::nullopt;
    if (name.find('/') != std::string::npos)
    {
        if (::access(name.c_str(), X_OK) == 0)
            return fs::path(name);
        return std::nullopt;
    }
    auto const* pathEnv = std::getenv("PATH");
    std::string_view dirs = pathEnv ? pathEnv : "/usr/bin:/bin";
    while (!dirs.empty())
    {
        auto const colon = dirs.find(':');
        auto dir = dirs.substr(0, colon);
        dirs = colon == std::string_view::npos ? std::string_view() : dirs.substr(colon + 1);
        auto candidate = fs::path(dir.empty() ? "." : dir) / name;
        if (::access(candidate.c_str(), X_OK) == 0 && !fs::is_directory(candidate))
            return candidate;
    }
    return std::nullopt;
}

ToolResult run_shell(std::string const& command, ExecutionContext const& ctx, std::chrono::duration<double> timeout)
{
    if (!fs::is_directory(ctx.workdir))
        throw WorkdirMissing(ctx.workdir);
    if (!ctx.gate.approve(ApprovalRequest { ctx.approval_id, std::string(ShellToolName), command }))
        return denied();
    return execute(command, ctx, timeout);
}

ToolResult run_script(std::string const& source, ExecutionContext const& ctx, ScriptOptions const& options)
{
    if (source.empty())
        throw std::invalid_argument("script source is empty");
    if (!fs::is_directory(ctx.workdir))
        throw WorkdirMissing(ctx.workdir);
    if (!find_executable(first_word(options.interpreter)))
        throw InterpreterMissing(options.interpreter);
    if (!ctx.gate.approve(ApprovalRequest { ctx.approval_id, std::string(ScriptToolName), source }))
        return denied();

    auto const dir = options.scratch_dir.empty() ? fs::temp_directory_path() : options.scratch_dir;
    fs::create_directories(dir);
    auto pattern = (dir / "foampilot_script_XXXXXX.py").string();
    auto const fd = ::mkstemps(pattern.data(), 3);
    if (fd < 0)
        throw std::runtime_error("cannot create temporary script in " + dir.string());
    ::close(fd);
    TempFile const file { pattern };
    {
        std::ofstream out(file.path, std::ios::binary | std::ios::trunc);
        out << source;
        if (!out)
            throw std::runtime_error("cannot write temporary script " + file.path.string());
    }
    return execute(options.interpreter + " " + shell_quote(file.path.string()), ctx, options.timeout);
}

ToolResult retrieve(std::string const& query, std::size_t k, VectorIndex const* index, Embedder& embedder)
{
    if (index == nullptr || index->empty())
        throw IndexNotLoaded();
    if (k == 0)
        throw std::invalid_argument("k must be >= 1");

    std::vector<Embedding> vectors;
    try
    {
        std::vector<std::string> const input { query.empty() ? std::string(" ") : query };
        vectors = embedder.embed(input);
    }
    catch (std::exception const& e)
    {
        throw EmbedderError(std::string("embedding the query failed: ") + e.what());
    }
    if (vectors.size() != 1)
        throw EmbedderError("embedder returned no vector for the query");

    auto const hits = search(*index, vectors.front(), k);
    std::vector<std::string> paths;
    for (auto const& hit: hits)
        paths.push_back(hit.doc->rel_path);

    auto text = fmt::format("**Possible File Locations:**\n[{}]\n", fmt::join(paths, ", "));
    for (auto const& hit: hits)
        text += "\n" + hit.doc->full_text + "\n";

    auto [output, truncated] = truncate_output(text, RetrievalOutputLimits.head, RetrievalOutputLimits.tail);
    return ToolResult { .ok = true, .output = std::move(output), .exit_code = {}, .duration = {}, .truncated = truncated };
}

void ToolRegistry::add(ToolSpec spec, ToolHandler handler)
{
    if (spec.name.empty())
        throw std::invalid_argument("tool name is empty");
    if (contains(spec.name))
        throw std::invalid_argument("duplicate tool name: " + spec.name);
    _tools.push_back(Entry { std::move(spec), std::move(handler) });
}

bool ToolRegistry::contains(std::string_view name) const
{
    return std::ranges::any_of(_tools, [&](Entry const& e) { return e.spec.name == name; });
}

std::vector<std::string> ToolRegistry::names() const
{
    std::vector<std::string> out;
    for (auto const& e: _tools)
        out.push_back(e.spec.name);
    return out;
}

std::vector<ToolSpec> ToolRegistry::specs() const
{
    std::vector<ToolSpec> out;
    for (auto const& e: _tools)
        out.push_back(e.spec);
    return out;
}

ToolResult ToolRegistry::dispatch(std::string_view name, ToolCall const& call) const
{
    for (auto const& e: _tools)
        if (e.spec.name == name)
            return e.handler(call);
    return ToolResult { .ok = false,
                        .output = fmt::format("Unknown tool: {}. Available: {}", name, fmt::join(names(), ", ")) };
}

ToolRegistry make_toolbelt(ToolbeltOptions const& options)
{
    std::shared_ptr<ProcessRunner> owned;
    ProcessRunner* runner = options.runner;
    if (runner == nullptr)
    {
        owned = std::make_shared<PosixProcessRunner>();
        runner = owned.get();
    }

    ToolRegistry registry;
    if (options.shell)
    {
        registry.add(ToolSpec { std::string(ShellToolName), "Executes a Linux shell command in the working directory.",
                                "a command string" },
                     [options, runner, owned](ToolCall const& call) {
                         auto const command = text_field(call.input, { "command", "cmd" });
                         if (!command || command->empty())
                             return invalid_input(ShellToolName, "a command string");
                         ExecutionContext ctx { options.workdir, call.gate, *runner, call.approval_id };
                         return run_shell(*command, ctx, options.shell_timeout);
                     });
    }
    if (options.script)
    {
        registry.add(ToolSpec { std::string(ScriptToolName), "Runs a Python script and returns its output.",
                                "the script source" },
                     [options, runner, owned](ToolCall const& call) {
                         auto const source = text_field(call.input, { "code", "source", "script" });
                         if (!source || source->empty())
                             return invalid_input(ScriptToolName, "script source text");
                         ExecutionContext ctx { options.workdir, call.gate, *runner, call.approval_id };
                         return run_script(*source, ctx, options.script_options);
                     });
    }
    if (options.retrieve)
    {
        if (options.embedder == nullptr)
            throw std::invalid_argument("retrieve tool needs an embedder");
        registry.add(ToolSpec { std::string(RetrieveToolName),
                                "Searches the solver source code and returns the most relevant files.",
                                "a natural-language query" },
                     [options, runner, owned](ToolCall const& call) {
                         auto const query = text_field(call.input, { "query", "question" });
                         if (!query)
                             return invalid_input(RetrieveToolName, "a query string");
                         auto k = options.retrieval_k;
                         if (call.input.is_object() && call.input.contains("k") && call.input["k"].is_number_integer())
                             k = static_cast<std::size_t>(std::max<long long>(1, call.input["k"].get<long long>()));
                         return retrieve(*query, k, options.index, *options.embedder);
                     });
    }
    return registry;
}

} // namespace foampilot
