// SPDX-License-Identifier: Apache-2.0
#include <foampilot/agent/prompts.hpp>
#include <foampilot/cli/modes.hpp>
#include <foampilot/llm/mock.hpp>
#include <foampilot/llm/openai_client.hpp>

namespace foampilot
{

std::string_view to_string(SessionMode mode) noexcept
{
    switch (mode)
    {
        case SessionMode::Chat: return "chat";
        case SessionMode::Configure: return "configure";
        case SessionMode::RunSerial: return "run_serial";
        case SessionMode::RunHpc: return "run_hpc";
        case SessionMode::Ask: return "ask";
    }
    return "chat";
}

SessionMode parse_session_mode(std::string_view text)
{
    for (auto mode: { SessionMode::Chat, SessionMode::Configure, SessionMode::RunSerial, SessionMode::RunHpc,
                      SessionMode::Ask })
        if (to_string(mode) == text)
            return mode;
    throw UsageError("unknown session mode: " + std::string(text));
}

Services make_services(AppConfig config, std::optional<std::string> const& llmSpec)
{
    Services services;
    services.runner = std::make_shared<PosixProcessRunner>();
    if (llmSpec && !llmSpec->empty())
    {
        constexpr std::string_view prefix = "mock:";
        if (!llmSpec->starts_with(prefix))
            throw UsageError("--llm expects mock:PATH");
        auto script = MockScript::load(llmSpec->substr(prefix.size()));
        services.make_llm = [script] { return std::make_unique<MockProvider>(script); };
        services.embedder = std::make_shared<HashEmbedder>();
    }
    else if (config.provider.base_url.empty())
    {
        services.make_llm = []() -> std::unique_ptr<ChatProvider> {
            throw ConfigError("no model provider configured: set FOAMPILOT_LLM_BASE_URL or pass --llm mock:PATH");
        };
    }
    else
    {
        auto client = std::make_shared<OpenAiClient>(config.provider);
        services.make_llm = [client]() -> std::unique_ptr<ChatProvider> {
            return std::make_unique<OpenAiClient>(client->config());
        };
        services.embedder = client;
    }
    services.config = std::move(config);
    return services;
}

SessionParams session_params_from_json(nlohmann::json const& doc)
{
    SessionParams params;
    if (doc.is_null())
        return params;
    if (!doc.is_object())
        throw UsageError("params must be an object");
    auto path = [&](char const* key) -> std::optional<fs::path> {
        auto it = doc.find(key);
        if (it == doc.end() || it->is_null())
            return std::nullopt;
        if (!it->is_string())
            throw UsageError(std::string(key) + " must be a string");
        return fs::path(it->get<std::string>());
    };
    params.case_path = path("case");
    params.bashrc = path("bashrc");
    params.index_path = path("index");
    params.workdir = path("workdir");
    for (char const* key: { "text", "question", "request" })
        if (auto it = doc.find(key); it != doc.end() && it->is_string())
            params.text = it->get<std::string>();
    return params;
}

namespace
{

    fs::path existing_case(SessionParams const& params)
    {
        if (!params.case_path)
            throw UsageError("--case is required");
        if (!fs::is_directory(*params.case_path))
            throw UsageError("case directory not found: " + params.case_path->string());
        return fs::absolute(*params.case_path).lexically_normal();
    }

    fs::path existing_bashrc(SessionParams const& params)
    {
        if (!params.bashrc)
            throw UsageError("--bashrc is required");
        if (!fs::is_regular_file(*params.bashrc))
            throw UsageError("bashrc not found: " + params.bashrc->string());
        return fs::absolute(*params.bashrc).lexically_normal();
    }

    /// The index named by the request or the config. A required index must
    /// exist; an optional one is skipped when absent.
    std::shared_ptr<VectorIndex const> open_index(SessionParams const& params, Services const& services, bool required)
    {
        auto path = params.index_path ? *params.index_path : services.config.index_path;
        if (path.empty())
        {
            if (required)
                throw UsageError("--index is required");
            return nullptr;
        }
        if (!fs::is_regular_file(path))
        {
            if (required || params.index_path)
                throw UsageError("index file not found: " + path.string());
            return nullptr;
        }
        return std::make_shared<VectorIndex const>(load_index(path));
    }

} // namespace

PreparedSession prepare_session(SessionMode mode, SessionParams const& params, Services const& services)
{
    PreparedSession prepared;
    prepared.mode = mode;

    ToolbeltOptions tools;
    tools.runner = services.runner.get();
    tools.embedder = services.embedder.get();
    tools.retrieval_k = services.config.retrieval_k;
    tools.script_options.interpreter = services.config.script_interpreter;
    prepared.workdir = params.workdir ? *params.workdir : fs::current_path();

    switch (mode)
    {
        case SessionMode::Ask:
        {
            if (params.text.empty())
                throw UsageError("a question is required");
            prepared.index = open_index(params, services, true);
            prepared.initial_prompt = params.text;
            tools.retrieve = true;
            break;
        }
        case SessionMode::Configure:
        {
            auto root = existing_case(params);
            if (params.text.empty())
                throw UsageError("a configuration request is required");
            prepared.workdir = root;
            prepared.case_before = CaseTree::load(root);
            prepared.initial_prompt =
                build_config_prompt(root.string(), params.text, flatten_case(*prepared.case_before));
            prepared.index = open_index(params, services, false);
            tools.retrieve = prepared.index != nullptr;
            break;
        }
        case SessionMode::RunSerial:
        case SessionMode::RunHpc:
        {
            auto root = existing_case(params);
            auto bashrc = existing_bashrc(params);
            prepared.workdir = root;
            PromptBindings bindings { { "case_path", root.string() }, { "OF_bashrc_path", bashrc.string() } };
            auto id = PromptTemplate::SerialJob;
            if (mode == SessionMode::RunHpc)
            {
                id = PromptTemplate::HpcJob;
                bindings["case_contents"] = flatten_case(root).text;
            }
            prepared.initial_prompt = render_prompt_template(id, bindings);
            prepared.index = open_index(params, services, false);
            tools.script = true;
            tools.retrieve = prepared.index != nullptr;
            break;
        }
        case SessionMode::Chat:
        {
            if (!fs::is_directory(prepared.workdir))
                throw UsageError("working directory not found: " + prepared.workdir.string());
            prepared.index = open_index(params, services, false);
            tools.script = true;
            tools.retrieve = prepared.index != nullptr;
            break;
        }
    }

    if (tools.retrieve && !services.embedder)
        throw ConfigError("retrieval needs an embedding provider: set FOAMPILOT_LLM_BASE_URL or pass --llm mock:PATH");
    tools.workdir = prepared.workdir;
    tools.index = prepared.index.get();
    prepared.tools = make_toolbelt(tools);
    return prepared;
}

} // namespace foampilot
