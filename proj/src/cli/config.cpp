// SPDX-License-Identifier: Apache-2.0
#include <foampilot/cli/config.hpp>
#include <foampilot/index/corpus.hpp>

#include <cstdlib>

namespace foampilot
{

std::optional<std::string> process_env(std::string const& name)
{
    char const* value = std::getenv(name.c_str());
    if (value == nullptr)
        return std::nullopt;
    return std::string(value);
}

std::optional<fs::path> find_config_file(std::optional<fs::path> const& explicitPath, EnvLookup const& env)
{
    if (explicitPath)
    {
        if (!fs::is_regular_file(*explicitPath))
            throw ConfigError("config file not found: " + explicitPath->string());
        return explicitPath;
    }
    if (fs::is_regular_file(ConfigFileName))
        return fs::path(ConfigFileName);
    if (auto home = env("HOME"); home && !home->empty())
    {
        auto candidate = fs::path(*home) / ConfigFileName;
        if (fs::is_regular_file(candidate))
            return candidate;
    }
    return std::nullopt;
}

namespace
{

    template <typename T>
    void take(nlohmann::json const& doc, char const* key, T& target)
    {
        if (auto it = doc.find(key); it != doc.end() && !it->is_null())
        {
            try
            {
                target = it->get<T>();
            }
            catch (nlohmann::json::exception const&)
            {
                throw ConfigError(std::string("bad value for config key '") + key + "'");
            }
        }
    }

    double parse_double(std::string const& name, std::string const& text)
    {
        try
        {
            std::size_t used = 0;
            double value = std::stod(text, &used);
            if (used != text.size())
                throw std::invalid_argument(text);
            return value;
        }
        catch (std::exception const&)
        {
            throw ConfigError(name + " is not a number: " + text);
        }
    }

} // namespace

void apply_config_json(AppConfig& config, nlohmann::json const& doc)
{
    if (!doc.is_object())
        throw ConfigError("config root must be a JSON object");

    if (auto llm = doc.find("llm"); llm != doc.end())
    {
        auto& p = config.provider;
        take(*llm, "base_url", p.base_url);
        take(*llm, "api_key", p.api_key);
        take(*llm, "model", p.chat_model);
        take(*llm, "embed_model", p.embed_model);
        take(*llm, "temperature", p.temperature);
        take(*llm, "max_retries", p.max_retries);
        if (auto t = llm->find("timeout_s"); t != llm->end() && t->is_number())
            p.request_timeout = std::chrono::duration<double>(t->get<double>());
    }
    if (auto policy = doc.find("policy"); policy != doc.end())
    {
        auto& p = config.policy;
        take(*policy, "max_loops", p.max_loops);
        take(*policy, "max_parse_retries", p.max_parse_retries);
        take(*policy, "context_window", p.context_window);
        take(*policy, "budget_fraction", p.budget_fraction);
        take(*policy, "allowlist", p.allowlist);
        if (auto mode = policy->find("approval"); mode != policy->end() && mode->is_string())
            p.approval_mode = parse_approval_mode(mode->get<std::string>());
    }
    take(doc, "retrieval_k", config.retrieval_k);
    take(doc, "cells_per_core", config.cells_per_core);
    take(doc, "script_interpreter", config.script_interpreter);
    take(doc, "serve_port", config.serve_port);
    if (auto index = doc.find("index_path"); index != doc.end() && index->is_string())
        config.index_path = index->get<std::string>();
}

void apply_environment(AppConfig& config, EnvLookup const& env)
{
    auto& p = config.provider;
    if (auto v = env("FOAMPILOT_LLM_BASE_URL"))
        p.base_url = *v;
    if (auto v = env("FOAMPILOT_LLM_API_KEY"))
        p.api_key = *v;
    if (auto v = env("FOAMPILOT_LLM_MODEL"); v && !v->empty())
        p.chat_model = *v;
    if (auto v = env("FOAMPILOT_EMBED_MODEL"); v && !v->empty())
        p.embed_model = *v;
    if (auto v = env("FOAMPILOT_TEMPERATURE"); v && !v->empty())
        p.temperature = parse_double("FOAMPILOT_TEMPERATURE", *v);
    if (auto v = env("FOAMPILOT_SCRIPT_INTERPRETER"); v && !v->empty())
        config.script_interpreter = *v;
    if (auto v = env("FOAMPILOT_APPROVAL"); v && !v->empty())
        config.policy.approval_mode = parse_approval_mode(*v);
}

AppConfig load_config(std::optional<fs::path> const& explicitPath, EnvLookup const& env)
{
    AppConfig config;
    if (auto file = find_config_file(explicitPath, env))
    {
        nlohmann::json doc;
        try
        {
            doc = nlohmann::json::parse(read_text_file(*file));
        }
        catch (nlohmann::json::parse_error const& e)
        {
            throw ConfigError(file->string() + ": " + e.what());
        }
        apply_config_json(config, doc);
        config.source = *file;
    }
    apply_environment(config, env);
    return config;
}

} // namespace foampilot
