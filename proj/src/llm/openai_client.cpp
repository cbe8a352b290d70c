// SPDX-License-Identifier: Apache-2.0
#include <foampilot/llm/openai_client.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <fmt/format.h>

#include <regex>
#include <thread>

namespace foampilot
{

namespace
{

    using nlohmann::json;

    constexpr std::size_t ExcerptLimit = 512;

    std::string redact(std::string text, std::string const& secret)
    {
        if (secret.empty())
            return text;
        for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos))
            text.replace(pos, secret.size(), "***");
        return text;
    }

    std::string excerpt(std::string const& body, std::string const& secret)
    {
        auto text = redact(body, secret);
        if (text.size() > ExcerptLimit)
            text = text.substr(0, ExcerptLimit) + "...";
        return text;
    }

    bool retryable(int status)
    {
        return status == 429 || status >= 500;
    }

    std::string_view wire_role(Role role)
    {
        switch (role)
        {
            case Role::System: return "system";
            case Role::Assistant: return "assistant";
            case Role::User:
            case Role::ToolObservation: return "user";
        }
        return "user";
    }

} // namespace

OpenAiClient::OpenAiClient(ProviderConfig config, Sleeper sleeper):
    _config(std::move(config)), _sleep(std::move(sleeper))
{
    _config.validate();
    if (!_sleep)
        _sleep = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };

    static std::regex const urlPattern(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch match;
    if (!std::regex_match(_config.base_url, match, urlPattern))
        throw std::invalid_argument("base_url must look like http(s)://host[:port][/path]");
    _origin = match[1].str();
    _pathPrefix = match[2].str();
    while (!_pathPrefix.empty() && _pathPrefix.back() == '/')
        _pathPrefix.pop_back();
}

std::string OpenAiClient::post(std::string const& endpoint, std::string const& body)
{
    httplib::Client client(_origin);
    auto const timeout = std::chrono::duration_cast<std::chrono::microseconds>(_config.request_timeout);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!_config.api_key.empty())
        headers.emplace("Authorization", "Bearer " + _config.api_key);

    auto const path = _pathPrefix + endpoint;
    auto delay = _config.retry_backoff;
    for (int attempt = 0;; ++attempt)
    {
        auto const last = attempt >= _config.max_retries;
        auto result = client.Post(path, headers, body, "application/json");
        if (!result)
        {
            if (last)
                throw ProviderError(0, "transport error: " + httplib::to_string(result.error()));
        }
        else if (result->status == 401 || result->status == 403)
            throw AuthError(result->status, excerpt(result->body, _config.api_key));
        else if (result->status >= 200 && result->status < 300)
            return result->body;
        else if (!retryable(result->status) || last)
            throw ProviderError(result->status, excerpt(result->body, _config.api_key));

        _sleep(delay);
        delay *= 2;
    }
}

ChatResponse OpenAiClient::complete(std::span<Message const> messages)
{
    if (messages.empty())
        throw std::invalid_argument("complete() needs at least one message");

    auto wireMessages = json::array();
    for (auto const& m: messages)
    {
        auto content = m.role() == Role::ToolObservation ? "Observation: " + m.content() : m.content();
        wireMessages.push_back({ { "role", wire_role(m.role()) }, { "content", std::move(content) } });
    }
    json request = {
        { "model", _config.chat_model },
        { "temperature", _config.temperature },
        { "messages", std::move(wireMessages) },
    };

    auto const body = post("/chat/completions", request.dump());
    auto const reply = json::parse(body, nullptr, false);
    if (reply.is_discarded())
        throw ProviderError(200, "unparseable reply: " + excerpt(body, _config.api_key));
    try
    {
        ChatResponse response;
        auto const& content = reply.at("choices").at(0).at("message").at("content");
        response.text = content.is_string() ? content.get<std::string>() : std::string();
        if (auto usage = reply.find("usage"); usage != reply.end() && usage->is_object())
        {
            if (usage->contains("prompt_tokens"))
                response.prompt_tokens = (*usage)["prompt_tokens"].get<int>();
            if (usage->contains("completion_tokens"))
                response.completion_tokens = (*usage)["completion_tokens"].get<int>();
        }
        return response;
    }
    catch (json::exception const& e)
    {
        throw ProviderError(200, fmt::format("malformed reply ({}): {}", e.what(), excerpt(body, _config.api_key)));
    }
}

std::vector<Embedding> OpenAiClient::embed(std::span<std::string const> texts)
{
    if (texts.empty())
        throw std::invalid_argument("embed() needs at least one text");

    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += _config.embed_batch_size)
    {
        auto const batch = texts.subspan(begin, std::min(_config.embed_batch_size, texts.size() - begin));
        json request = { { "model", _config.embed_model }, { "input", json::array() } };
        for (auto const& t: batch)
        {
            if (t.empty())
                throw std::invalid_argument("embed() input texts must be non-empty");
            request["input"].push_back(t);
        }

        auto const body = post("/embeddings", request.dump());
        try
        {
            auto const reply = json::parse(body);
            auto const& data = reply.at("data");
            if (data.size() != batch.size())
                throw ProviderError(200, fmt::format("expected {} embeddings, got {}", batch.size(), data.size()));
            std::vector<Embedding> vectors(batch.size());
            for (std::size_t i = 0; i < data.size(); ++i)
            {
                auto const slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
                if (slot >= vectors.size())
                    throw ProviderError(200, "embedding index out of range");
                vectors[slot] = data[i].at("embedding").get<Embedding>();
            }
            for (auto& v: vectors)
                out.push_back(std::move(v));
        }
        catch (json::exception const& e)
        {
            throw ProviderError(200, fmt::format("malformed reply ({}): {}", e.what(), excerpt(body, _config.api_key)));
        }
    }
    check_dimensions(out);
    return out;
}

} // namespace foampilot
