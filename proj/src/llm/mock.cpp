// SPDX-License-Identifier: Apache-2.0
#include <foampilot/llm/mock.hpp>

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <fstream>

namespace foampilot
{

MockScript MockScript::from_json(nlohmann::json const& doc)
{
    MockScript script;
    auto const& steps = doc.is_array() ? doc : doc.at("steps");
    for (auto const& step: steps)
    {
        MockStep s;
        if (step.is_string())
            s.response = step.get<std::string>();
        else
        {
            s.response = step.at("response").get<std::string>();
            for (auto const* key: { "expect", "expect_substring" })
                if (step.contains(key) && !step[key].is_null())
                    s.expect_substring = step[key].get<std::string>();
        }
        script.steps.push_back(std::move(s));
    }
    if (doc.is_object())
        script.repeat = doc.value("repeat", false);
    return script;
}

MockScript MockScript::load(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open mock script " + path.string());
    return from_json(nlohmann::json::parse(in));
}

ScriptExhausted::ScriptExhausted(std::size_t calls):
    ProviderError(fmt::format("mock script exhausted after {} calls", calls))
{
}

MockExpectationFailed::MockExpectationFailed(std::size_t step, std::string needle):
    std::logic_error(fmt::format("mock step {}: request does not contain \"{}\"", step, needle)),
    _needle(std::move(needle))
{
}

std::string flatten_messages(std::span<Message const> messages)
{
    std::string out;
    for (auto const& m: messages)
        out += fmt::format("[{}]\n{}\n", to_string(m.role()), m.content());
    return out;
}

MockProvider::MockProvider(MockScript script): _script(std::move(script))
{
    if (_script.steps.empty())
        throw std::invalid_argument("mock script has no steps");
}

ChatResponse MockProvider::complete(std::span<Message const> messages)
{
    std::lock_guard lock(_mutex);
    auto request = flatten_messages(messages);
    _requests.push_back(request);

    if (_next >= _script.steps.size())
    {
        if (!_script.repeat)
            throw ScriptExhausted(_requests.size() - 1);
        _next = 0;
    }
    auto const index = _next++;
    auto const& step = _script.steps[index];
    if (step.expect_substring && request.find(*step.expect_substring) == std::string::npos)
        throw MockExpectationFailed(index, *step.expect_substring);
    return ChatResponse { .text = step.response, .prompt_tokens = {}, .completion_tokens = {} };
}

std::size_t MockProvider::calls() const
{
    std::lock_guard lock(_mutex);
    return _requests.size();
}

std::vector<std::string> MockProvider::requests() const
{
    std::lock_guard lock(_mutex);
    return _requests;
}

HashEmbedder::HashEmbedder(std::size_t dimension): _dimension(dimension)
{
    if (dimension == 0)
        throw std::invalid_argument("embedding dimension must be >= 1");
}

std::string HashEmbedder::model_tag() const
{
    return fmt::format("hash-bow-{}", _dimension);
}

Embedding HashEmbedder::embed_one(std::string_view text) const
{
    std::vector<double> counts(_dimension, 0.0);
    std::uint64_t hash = 0;
    bool inToken = false;
    auto flush = [&] {
        // FNV-1a's low bits only see the low bits of each step; mix before
        // reducing to a bucket.
        if (inToken)
        {
            auto h = hash;
            h ^= h >> 33;
            h *= 0xff51afd7ed558ccdULL;
            h ^= h >> 33;
            h *= 0xc4ceb9fe1a85ec53ULL;
            h ^= h >> 33;
            counts[h % _dimension] += 1.0;
        }
        inToken = false;
    };
    for (unsigned char c: text)
    {
        if (std::isalnum(c))
        {
            if (!inToken)
            {
                hash = 14695981039346656037ULL;
                inToken = true;
            }
            hash ^= static_cast<unsigned char>(std::tolower(c));
            hash *= 1099511628211ULL;
        }
        else
            flush();
    }
    flush();

    double norm = 0.0;
    for (auto v: counts)
        norm += v * v;
    Embedding out(_dimension, 0.0F);
    if (norm == 0.0)
    {
        out[0] = 1.0F;
        return out;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < _dimension; ++i)
        out[i] = static_cast<float>(counts[i] / norm);
    return out;
}

std::vector<Embedding> HashEmbedder::embed(std::span<std::string const> texts)
{
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (auto const& t: texts)
        out.push_back(embed_one(t));
    return out;
}

} // namespace foampilot
