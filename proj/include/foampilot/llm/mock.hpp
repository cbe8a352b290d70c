// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/llm/provider.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace foampilot
{

struct MockStep
{
    std::optional<std::string> expect_substring;
    std::string response;
};

struct MockScript
{
    std::vector<MockStep> steps;
    /// Restart from the first step instead of raising ScriptExhausted.
    bool repeat = false;

    static MockScript from_json(nlohmann::json const& doc);
    static MockScript load(std::filesystem::path const& path);
};

class ScriptExhausted: public ProviderError
{
public:
    explicit ScriptExhausted(std::size_t calls);
};

/// An unmet expectation is a broken test, so this deliberately does not derive
/// from ProviderError and is never absorbed by the agent loop.
class MockExpectationFailed: public std::logic_error
{
public:
    MockExpectationFailed(std::size_t step, std::string needle);
    [[nodiscard]] std::string const& needle() const noexcept { return _needle; }

private:
    std::string _needle;
};

/// Replays a MockScript one step per complete() call.
class MockProvider final: public ChatProvider
{
public:
    explicit MockProvider(MockScript script);

    ChatResponse complete(std::span<Message const> messages) override;

    [[nodiscard]] std::size_t calls() const;
    /// Flattened request text of every call so far.
    [[nodiscard]] std::vector<std::string> requests() const;

private:
    MockScript _script;
    mutable std::mutex _mutex;
    std::size_t _next = 0;
    std::vector<std::string> _requests;
};

/// Deterministic bag-of-words embedder: alphanumeric tokens, lower-cased and
/// hashed into `dimension` buckets, counted and L2-normalised.
class HashEmbedder final: public Embedder
{
public:
    static constexpr std::size_t DefaultDimension = 256;

    explicit HashEmbedder(std::size_t dimension = DefaultDimension);

    std::vector<Embedding> embed(std::span<std::string const> texts) override;
    [[nodiscard]] std::string model_tag() const override;

    [[nodiscard]] Embedding embed_one(std::string_view text) const;

private:
    std::size_t _dimension;
};

[[nodiscard]] std::string flatten_messages(std::span<Message const> messages);

} // namespace foampilot
