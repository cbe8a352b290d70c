// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/agent/message.hpp>

#include <chrono>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace foampilot
{

using Embedding = std::vector<float>;

struct ProviderConfig
{
    std::string base_url;
    std::string api_key;
    std::string chat_model = "gpt-4o";
    std::string embed_model = "text-embedding-ada-002";
    double temperature = 0.0;
    std::chrono::duration<double> request_timeout = std::chrono::seconds(120);
    int max_retries = 3;
    /// First backoff delay; doubles on every retry.
    std::chrono::duration<double> retry_backoff = std::chrono::seconds(1);
    std::size_t embed_batch_size = 64;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

struct ChatResponse
{
    std::string text;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

/// Provider failure after the retry policy is exhausted. The body excerpt never
/// carries the API key.
class ProviderError: public std::runtime_error
{
public:
    ProviderError(int status, std::string bodyExcerpt);
    ProviderError(std::string const& message);

    [[nodiscard]] int status() const noexcept { return _status; }
    [[nodiscard]] std::string const& body_excerpt() const noexcept { return _body; }

private:
    int _status = 0;
    std::string _body;
};

class AuthError: public ProviderError
{
public:
    AuthError(int status, std::string bodyExcerpt);
};

class DimensionMismatch: public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class ChatProvider
{
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse complete(std::span<Message const> messages) = 0;
};

class Embedder
{
public:
    virtual ~Embedder() = default;
    /// One vector per input, order preserved, all of one dimension.
    virtual std::vector<Embedding> embed(std::span<std::string const> texts) = 0;
    /// Identifies the model, persisted alongside the vectors it produced.
    [[nodiscard]] virtual std::string model_tag() const = 0;
};

/// Checks a provider's batch reply and returns its common dimension.
std::size_t check_dimensions(std::span<Embedding const> vectors);

} // namespace foampilot
