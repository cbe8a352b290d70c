// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/llm/provider.hpp>

#include <functional>

namespace foampilot
{

/// Chat and embedding client for the OpenAI-compatible wire format:
/// POST {base_url}/chat/completions and POST {base_url}/embeddings.
class OpenAiClient final: public ChatProvider, public Embedder
{
public:
    using Sleeper = std::function<void(std::chrono::duration<double>)>;

    explicit OpenAiClient(ProviderConfig config, Sleeper sleeper = {});

    ChatResponse complete(std::span<Message const> messages) override;
    std::vector<Embedding> embed(std::span<std::string const> texts) override;
    [[nodiscard]] std::string model_tag() const override { return _config.embed_model; }

    [[nodiscard]] ProviderConfig const& config() const noexcept { return _config; }

private:
    /// POSTs with retry on transport errors, 429 and 5xx. Returns the body.
    std::string post(std::string const& endpoint, std::string const& body);

    ProviderConfig _config;
    Sleeper _sleep;
    std::string _origin;
    std::string _pathPrefix;
};

} // namespace foampilot
