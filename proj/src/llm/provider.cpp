// SPDX-License-Identifier: Apache-2.0
#include <foampilot/llm/provider.hpp>

#include <fmt/format.h>

namespace foampilot
{

void ProviderConfig::validate() const
{
    if (temperature < 0.0)
        throw std::invalid_argument("temperature must be >= 0");
    if (max_retries < 0)
        throw std::invalid_argument("max_retries must be >= 0");
    if (embed_batch_size == 0)
        throw std::invalid_argument("embed_batch_size must be >= 1");
    if (base_url.empty())
        throw std::invalid_argument("base_url is empty (set FOAMPILOT_LLM_BASE_URL or use a mock provider)");
}

ProviderError::ProviderError(int status, std::string bodyExcerpt):
    std::runtime_error(fmt::format("provider error (HTTP {}): {}", status, bodyExcerpt)),
    _status(status),
    _body(std::move(bodyExcerpt))
{
}

ProviderError::ProviderError(std::string const& message): std::runtime_error(message) {}

AuthError::AuthError(int status, std::string bodyExcerpt): ProviderError(status, std::move(bodyExcerpt)) {}

std::size_t check_dimensions(std::span<Embedding const> vectors)
{
    if (vectors.empty())
        return 0;
    auto const dim = vectors.front().size();
    if (dim == 0)
        throw DimensionMismatch("provider returned an empty embedding");
    for (auto const& v: vectors)
        if (v.size() != dim)
            throw DimensionMismatch(fmt::format("embedding dimension {} differs from {}", v.size(), dim));
    return dim;
}

} // namespace foampilot
