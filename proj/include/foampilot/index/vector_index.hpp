// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/index/corpus.hpp>
#include <foampilot/llm/provider.hpp>

#include <cstdint>
#include <span>

namespace foampilot
{

class ZeroVector: public std::invalid_argument
{
public:
    ZeroVector(): std::invalid_argument("cosine of a zero vector") {}
};

class VersionMismatch: public std::runtime_error
{
public:
    VersionMismatch(std::uint32_t found, std::uint32_t expected);
};

class CorruptIndex: public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct EmbeddedDoc
{
    SourceDoc doc;
    Embedding vector;
    std::size_t embedded_chars = 0;

    bool operator==(EmbeddedDoc const&) const = default;
};

struct VectorIndex
{
    static constexpr std::uint32_t FormatVersion = 1;
    static constexpr std::size_t DefaultMaxTokens = 8192;

    std::size_t dimension = 0;
    std::vector<EmbeddedDoc> docs;
    std::string embed_model_tag;
    std::uint32_t format_version = FormatVersion;

    [[nodiscard]] bool empty() const noexcept { return docs.empty(); }
    /// Number of documents whose embedded prefix is shorter than the full text.
    [[nodiscard]] std::size_t truncated_count() const noexcept;

    bool operator==(VectorIndex const&) const = default;
};

struct SearchHit
{
    SourceDoc const* doc;
    double score;
};

[[nodiscard]] double cosine(std::span<float const> u, std::span<float const> v);

/// Scales `v` to unit length. Throws ZeroVector.
void normalize(Embedding& v);

[[nodiscard]] VectorIndex build_index(std::vector<SourceDoc> docs, Embedder& embedder,
                                      std::size_t maxTokens = VectorIndex::DefaultMaxTokens);

/// Exact scan; descending score, ties by ascending doc_id; min(k, size) hits.
[[nodiscard]] std::vector<SearchHit> search(VectorIndex const& index, std::span<float const> query, std::size_t k);

void save_index(VectorIndex const& index, fs::path const& path);
[[nodiscard]] VectorIndex load_index(fs::path const& path);

} // namespace foampilot
