// SPDX-License-Identifier: Apache-2.0
#include <foampilot/index/vector_index.hpp>

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

namespace foampilot
{

VersionMismatch::VersionMismatch(std::uint32_t found, std::uint32_t expected):
    std::runtime_error(fmt::format("index format version {} does not match supported version {}", found, expected))
{
}

std::size_t VectorIndex::truncated_count() const noexcept
{
    return static_cast<std::size_t>(std::ranges::count_if(
        docs, [](EmbeddedDoc const& d) { return d.embedded_chars < d.doc.full_text.size(); }));
}

double cosine(std::span<float const> u, std::span<float const> v)
{
    if (u.size() != v.size())
        throw DimensionMismatch(fmt::format("cosine of vectors with dimensions {} and {}", u.size(), v.size()));
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        dot += double(u[i]) * double(v[i]);
        uu += double(u[i]) * double(u[i]);
        vv += double(v[i]) * double(v[i]);
    }
    if (uu == 0.0 || vv == 0.0)
        throw ZeroVector();
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

void normalize(Embedding& v)
{
    double norm = 0.0;
    for (auto x: v)
        norm += double(x) * double(x);
    if (norm == 0.0)
        throw ZeroVector();
    norm = std::sqrt(norm);
    for (auto& x: v)
        x = static_cast<float>(double(x) / norm);
}

VectorIndex build_index(std::vector<SourceDoc> docs, Embedder& embedder, std::size_t maxTokens)
{
    if (docs.empty())
        throw std::invalid_argument("cannot build an index without documents");

    std::vector<std::string> inputs;
    inputs.reserve(docs.size());
    for (auto const& d: docs)
        inputs.emplace_back(truncate_for_embedding(d.full_text, maxTokens));

    auto vectors = embedder.embed(inputs);
    if (vectors.size() != docs.size())
        throw DimensionMismatch(fmt::format("embedder returned {} vectors for {} documents", vectors.size(), docs.size()));

    VectorIndex index;
    index.dimension = check_dimensions(vectors);
    index.embed_model_tag = embedder.model_tag();
    index.docs.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i)
    {
        normalize(vectors[i]);
        docs[i].doc_id = i;
        index.docs.push_back(EmbeddedDoc { std::move(docs[i]), std::move(vectors[i]), inputs[i].size() });
    }
    return index;
}

std::vector<SearchHit> search(VectorIndex const& index, std::span<float const> query, std::size_t k)
{
    if (query.size() != index.dimension)
        throw DimensionMismatch(
            fmt::format("query dimension {} does not match index dimension {}", query.size(), index.dimension));
    if (k == 0)
        throw std::invalid_argument("k must be >= 1");

    std::vector<SearchHit> hits;
    hits.reserve(index.docs.size());
    for (auto const& entry: index.docs)
        hits.push_back(SearchHit { &entry.doc, cosine(query, entry.vector) });

    auto const n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(),
                      [](SearchHit const& a, SearchHit const& b) {
                          if (a.score != b.score)
                              return a.score > b.score;
                          return a.doc->doc_id < b.doc->doc_id;
                      });
    hits.resize(n);
    return hits;
}

// On-disk layout, all integers little-endian:
//   "FPIX" u32 version, u32 dimension, u32 tag length, tag bytes, u64 doc count,
//   u32 crc32(payload), payload
// payload per document:
//   u32 path length, path, u8 paired, u64 embedded_chars, u64 text length, text,
//   dimension x f32
namespace
{

    constexpr std::string_view Magic = "FPIX";

    class Writer
    {
    public:
        template <std::unsigned_integral T>
        void put(T value)
        {
            for (std::size_t i = 0; i < sizeof(T); ++i)
                bytes.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
        }

        void put_bytes(std::string_view s) { bytes.append(s); }

        std::string bytes;
    };

    class Reader
    {
    public:
        explicit Reader(std::string_view data): _data(data) {}

        template <std::unsigned_integral T>
        T get()
        {
            auto const raw = take(sizeof(T));
            T value = 0;
            for (std::size_t i = 0; i < sizeof(T); ++i)
                value |= static_cast<T>(static_cast<unsigned char>(raw[i])) << (8 * i);
            return value;
        }

        std::string_view take(std::size_t n)
        {
            if (n > _data.size() - _pos)
                throw CorruptIndex("index file is truncated");
            auto const out = _data.substr(_pos, n);
            _pos += n;
            return out;
        }

        [[nodiscard]] std::string_view rest() const { return _data.substr(_pos); }
        [[nodiscard]] bool done() const { return _pos == _data.size(); }

    private:
        std::string_view _data;
        std::size_t _pos = 0;
    };

    std::uint32_t checksum(std::string_view bytes)
    {
        auto crc = crc32(0L, Z_NULL, 0);
        // zlib takes uInt lengths; feed in chunks.
        while (!bytes.empty())
        {
            auto const n = std::min<std::size_t>(bytes.size(), 1U << 30);
            crc = crc32(crc, reinterpret_cast<Bytef const*>(bytes.data()), static_cast<uInt>(n));
            bytes.remove_prefix(n);
        }
        return static_cast<std::uint32_t>(crc);
    }

} // namespace

void save_index(VectorIndex const& index, fs::path const& path)
{
    Writer payload;
    for (auto const& entry: index.docs)
    {
        if (entry.vector.size() != index.dimension)
            throw DimensionMismatch("document vector does not match index dimension");
        payload.put(static_cast<std::uint32_t>(entry.doc.rel_path.size()));
        payload.put_bytes(entry.doc.rel_path);
        payload.put(static_cast<std::uint8_t>(entry.doc.paired ? 1 : 0));
        payload.put(static_cast<std::uint64_t>(entry.embedded_chars));
        payload.put(static_cast<std::uint64_t>(entry.doc.full_text.size()));
        payload.put_bytes(entry.doc.full_text);
        for (auto x: entry.vector)
            payload.put(std::bit_cast<std::uint32_t>(x));
    }

    Writer header;
    header.put_bytes(Magic);
    header.put(index.format_version);
    header.put(static_cast<std::uint32_t>(index.dimension));
    header.put(static_cast<std::uint32_t>(index.embed_model_tag.size()));
    header.put_bytes(index.embed_model_tag);
    header.put(static_cast<std::uint64_t>(index.docs.size()));
    header.put(checksum(payload.bytes));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write index " + path.string());
    out.write(header.bytes.data(), static_cast<std::streamsize>(header.bytes.size()));
    out.write(payload.bytes.data(), static_cast<std::streamsize>(payload.bytes.size()));
    if (!out)
        throw std::runtime_error("failed writing index " + path.string());
}

VectorIndex load_index(fs::path const& path)
{
    if (!fs::is_regular_file(path))
        throw std::runtime_error("index file not found: " + path.string());
    auto const data = read_text_file(path);
    Reader in(data);

    if (in.take(std::min(data.size(), Magic.size())) != Magic)
        throw CorruptIndex("not an index file (bad magic)");

    VectorIndex index;
    index.format_version = in.get<std::uint32_t>();
    if (index.format_version != VectorIndex::FormatVersion)
        throw VersionMismatch(index.format_version, VectorIndex::FormatVersion);
    index.dimension = in.get<std::uint32_t>();
    index.embed_model_tag = std::string(in.take(in.get<std::uint32_t>()));
    auto const count = in.get<std::uint64_t>();
    auto const expected = in.get<std::uint32_t>();
    if (checksum(in.rest()) != expected)
        throw CorruptIndex("index checksum mismatch");

    for (std::uint64_t i = 0; i < count; ++i)
    {
        EmbeddedDoc entry;
        entry.doc.doc_id = static_cast<std::size_t>(i);
        entry.doc.rel_path = std::string(in.take(in.get<std::uint32_t>()));
        entry.doc.paired = in.get<std::uint8_t>() != 0;
        entry.embedded_chars = static_cast<std::size_t>(in.get<std::uint64_t>());
        entry.doc.full_text = std::string(in.take(static_cast<std::size_t>(in.get<std::uint64_t>())));
        entry.vector.resize(index.dimension);
        for (auto& x: entry.vector)
            x = std::bit_cast<float>(in.get<std::uint32_t>());
        index.docs.push_back(std::move(entry));
    }
    if (!in.done())
        throw CorruptIndex("trailing bytes after last document");
    return index;
}

} // namespace foampilot
