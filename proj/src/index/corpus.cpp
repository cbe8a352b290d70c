// SPDX-License-Identifier: Apache-2.0
#include <foampilot/index/corpus.hpp>
#include <foampilot/agent/message.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <span>
#include <sstream>

namespace foampilot
{

RootMissing::RootMissing(fs::path const& root): std::runtime_error("root not found: " + root.string()) {}

fs::path const& CorpusEntry::rel_path() const
{
    if (header)
        return *header;
    if (source)
        return *source;
    throw EmptyPair();
}

namespace
{

    bool match_segment(std::string_view pattern, std::string_view text)
    {
        if (pattern.empty())
            return text.empty();
        if (pattern.front() == '*')
        {
            for (std::size_t i = 0; i <= text.size(); ++i)
                if (match_segment(pattern.substr(1), text.substr(i)))
                    return true;
            return false;
        }
        if (text.empty())
            return false;
        if (pattern.front() == '?' || pattern.front() == text.front())
            return match_segment(pattern.substr(1), text.substr(1));
        return false;
    }

    std::vector<std::string_view> split_segments(std::string_view s)
    {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (true)
        {
            auto const slash = s.find('/', start);
            parts.push_back(s.substr(start, slash - start));
            if (slash == std::string_view::npos)
                break;
            start = slash + 1;
        }
        return parts;
    }

    bool match_parts(std::span<std::string_view const> pattern, std::span<std::string_view const> path)
    {
        if (pattern.empty())
            return path.empty();
        if (pattern.front() == "**")
        {
            for (std::size_t i = 0; i <= path.size(); ++i)
                if (match_parts(pattern.subspan(1), path.subspan(i)))
                    return true;
            return false;
        }
        if (path.empty() || !match_segment(pattern.front(), path.front()))
            return false;
        return match_parts(pattern.subspan(1), path.subspan(1));
    }

    bool matches_any(std::vector<std::string> const& globs, std::string_view path)
    {
        return std::ranges::any_of(globs, [&](std::string const& g) { return glob_match(g, path); });
    }

    constexpr std::array<std::string_view, 3> BoilerplateMarkers = {
        "License",
        "GNU General Public License",
        "\\*---",
    };

    bool is_boilerplate(std::string_view comment)
    {
        return std::ranges::any_of(BoilerplateMarkers,
                                   [&](std::string_view m) { return comment.find(m) != std::string_view::npos; });
    }

    bool is_space(char c)
    {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }

} // namespace

bool glob_match(std::string_view pattern, std::string_view path)
{
    auto const p = split_segments(pattern);
    auto const t = split_segments(path);
    return match_parts(p, t);
}

std::vector<CorpusEntry> scan_corpus(fs::path const& root, ScanOptions const& options)
{
    if (!fs::is_directory(root))
        throw RootMissing(root);

    // Keyed by directory + stem so pairing never crosses directories.
    std::map<std::string, fs::path> headers;
    std::map<std::string, fs::path> sources;
    std::vector<CorpusEntry> entries;
    for (auto const& item: fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied))
    {
        if (!item.is_regular_file())
            continue;
        auto const rel = fs::relative(item.path(), root);
        auto const relText = rel.generic_string();
        if (!matches_any(options.include_globs, relText) || matches_any(options.exclude_globs, relText))
            continue;

        auto const ext = rel.extension().string();
        auto const key = (rel.parent_path() / rel.stem()).generic_string();
        if (ext == ".H")
            headers.emplace(key, rel);
        else if (ext == ".C")
            sources.emplace(key, rel);
        else
            entries.push_back(CorpusEntry { std::nullopt, rel });
    }

    for (auto& [key, header]: headers)
    {
        auto partner = sources.find(key);
        if (partner == sources.end())
            entries.push_back(CorpusEntry { header, std::nullopt });
        else
        {
            entries.push_back(CorpusEntry { header, partner->second });
            sources.erase(partner);
        }
    }
    for (auto& [key, source]: sources)
        entries.push_back(CorpusEntry { std::nullopt, source });

    std::ranges::sort(entries, {}, [](CorpusEntry const& e) { return e.rel_path().generic_string(); });
    return entries;
}

std::string strip_boilerplate(std::string_view text)
{
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size())
    {
        auto const wsStart = pos;
        auto p = pos;
        while (p < text.size() && is_space(text[p]))
            ++p;

        if (text.substr(p).starts_with("/*"))
        {
            auto const close = text.find("*/", p + 2);
            if (close == std::string_view::npos)
                break;
            auto const end = close + 2;
            if (is_boilerplate(text.substr(p, end - p)))
            {
                pos = end;
                while (pos < text.size() && is_space(text[pos]))
                    ++pos;
            }
            else
            {
                out.append(text.substr(wsStart, end - wsStart));
                pos = end;
            }
        }
        else if (text.substr(p).starts_with("//"))
        {
            auto const nl = text.find('\n', p);
            auto const end = nl == std::string_view::npos ? text.size() : nl + 1;
            out.append(text.substr(wsStart, end - wsStart));
            pos = end;
        }
        else
            break;
    }
    out.append(text.substr(pos));
    return out;
}

std::string read_text_file(fs::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

SourceDoc prepare_document(fs::path const& root, CorpusEntry const& entry, std::size_t docId)
{
    if (!entry.header && !entry.source)
        throw EmptyPair();

    SourceDoc doc;
    doc.doc_id = docId;
    doc.rel_path = entry.rel_path().generic_string();
    doc.paired = entry.paired();
    doc.full_text = std::string(FileLinePrefix) + doc.rel_path + "\n";
    if (entry.header)
        doc.full_text += strip_boilerplate(read_text_file(root / *entry.header));
    if (entry.paired())
        doc.full_text += "\n";
    if (entry.source)
        doc.full_text += strip_boilerplate(read_text_file(root / *entry.source));
    return doc;
}

std::string_view truncate_for_embedding(std::string_view text, std::size_t maxTokens)
{
    if (estimate_tokens(text) <= maxTokens)
        return text;
    if (maxTokens == 0)
        return {};
    auto cut = maxTokens * 4;
    if (auto const nl = text.rfind('\n', cut - 1); nl != std::string_view::npos)
        return text.substr(0, nl + 1);
    // No line break to cut at: avoid splitting a UTF-8 sequence.
    while (cut > 1 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80)
        --cut;
    return text.substr(0, cut);
}

} // namespace foampilot
