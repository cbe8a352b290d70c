// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foampilot
{

namespace fs = std::filesystem;

class RootMissing: public std::runtime_error
{
public:
    explicit RootMissing(fs::path const& root);
};

class EmptyPair: public std::invalid_argument
{
public:
    EmptyPair(): std::invalid_argument("corpus entry has neither header nor source") {}
};

/// A header/source pair or a singleton. Paths are relative to the corpus root.
struct CorpusEntry
{
    std::optional<fs::path> header;
    std::optional<fs::path> source;

    /// The header's path for pairs, otherwise whichever file is present.
    [[nodiscard]] fs::path const& rel_path() const;
    [[nodiscard]] bool paired() const noexcept { return header && source; }
};

struct ScanOptions
{
    std::vector<std::string> include_globs { "**/*.H", "**/*.C" };
    std::vector<std::string> exclude_globs { "**/lnInclude/**", "**/Make/**" };
};

/// Glob match on '/'-separated relative paths: `*` and `?` stay within one
/// segment, `**` spans any number of segments (including none).
[[nodiscard]] bool glob_match(std::string_view pattern, std::string_view path);

/// Pairs X.H with a same-directory X.C; everything else is a singleton.
/// Result is ordered by rel_path.
[[nodiscard]] std::vector<CorpusEntry> scan_corpus(fs::path const& root, ScanOptions const& options = {});

/// Drops leading block comments that carry licence text or the OpenFOAM banner
/// rule; any other comment, and everything from the first code token on, is
/// kept verbatim.
[[nodiscard]] std::string strip_boilerplate(std::string_view text);

struct SourceDoc
{
    std::size_t doc_id = 0;
    std::string rel_path;
    std::string full_text;
    bool paired = false;

    bool operator==(SourceDoc const&) const = default;
};

inline constexpr std::string_view FileLinePrefix = "// File: ";

/// "// File: {rel_path}\n" followed by the stripped header, then the stripped
/// source. Throws EmptyPair.
[[nodiscard]] SourceDoc prepare_document(fs::path const& root, CorpusEntry const& entry, std::size_t docId);

/// Longest prefix whose token estimate fits `maxTokens`, cut after a newline
/// when one is available.
[[nodiscard]] std::string_view truncate_for_embedding(std::string_view text, std::size_t maxTokens);

[[nodiscard]] std::string read_text_file(fs::path const& path);

} // namespace foampilot
