// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/casekit/foam_node.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foampilot
{

namespace fs = std::filesystem;

struct CaseFile
{
    std::optional<FoamNode> parsed;
    /// UTF-8 text with "\n" line endings; empty for skipped binaries.
    std::string raw;
    bool skipped = false;
    std::optional<std::string> skip_reason;
};

struct CaseTree
{
    fs::path root;
    std::map<std::string, CaseFile> files;

    /// Walks `root`, classifying and (for dictionary files) parsing every file.
    /// Throws RootMissing.
    static CaseTree load(fs::path const& root);
};

/// Why a case file is left out of snapshots, or nothing if it is included.
/// `head` is the start of the file content, used for binary detection.
[[nodiscard]] std::optional<std::string> skip_reason(std::string_view relPath, std::string_view head);

/// Replaces invalid UTF-8 with U+FFFD and CRLF with LF.
[[nodiscard]] std::string normalize_text(std::string_view bytes);

/// Drops leading banner comments, the FoamFile header block and the
/// `// * * *` rule that usually follows it.
[[nodiscard]] std::string strip_foam_header(std::string_view text);

struct CaseSnapshot
{
    std::string text;
    std::size_t file_count = 0;
    std::size_t token_estimate = 0;
};

/// Delimiter line introducing each file in a snapshot.
[[nodiscard]] std::string snapshot_header(std::string_view relPath);

[[nodiscard]] CaseSnapshot flatten_case(fs::path const& root);
[[nodiscard]] CaseSnapshot flatten_case(CaseTree const& tree);

[[nodiscard]] std::string build_config_prompt(std::string const& casePath, std::string const& userRequest,
                                              CaseSnapshot const& snapshot);

struct CaseChange
{
    std::string rel_path;
    /// Set for structural changes inside a parsed dictionary.
    std::optional<std::string> keypath;
    std::optional<std::string> old_value;
    std::optional<std::string> new_value;

    bool operator==(CaseChange const&) const = default;
};

[[nodiscard]] std::vector<CaseChange> diff_case(CaseTree const& before, CaseTree const& after);

/// Structural differences between two dictionaries, keyed by keypath.
[[nodiscard]] std::vector<CaseChange> diff_dicts(std::string const& relPath, FoamNode const& before,
                                                 FoamNode const& after);

/// Sorted, de-duplicated list of files touched by `changes`.
[[nodiscard]] std::vector<std::string> changed_files(std::vector<CaseChange> const& changes);

[[nodiscard]] std::string format_diff_report(std::vector<CaseChange> const& changes);

} // namespace foampilot
