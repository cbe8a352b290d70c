// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace foampilot
{

struct FoamNode;
struct FoamEntry;

/// Keyword-ordered dictionary. Directive lines such as `#include "x"` and bare
/// `$macro;` lines are entries with an empty keyword.
struct FoamDict
{
    std::vector<FoamEntry> entries;

    [[nodiscard]] FoamNode const* find(std::string_view keyword) const;
    [[nodiscard]] FoamNode* find(std::string_view keyword);
    bool operator==(FoamDict const&) const = default;
};

/// `( ... )`. A bare list is the value of an entry written as several
/// space-separated tokens (`box (a) (b);`) and is serialized without parens.
struct FoamList
{
    std::vector<FoamNode> items;
    bool bare = false;

    bool operator==(FoamList const&) const = default;
};

struct FoamScalar
{
    enum class Kind
    {
        Number,
        Word,
        String,
        Boolean,
    };

    Kind kind = Kind::Word;
    /// Source spelling; quotes are not included for strings.
    std::string text;

    [[nodiscard]] double as_number() const;
    bool operator==(FoamScalar const&) const = default;
};

/// SI exponents: mass, length, time, temperature, moles, current, luminosity.
struct FoamDimensions
{
    std::array<int, 7> exponents {};
    bool operator==(FoamDimensions const&) const = default;
};

/// Kept verbatim, never expanded: `#include ...`, `$var`, `#calc`, `#{ ... #}`.
struct FoamDirective
{
    std::string text;
    bool operator==(FoamDirective const&) const = default;
};

struct FoamNode
{
    using Value = std::variant<FoamDict, FoamList, FoamScalar, FoamDimensions, FoamDirective>;
    Value value;

    static FoamNode dict(std::vector<FoamEntry> entries = {});
    static FoamNode list(std::vector<FoamNode> items, bool bare = false);
    static FoamNode word(std::string text);
    static FoamNode string(std::string text);
    static FoamNode number(double value);
    static FoamNode integer(long long value);
    static FoamNode boolean(bool value);
    static FoamNode dimensions(std::array<int, 7> exponents);
    static FoamNode directive(std::string text);
    /// Numbers, booleans and words classified from a raw token.
    static FoamNode scalar(std::string token);

    [[nodiscard]] bool is_dict() const noexcept { return std::holds_alternative<FoamDict>(value); }
    [[nodiscard]] bool is_list() const noexcept { return std::holds_alternative<FoamList>(value); }
    [[nodiscard]] bool is_scalar() const noexcept { return std::holds_alternative<FoamScalar>(value); }

    [[nodiscard]] FoamDict const& as_dict() const { return std::get<FoamDict>(value); }
    [[nodiscard]] FoamDict& as_dict() { return std::get<FoamDict>(value); }
    [[nodiscard]] FoamList const& as_list() const { return std::get<FoamList>(value); }
    [[nodiscard]] FoamList& as_list() { return std::get<FoamList>(value); }
    [[nodiscard]] FoamScalar const& as_scalar() const { return std::get<FoamScalar>(value); }

    bool operator==(FoamNode const&) const = default;
};

struct FoamEntry
{
    std::string keyword;
    FoamNode value;

    bool operator==(FoamEntry const&) const = default;
};

class ParseError: public std::runtime_error
{
public:
    ParseError(std::size_t line, std::size_t column, std::string expected);

    [[nodiscard]] std::size_t line() const noexcept { return _line; }
    [[nodiscard]] std::size_t column() const noexcept { return _column; }
    [[nodiscard]] std::string const& expected() const noexcept { return _expected; }

private:
    std::size_t _line;
    std::size_t _column;
    std::string _expected;
};

/// Parses a dictionary file into a top-level Dict. Comments are dropped.
[[nodiscard]] FoamNode parse_dict(std::string_view text);

/// Canonical text: 4-space indents, one entry per line, lists inline up to 80
/// characters. Reparses to an equal node.
[[nodiscard]] std::string serialize_dict(FoamNode const& node);

/// A single value as it would appear after a keyword.
[[nodiscard]] std::string serialize_value(FoamNode const& node);

class PathNotFound: public std::runtime_error
{
public:
    PathNotFound(std::string keypath, std::string matchedPrefix);
    [[nodiscard]] std::string const& matched_prefix() const noexcept { return _prefix; }

private:
    std::string _prefix;
};

class IndexOutOfRange: public std::out_of_range
{
public:
    IndexOutOfRange(std::string keypath, std::size_t index, std::size_t size);
};

/// Keypaths are dot-separated keywords with optional [i] list indices, e.g.
/// "actions[0].sourceInfo.box". Quoted keywords are written with their quotes.
[[nodiscard]] FoamNode const& get_entry(FoamNode const& root, std::string_view keypath);

/// Copy of `root` with the addressed node replaced. A missing final keyword in
/// an existing dictionary is appended.
[[nodiscard]] FoamNode set_entry(FoamNode const& root, std::string_view keypath, FoamNode value);

} // namespace foampilot
