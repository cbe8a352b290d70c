// SPDX-License-Identifier: Apache-2.0
#include <foampilot/casekit/foam_node.hpp>

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <sstream>

namespace foampilot
{

FoamNode const* FoamDict::find(std::string_view keyword) const
{
    for (auto const& e: entries)
        if (!e.keyword.empty() && e.keyword == keyword)
            return &e.value;
    return nullptr;
}

FoamNode* FoamDict::find(std::string_view keyword)
{
    return const_cast<FoamNode*>(std::as_const(*this).find(keyword));
}

double FoamScalar::as_number() const
{
    if (kind != Kind::Number)
        throw std::invalid_argument("not a number: " + text);
    return std::stod(text);
}

namespace
{

    bool parse_number(std::string_view token, double& out)
    {
        if (token.empty())
            return false;
        if (token.front() == '+')
            token.remove_prefix(1);
        auto const [end, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
        return ec == std::errc() && end == token.data() + token.size() && std::isfinite(out);
    }

    bool is_boolean_word(std::string_view w)
    {
        return w == "true" || w == "false" || w == "on" || w == "off" || w == "yes" || w == "no";
    }

} // namespace

FoamNode FoamNode::dict(std::vector<FoamEntry> entries)
{
    return FoamNode { FoamDict { std::move(entries) } };
}

FoamNode FoamNode::list(std::vector<FoamNode> items, bool bare)
{
    return FoamNode { FoamList { std::move(items), bare } };
}

FoamNode FoamNode::word(std::string text)
{
    return FoamNode { FoamScalar { FoamScalar::Kind::Word, std::move(text) } };
}

FoamNode FoamNode::string(std::string text)
{
    return FoamNode { FoamScalar { FoamScalar::Kind::String, std::move(text) } };
}

FoamNode FoamNode::number(double value)
{
    char buffer[64];
    auto const [end, ec] = std::to_chars(std::begin(buffer), std::end(buffer), value);
    std::string text(buffer, end);
    if (text.find_first_of(".eEn") == std::string::npos)
        text += ".0";
    return FoamNode { FoamScalar { FoamScalar::Kind::Number, std::move(text) } };
}

FoamNode FoamNode::integer(long long value)
{
    return FoamNode { FoamScalar { FoamScalar::Kind::Number, std::to_string(value) } };
}

FoamNode FoamNode::boolean(bool value)
{
    return FoamNode { FoamScalar { FoamScalar::Kind::Boolean, value ? "true" : "false" } };
}

FoamNode FoamNode::dimensions(std::array<int, 7> exponents)
{
    return FoamNode { FoamDimensions { exponents } };
}

FoamNode FoamNode::directive(std::string text)
{
    return FoamNode { FoamDirective { std::move(text) } };
}

FoamNode FoamNode::scalar(std::string token)
{
    double ignored = 0;
    auto kind = FoamScalar::Kind::Word;
    if (parse_number(token, ignored))
        kind = FoamScalar::Kind::Number;
    else if (is_boolean_word(token))
        kind = FoamScalar::Kind::Boolean;
    return FoamNode { FoamScalar { kind, std::move(token) } };
}

ParseError::ParseError(std::size_t line, std::size_t column, std::string expected):
    std::runtime_error(fmt::format("parse error at {}:{}: expected {}", line, column, expected)),
    _line(line),
    _column(column),
    _expected(std::move(expected))
{
}

// ---------------------------------------------------------------------------
// Parser

namespace
{

    bool is_space(char c)
    {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }

    class Parser
    {
    public:
        explicit Parser(std::string_view text): _text(text) {}

        FoamDict parse_file()
        {
            auto dict = parse_body(/*braced=*/false);
            return dict;
        }

    private:
        [[noreturn]] void fail(std::string expected) const
        {
            std::size_t line = 1;
            std::size_t column = 1;
            for (std::size_t i = 0; i < _pos && i < _text.size(); ++i)
            {
                if (_text[i] == '\n')
                {
                    ++line;
                    column = 1;
                }
                else
                    ++column;
            }
            throw ParseError(line, column, std::move(expected));
        }

        [[nodiscard]] bool eof() const { return _pos >= _text.size(); }
        [[nodiscard]] char peek(std::size_t ahead = 0) const
        {
            return _pos + ahead < _text.size() ? _text[_pos + ahead] : '\0';
        }

        void skip_trivia()
        {
            while (!eof())
            {
                if (is_space(peek()))
                    ++_pos;
                else if (peek() == '/' && peek(1) == '/')
                {
                    auto const nl = _text.find('\n', _pos);
                    _pos = nl == std::string_view::npos ? _text.size() : nl + 1;
                }
                else if (peek() == '/' && peek(1) == '*')
                {
                    auto const close = _text.find("*/", _pos + 2);
                    if (close == std::string_view::npos)
                        fail("end of block comment");
                    _pos = close + 2;
                }
                else
                    break;
            }
        }

        /// A word token. Parentheses belong to the word while balanced, as in
        /// `div(phi,U)`; a numeric prefix stops before '(' so `3(1 2 3)` is a
        /// count followed by a list.
        std::string read_word()
        {
            auto const start = _pos;
            int depth = 0;
            while (!eof())
            {
                char const c = peek();
                if (is_space(c) || c == ';' || c == '{' || c == '}' || c == '"' || c == '[' || c == ']')
                    break;
                if (c == '/' && (peek(1) == '/' || peek(1) == '*'))
                    break;
                if (c == '(')
                {
                    double ignored = 0;
                    if (_pos == start || parse_number(_text.substr(start, _pos - start), ignored))
                        break;
                    ++depth;
                }
                else if (c == ')')
                {
                    if (depth == 0)
                        break;
                    --depth;
                }
                ++_pos;
            }
            return std::string(_text.substr(start, _pos - start));
        }

        std::string read_string()
        {
            auto const start = ++_pos;
            while (!eof() && peek() != '"')
            {
                if (peek() == '\\')
                    ++_pos;
                ++_pos;
            }
            if (eof())
                fail("closing '\"'");
            auto text = std::string(_text.substr(start, _pos - start));
            ++_pos;
            return text;
        }

        std::string read_line()
        {
            auto const start = _pos;
            auto nl = _text.find('\n', _pos);
            if (nl == std::string_view::npos)
                nl = _text.size();
            _pos = nl;
            auto line = _text.substr(start, nl - start);
            while (!line.empty() && is_space(line.back()))
                line.remove_suffix(1);
            return std::string(line);
        }

        FoamDict parse_body(bool braced)
        {
            FoamDict dict;
            while (true)
            {
                skip_trivia();
                if (eof())
                {
                    if (braced)
                        fail("'}'");
                    return dict;
                }
                char const c = peek();
                if (c == '}')
                {
                    if (!braced)
                        fail("keyword (unbalanced '}')");
                    ++_pos;
                    return dict;
                }
                if (c == ';')
                {
                    ++_pos;
                    continue;
                }
                if (c == '#' && peek(1) != '{')
                {
                    dict.entries.push_back(FoamEntry { {}, FoamNode::directive(read_line()) });
                    continue;
                }

                std::string keyword;
                if (c == '"')
                    keyword = "\"" + read_string() + "\"";
                else if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{')
                    fail("keyword");
                else
                    keyword = read_word();
                if (keyword.empty())
                    fail("keyword");

                skip_trivia();
                if (keyword.front() == '$' && peek() == ';')
                {
                    ++_pos;
                    dict.entries.push_back(FoamEntry { {}, FoamNode::directive(std::move(keyword)) });
                    continue;
                }
                if (peek() == '{')
                {
                    ++_pos;
                    dict.entries.push_back(FoamEntry { std::move(keyword), FoamNode { parse_body(true) } });
                    continue;
                }

                std::vector<FoamNode> values;
                while (true)
                {
                    skip_trivia();
                    if (eof() || peek() == '}' || peek() == ')')
                        fail("';'");
                    if (peek() == ';')
                    {
                        ++_pos;
                        break;
                    }
                    values.push_back(parse_value());
                }
                if (values.size() == 1)
                    dict.entries.push_back(FoamEntry { std::move(keyword), std::move(values.front()) });
                else
                    dict.entries.push_back(FoamEntry { std::move(keyword), FoamNode::list(std::move(values), true) });
            }
        }

        FoamNode parse_dimensions()
        {
            auto const close = _text.find(']', _pos);
            if (close == std::string_view::npos)
                fail("']'");
            std::istringstream in(std::string(_text.substr(_pos + 1, close - _pos - 1)));
            std::vector<int> exps;
            std::string token;
            while (in >> token)
            {
                int value = 0;
                auto const [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
                if (ec != std::errc() || end != token.data() + token.size())
                    fail("integer dimension exponent");
                exps.push_back(value);
            }
            // Older files omit the last two exponents.
            if (exps.size() == 5)
                exps.resize(7, 0);
            if (exps.size() != 7)
                fail("7 dimension exponents");
            _pos = close + 1;
            std::array<int, 7> out {};
            std::copy(exps.begin(), exps.end(), out.begin());
            return FoamNode::dimensions(out);
        }

        FoamNode parse_value()
        {
            char const c = peek();
            if (c == '(')
            {
                ++_pos;
                std::vector<FoamNode> items;
                while (true)
                {
                    skip_trivia();
                    if (eof())
                        fail("')'");
                    if (peek() == ')')
                    {
                        ++_pos;
                        break;
                    }
                    if (peek() == ';' || peek() == '}')
                        fail("')'");
                    items.push_back(parse_value());
                }
                return FoamNode::list(std::move(items));
            }
            if (c == '{')
            {
                ++_pos;
                return FoamNode { parse_body(true) };
            }
            if (c == '[')
                return parse_dimensions();
            if (c == '"')
                return FoamNode::string(read_string());
            if (c == '#' && peek(1) == '{')
            {
                auto const close = _text.find("#}", _pos + 2);
                if (close == std::string_view::npos)
                    fail("'#}'");
                auto text = std::string(_text.substr(_pos, close + 2 - _pos));
                _pos = close + 2;
                return FoamNode::directive(std::move(text));
            }
            if (c == ')' || c == ']' || c == '}' || c == ';')
                fail("value");

            auto token = read_word();
            if (token.empty())
                fail("value");
            if (token.front() == '#' || token.front() == '$')
                return FoamNode::directive(std::move(token));
            return FoamNode::scalar(std::move(token));
        }

        std::string_view _text;
        std::size_t _pos = 0;
    };

} // namespace

FoamNode parse_dict(std::string_view text)
{
    return FoamNode { Parser(text).parse_file() };
}

// ---------------------------------------------------------------------------
// Serializer

namespace
{

    constexpr std::size_t InlineListWidth = 80;

    std::string indent(int level)
    {
        return std::string(static_cast<std::size_t>(level) * 4, ' ');
    }

    std::string render(FoamNode const& node, int level);

    void render_body(FoamDict const& dict, int level, std::string& out)
    {
        auto const pad = indent(level);
        for (auto const& entry: dict.entries)
        {
            if (entry.keyword.empty())
            {
                auto const& text = std::holds_alternative<FoamDirective>(entry.value.value)
                                       ? std::get<FoamDirective>(entry.value.value).text
                                       : render(entry.value, level);
                out += pad + text + (text.starts_with("#") ? "\n" : ";\n");
                continue;
            }
            if (entry.value.is_dict())
            {
                out += pad + entry.keyword + "\n" + pad + "{\n";
                render_body(entry.value.as_dict(), level + 1, out);
                out += pad + "}\n";
                continue;
            }
            auto const value = render(entry.value, level);
            if (value.empty())
                out += pad + entry.keyword + " ;\n";
            else if (value.front() == '(' && value.find('\n') != std::string::npos)
                out += pad + entry.keyword + "\n" + pad + value + ";\n";
            else
                out += pad + entry.keyword + " " + value + ";\n";
        }
    }

    std::string render(FoamNode const& node, int level)
    {
        return std::visit(
            [&](auto const& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, FoamScalar>)
                    return v.kind == FoamScalar::Kind::String ? "\"" + v.text + "\"" : v.text;
                else if constexpr (std::is_same_v<T, FoamDimensions>)
                    return fmt::format("[{}]", fmt::join(v.exponents, " "));
                else if constexpr (std::is_same_v<T, FoamDirective>)
                    return v.text;
                else if constexpr (std::is_same_v<T, FoamDict>)
                {
                    std::string out = "{\n";
                    render_body(v, level + 1, out);
                    return out + indent(level) + "}";
                }
                else
                {
                    if (v.bare)
                    {
                        std::string out;
                        for (auto const& item: v.items)
                        {
                            if (!out.empty())
                                out += ' ';
                            out += render(item, level);
                        }
                        return out;
                    }
                    std::vector<std::string> items;
                    bool multiline = false;
                    std::size_t width = 2;
                    for (auto const& item: v.items)
                    {
                        items.push_back(render(item, level + 1));
                        multiline = multiline || items.back().find('\n') != std::string::npos;
                        width += items.back().size() + 1;
                    }
                    if (!multiline && width <= InlineListWidth)
                        return fmt::format("({})", fmt::join(items, " "));
                    std::string out = "(\n";
                    for (auto const& item: items)
                        out += indent(level + 1) + item + "\n";
                    return out + indent(level) + ")";
                }
            },
            node.value);
    }

} // namespace

std::string serialize_dict(FoamNode const& node)
{
    if (!node.is_dict())
        return render(node, 0) + "\n";
    std::string out;
    render_body(node.as_dict(), 0, out);
    return out;
}

std::string serialize_value(FoamNode const& node)
{
    return render(node, 0);
}

// ---------------------------------------------------------------------------
// Keypaths

PathNotFound::PathNotFound(std::string keypath, std::string matchedPrefix):
    std::runtime_error(fmt::format("path not found: {} (matched up to '{}')", keypath, matchedPrefix)),
    _prefix(std::move(matchedPrefix))
{
}

IndexOutOfRange::IndexOutOfRange(std::string keypath, std::size_t index, std::size_t size):
    std::out_of_range(fmt::format("index {} out of range (size {}) in {}", index, size, keypath))
{
}

namespace
{

    struct PathStep
    {
        std::optional<std::string> keyword;
        std::size_t index = 0;
        std::string spelled;
    };

    std::vector<PathStep> parse_keypath(std::string_view keypath)
    {
        std::vector<PathStep> steps;
        std::size_t i = 0;
        auto bad = [&] { throw std::invalid_argument("malformed keypath: " + std::string(keypath)); };
        while (i < keypath.size())
        {
            if (keypath[i] == '[')
            {
                auto const close = keypath.find(']', i);
                if (close == std::string_view::npos)
                    bad();
                std::size_t index = 0;
                auto const digits = keypath.substr(i + 1, close - i - 1);
                auto const [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
                if (ec != std::errc() || end != digits.data() + digits.size())
                    bad();
                steps.push_back(PathStep { std::nullopt, index, std::string(keypath.substr(i, close + 1 - i)) });
                i = close + 1;
            }
            else if (keypath[i] == '.')
            {
                if (steps.empty() || i + 1 >= keypath.size() || keypath[i + 1] == '.' || keypath[i + 1] == '[')
                    bad();
                ++i;
            }
            else
            {
                auto start = i;
                if (keypath[i] == '"')
                {
                    auto const close = keypath.find('"', i + 1);
                    if (close == std::string_view::npos)
                        bad();
                    i = close + 1;
                }
                else
                {
                    int depth = 0;
                    while (i < keypath.size() && (depth > 0 || (keypath[i] != '.' && keypath[i] != '[')))
                    {
                        if (keypath[i] == '(')
                            ++depth;
                        else if (keypath[i] == ')')
                            --depth;
                        ++i;
                    }
                }
                auto key = std::string(keypath.substr(start, i - start));
                steps.push_back(PathStep { key, 0, key });
            }
        }
        if (steps.empty())
            bad();
        return steps;
    }

    std::string join_prefix(std::vector<PathStep> const& steps, std::size_t count)
    {
        std::string out;
        for (std::size_t i = 0; i < count; ++i)
        {
            if (steps[i].keyword && !out.empty())
                out += '.';
            out += steps[i].spelled;
        }
        return out;
    }

    FoamNode* step_into(FoamNode& node, std::vector<PathStep> const& steps, std::size_t i, std::string_view keypath)
    {
        auto const& step = steps[i];
        if (step.keyword)
        {
            if (!node.is_dict())
                throw PathNotFound(std::string(keypath), join_prefix(steps, i));
            auto* child = node.as_dict().find(*step.keyword);
            if (child == nullptr)
                throw PathNotFound(std::string(keypath), join_prefix(steps, i));
            return child;
        }
        if (!node.is_list())
            throw PathNotFound(std::string(keypath), join_prefix(steps, i));
        auto& items = node.as_list().items;
        if (step.index >= items.size())
            throw IndexOutOfRange(std::string(keypath), step.index, items.size());
        return &items[step.index];
    }

} // namespace

FoamNode const& get_entry(FoamNode const& root, std::string_view keypath)
{
    auto const steps = parse_keypath(keypath);
    auto* node = const_cast<FoamNode*>(&root);
    for (std::size_t i = 0; i < steps.size(); ++i)
        node = step_into(*node, steps, i, keypath);
    return *node;
}

FoamNode set_entry(FoamNode const& root, std::string_view keypath, FoamNode value)
{
    auto const steps = parse_keypath(keypath);
    FoamNode copy = root;
    FoamNode* node = &copy;
    for (std::size_t i = 0; i + 1 < steps.size(); ++i)
        node = step_into(*node, steps, i, keypath);

    auto const& last = steps.back();
    if (last.keyword && node->is_dict() && node->as_dict().find(*last.keyword) == nullptr)
    {
        node->as_dict().entries.push_back(FoamEntry { *last.keyword, std::move(value) });
        return copy;
    }
    *step_into(*node, steps, steps.size() - 1, keypath) = std::move(value);
    return copy;
}

} // namespace foampilot
