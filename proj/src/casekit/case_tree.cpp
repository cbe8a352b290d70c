// SPDX-License-Identifier: Apache-2.0
#include <foampilot/agent/message.hpp>
#include <foampilot/agent/prompts.hpp>
#include <foampilot/casekit/case_tree.hpp>
#include <foampilot/index/corpus.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <set>

namespace foampilot
{

namespace
{

    constexpr std::size_t BinaryProbeBytes = 8000;

    std::vector<std::string_view> components(std::string_view relPath)
    {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (start <= relPath.size())
        {
            auto const slash = relPath.find('/', start);
            auto const end = slash == std::string_view::npos ? relPath.size() : slash;
            parts.push_back(relPath.substr(start, end - start));
            if (slash == std::string_view::npos)
                break;
            start = slash + 1;
        }
        return parts;
    }

    bool is_readme(std::string_view name)
    {
        std::string lower(name.substr(0, 6));
        std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
        return lower == "readme";
    }

    /// Files worth running through the dictionary parser.
    bool looks_like_dictionary(std::string_view relPath)
    {
        auto const parts = components(relPath);
        if (parts.size() < 2)
            return false;
        auto const top = parts.front();
        auto const name = parts.back();
        if (is_readme(name) || name.ends_with(".sh") || name.ends_with(".py") || name.starts_with("Allrun")
            || name.starts_with("Allclean"))
            return false;
        return top == "system" || top == "constant" || (!top.empty() && std::isdigit(static_cast<unsigned char>(top[0])));
    }

    std::size_t skip_spaces(std::string_view s, std::size_t pos)
    {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
        return pos;
    }

} // namespace

std::optional<std::string> skip_reason(std::string_view relPath, std::string_view head)
{
    auto const parts = components(relPath);
    auto const name = parts.back();
    bool const readme = is_readme(name);

    for (auto const part: parts)
        if (part == ".git" || part == ".svn" || part == ".hg")
            return "version control metadata";
    if (!readme)
    {
        if (parts.front().starts_with("processor"))
            return "decomposed processor directory";
        if (std::ranges::find(parts, std::string_view("polyMesh")) != parts.end())
            return "generated mesh";
        if (name.starts_with("log.") || name.ends_with(".log"))
            return "log file";
    }
    if (head.substr(0, BinaryProbeBytes).find('\0') != std::string_view::npos)
        return "binary file";
    return std::nullopt;
}

std::string normalize_text(std::string_view bytes)
{
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size())
    {
        auto const c = static_cast<unsigned char>(bytes[i]);
        if (c == '\r' && i + 1 < bytes.size() && bytes[i + 1] == '\n')
        {
            ++i;
            continue;
        }
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
        bool valid = len > 0 && i + len <= bytes.size();
        for (std::size_t k = 1; valid && k < len; ++k)
            valid = (static_cast<unsigned char>(bytes[i + k]) & 0xC0) == 0x80;
        if (valid)
        {
            out.append(bytes.substr(i, len));
            i += len;
        }
        else
        {
            out += "\xEF\xBF\xBD";
            ++i;
        }
    }
    return out;
}

std::string strip_foam_header(std::string_view text)
{
    auto s = strip_boilerplate(text);
    std::string_view view = s;
    auto pos = skip_spaces(view, 0);
    if (view.substr(pos).starts_with("FoamFile"))
    {
        auto const brace = skip_spaces(view, pos + 8);
        if (brace < view.size() && view[brace] == '{')
        {
            int depth = 0;
            std::size_t i = brace;
            for (; i < view.size(); ++i)
            {
                if (view[i] == '{')
                    ++depth;
                else if (view[i] == '}' && --depth == 0)
                    break;
            }
            if (i < view.size())
            {
                pos = skip_spaces(view, i + 1);
                if (view.substr(pos).starts_with("// *"))
                {
                    auto const nl = view.find('\n', pos);
                    pos = skip_spaces(view, nl == std::string_view::npos ? view.size() : nl);
                }
                return std::string(view.substr(pos));
            }
        }
    }
    return s;
}

CaseTree CaseTree::load(fs::path const& root)
{
    if (!fs::is_directory(root))
        throw RootMissing(root);

    CaseTree tree;
    tree.root = root;
    auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
    for (auto const& item: it)
    {
        auto const rel = fs::relative(item.path(), root).generic_string();
        if (item.is_directory())
        {
            // Never descend into VCS metadata or machine-generated trees.
            if (auto reason = skip_reason(rel + "/x", {}); reason && *reason != "log file")
            {
                it.disable_recursion_pending();
                tree.files.emplace(rel + "/", CaseFile { .parsed = {}, .raw = {}, .skipped = true, .skip_reason = reason });
            }
            continue;
        }
        if (!item.is_regular_file())
            continue;

        CaseFile file;
        auto const bytes = read_text_file(item.path());
        if (auto reason = skip_reason(rel, bytes))
        {
            file.skipped = true;
            file.skip_reason = std::move(reason);
            if (*file.skip_reason != "binary file")
                file.raw = normalize_text(bytes);
        }
        else
        {
            file.raw = normalize_text(bytes);
            if (looks_like_dictionary(rel))
            {
                try
                {
                    file.parsed = parse_dict(file.raw);
                }
                catch (ParseError const&)
                {
                }
            }
        }
        tree.files.emplace(rel, std::move(file));
    }
    return tree;
}

std::string snapshot_header(std::string_view relPath)
{
    return fmt::format("==== file: {} ====", relPath);
}

CaseSnapshot flatten_case(CaseTree const& tree)
{
    CaseSnapshot snapshot;
    for (auto const& [rel, file]: tree.files)
    {
        if (file.skipped)
            continue;
        snapshot.text += snapshot_header(rel) + "\n" + strip_foam_header(file.raw) + "\n";
        ++snapshot.file_count;
    }
    snapshot.token_estimate = estimate_tokens(snapshot.text);
    return snapshot;
}

CaseSnapshot flatten_case(fs::path const& root)
{
    return flatten_case(CaseTree::load(root));
}

std::string build_config_prompt(std::string const& casePath, std::string const& userRequest,
                                CaseSnapshot const& snapshot)
{
    return render_prompt_template(PromptTemplate::CaseConfig, {
                                                                  { "case_path", casePath },
                                                                  { "user_request", userRequest },
                                                                  { "case_contents", snapshot.text },
                                                              });
}

// ---------------------------------------------------------------------------
// Diff

namespace
{

    std::string child_path(std::string const& parent, std::string const& keyword)
    {
        return parent.empty() ? keyword : parent + "." + keyword;
    }

    bool has_dict_items(FoamList const& list)
    {
        return std::ranges::any_of(list.items, [](FoamNode const& n) { return n.is_dict(); });
    }

    std::vector<std::string> directive_lines(FoamDict const& dict)
    {
        std::vector<std::string> out;
        for (auto const& e: dict.entries)
            if (e.keyword.empty())
                out.push_back(serialize_value(e.value));
        return out;
    }

    void diff_node(std::string const& relPath, std::string const& path, FoamNode const& a, FoamNode const& b,
                   std::vector<CaseChange>& out)
    {
        if (a == b)
            return;
        auto const label = path.empty() ? std::optional<std::string>("(root)") : std::optional<std::string>(path);

        if (a.is_dict() && b.is_dict())
        {
            auto const& da = a.as_dict();
            auto const& db = b.as_dict();
            if (directive_lines(da) != directive_lines(db))
                out.push_back(CaseChange { relPath, child_path(path, "#directives"),
                                           fmt::format("{}", fmt::join(directive_lines(da), "\n")),
                                           fmt::format("{}", fmt::join(directive_lines(db), "\n")) });
            for (auto const& e: da.entries)
            {
                if (e.keyword.empty())
                    continue;
                if (auto const* other = db.find(e.keyword))
                    diff_node(relPath, child_path(path, e.keyword), e.value, *other, out);
                else
                    out.push_back(
                        CaseChange { relPath, child_path(path, e.keyword), serialize_value(e.value), std::nullopt });
            }
            for (auto const& e: db.entries)
                if (!e.keyword.empty() && da.find(e.keyword) == nullptr)
                    out.push_back(
                        CaseChange { relPath, child_path(path, e.keyword), std::nullopt, serialize_value(e.value) });
            return;
        }
        if (a.is_list() && b.is_list())
        {
            auto const& la = a.as_list();
            auto const& lb = b.as_list();
            if (la.bare == lb.bare && la.items.size() == lb.items.size() && (has_dict_items(la) || has_dict_items(lb)))
            {
                for (std::size_t i = 0; i < la.items.size(); ++i)
                    diff_node(relPath, fmt::format("{}[{}]", path, i), la.items[i], lb.items[i], out);
                return;
            }
        }
        out.push_back(CaseChange { relPath, label, serialize_value(a), serialize_value(b) });
    }

    std::vector<std::string> split_lines(std::string_view text)
    {
        std::vector<std::string> lines;
        std::size_t start = 0;
        while (start < text.size())
        {
            auto nl = text.find('\n', start);
            if (nl == std::string_view::npos)
                nl = text.size();
            lines.emplace_back(text.substr(start, nl - start));
            start = nl + 1;
        }
        return lines;
    }

    constexpr std::size_t MaxLcsCells = 4'000'000;

    void diff_lines(std::string const& relPath, std::string_view before, std::string_view after,
                    std::vector<CaseChange>& out)
    {
        auto const a = split_lines(before);
        auto const b = split_lines(after);
        std::size_t prefix = 0;
        while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
            ++prefix;
        std::size_t suffix = 0;
        while (suffix < a.size() - prefix && suffix < b.size() - prefix
               && a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
            ++suffix;

        auto const n = a.size() - prefix - suffix;
        auto const m = b.size() - prefix - suffix;
        auto removed = [&](std::size_t i) {
            out.push_back(CaseChange { relPath, std::nullopt, a[prefix + i], std::nullopt });
        };
        auto added = [&](std::size_t j) {
            out.push_back(CaseChange { relPath, std::nullopt, std::nullopt, b[prefix + j] });
        };

        if (n * m > MaxLcsCells)
        {
            for (std::size_t i = 0; i < n; ++i)
                removed(i);
            for (std::size_t j = 0; j < m; ++j)
                added(j);
            return;
        }

        // lcs[i][j]: LCS length of a[i..n) and b[j..m).
        std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
        for (std::size_t i = n; i-- > 0;)
            for (std::size_t j = m; j-- > 0;)
                lcs[i][j] = a[prefix + i] == b[prefix + j] ? lcs[i + 1][j + 1] + 1
                                                            : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < n || j < m)
        {
            if (i < n && j < m && a[prefix + i] == b[prefix + j])
            {
                ++i;
                ++j;
            }
            else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]))
                added(j++);
            else
                removed(i++);
        }
    }

} // namespace

std::vector<CaseChange> diff_dicts(std::string const& relPath, FoamNode const& before, FoamNode const& after)
{
    std::vector<CaseChange> out;
    diff_node(relPath, "", before, after, out);
    return out;
}

std::vector<CaseChange> diff_case(CaseTree const& before, CaseTree const& after)
{
    std::vector<CaseChange> out;
    std::set<std::string> paths;
    for (auto const& [rel, file]: before.files)
        if (!file.skipped)
            paths.insert(rel);
    for (auto const& [rel, file]: after.files)
        if (!file.skipped)
            paths.insert(rel);

    for (auto const& rel: paths)
    {
        auto const a = before.files.find(rel);
        auto const b = after.files.find(rel);
        bool const inA = a != before.files.end() && !a->second.skipped;
        bool const inB = b != after.files.end() && !b->second.skipped;
        if (!inA)
        {
            out.push_back(CaseChange { rel, std::nullopt, std::nullopt, b->second.raw });
            continue;
        }
        if (!inB)
        {
            out.push_back(CaseChange { rel, std::nullopt, a->second.raw, std::nullopt });
            continue;
        }
        auto const& fa = a->second;
        auto const& fb = b->second;
        if (fa.parsed && fb.parsed)
            diff_node(rel, "", *fa.parsed, *fb.parsed, out);
        else if (fa.raw != fb.raw)
            diff_lines(rel, fa.raw, fb.raw, out);
    }
    return out;
}

std::vector<std::string> changed_files(std::vector<CaseChange> const& changes)
{
    std::set<std::string> files;
    for (auto const& c: changes)
        files.insert(c.rel_path);
    return { files.begin(), files.end() };
}

std::string format_diff_report(std::vector<CaseChange> const& changes)
{
    auto const files = changed_files(changes);
    if (files.empty())
        return "No case files changed.\n";

    auto out = fmt::format("{} file{} changed:\n", files.size(), files.size() == 1 ? "" : "s");
    for (auto const& file: files)
    {
        out += fmt::format("  {}\n", file);
        for (auto const& c: changes)
        {
            if (c.rel_path != file)
                continue;
            auto const oldText = c.old_value.value_or("(absent)");
            auto const newText = c.new_value.value_or("(absent)");
            if (c.keypath)
                out += fmt::format("    {}: {} -> {}\n", *c.keypath, oldText, newText);
            else if (c.old_value && c.new_value)
                out += fmt::format("    - {}\n    + {}\n", oldText, newText);
            else if (c.old_value)
                out += c.old_value->find('\n') == std::string::npos ? fmt::format("    - {}\n", oldText)
                                                                    : std::string("    (file removed)\n");
            else
                out += newText.find('\n') == std::string::npos ? fmt::format("    + {}\n", newText)
                                                               : std::string("    (file added)\n");
        }
    }
    return out;
}

} // namespace foampilot
