// SPDX-License-Identifier: Apache-2.0
#include <foampilot/tools/truncate.hpp>

#include <fmt/format.h>

#include <cctype>

namespace foampilot
{

namespace
{

    constexpr std::string_view MarkerOpen = "\n…[";
    constexpr std::string_view MarkerClose = " chars elided]…\n";

    /// Length of a well-formed marker at the start of `text`, or 0.
    std::size_t marker_length(std::string_view text)
    {
        if (!text.starts_with(MarkerOpen))
            return 0;
        auto i = MarkerOpen.size();
        auto const digits = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            ++i;
        if (i == digits || !text.substr(i).starts_with(MarkerClose))
            return 0;
        return i + MarkerClose.size();
    }

} // namespace

std::string elision_marker(std::size_t elided)
{
    return fmt::format("{}{}{}", MarkerOpen, elided, MarkerClose);
}

std::pair<std::string, bool> truncate_output(std::string_view text, std::size_t headLimit, std::size_t tailLimit)
{
    if (text.size() <= headLimit + tailLimit)
        return { std::string(text), false };

    if (auto const m = marker_length(text.substr(headLimit)); m > 0 && text.size() == headLimit + m + tailLimit)
        return { std::string(text), true };

    auto const elided = text.size() - headLimit - tailLimit;
    std::string out;
    out.reserve(headLimit + tailLimit + 32);
    out.append(text.substr(0, headLimit));
    out.append(elision_marker(elided));
    out.append(text.substr(text.size() - tailLimit));
    return { std::move(out), true };
}

} // namespace foampilot
