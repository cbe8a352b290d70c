// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace foampilot
{

struct OutputLimits
{
    std::size_t head = 2048;
    std::size_t tail = 6144;
};

inline constexpr OutputLimits ShellOutputLimits { 2048, 6144 };
inline constexpr OutputLimits RetrievalOutputLimits { 65536, 0 };

/// Keeps the first `head` and last `tail` bytes around an elision marker.
/// Text that already carries a marker at exactly those limits is returned
/// unchanged, so applying it twice is the same as applying it once.
[[nodiscard]] std::pair<std::string, bool> truncate_output(std::string_view text, std::size_t headLimit,
                                                           std::size_t tailLimit);

[[nodiscard]] std::string elision_marker(std::size_t elided);

} // namespace foampilot
