// SPDX-License-Identifier: Apache-2.0
#include <foampilot/tools/approval.hpp>

#include <algorithm>

namespace foampilot
{

std::string_view to_string(ApprovalMode mode) noexcept
{
    switch (mode)
    {
        case ApprovalMode::Interactive: return "interactive";
        case ApprovalMode::Allowlist: return "allowlist";
        case ApprovalMode::AutoApprove: return "auto";
    }
    return "interactive";
}

ApprovalMode parse_approval_mode(std::string_view text)
{
    if (text == "interactive")
        return ApprovalMode::Interactive;
    if (text == "allowlist")
        return ApprovalMode::Allowlist;
    if (text == "auto" || text == "autoapprove")
        return ApprovalMode::AutoApprove;
    throw std::invalid_argument("unknown approval mode: " + std::string(text));
}

ApprovalGate::ApprovalGate(ApprovalMode mode, Approver approver, std::vector<std::string> const& allowlist):
    _mode(mode), _approver(std::move(approver))
{
    for (auto const& pattern: allowlist)
        _allowlist.emplace_back(pattern, std::regex::ECMAScript);
}

bool ApprovalGate::allowlisted(std::string_view input) const
{
    // A pattern vets one command; chained or redirected commands always ask.
    constexpr std::string_view ControlChars = ";&|`$<>\n\r";
    if (input.find_first_of(ControlChars) != std::string_view::npos)
        return false;
    return std::ranges::any_of(_allowlist, [&](std::regex const& re) {
        return std::regex_match(input.begin(), input.end(), re);
    });
}

bool ApprovalGate::approve(ApprovalRequest const& request) const
{
    if (_mode == ApprovalMode::AutoApprove)
        return true;
    if (_mode == ApprovalMode::Allowlist && allowlisted(request.rendered_input))
        return true;
    if (!_approver)
        return false;
    switch (_approver(request))
    {
        case ApprovalDecision::Approve: return true;
        case ApprovalDecision::Deny: return false;
        case ApprovalDecision::Abort: throw ApprovalChannelClosed();
    }
    return false;
}

} // namespace foampilot
