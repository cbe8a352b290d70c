// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foampilot
{

enum class ApprovalMode
{
    Interactive,
    Allowlist,
    AutoApprove,
};

[[nodiscard]] std::string_view to_string(ApprovalMode mode) noexcept;
/// Accepts "interactive", "allowlist", "auto".
[[nodiscard]] ApprovalMode parse_approval_mode(std::string_view text);

enum class ApprovalDecision
{
    Approve,
    Deny,
    Abort,
};

struct ApprovalRequest
{
    std::string approval_id;
    std::string tool;
    std::string rendered_input;
};

using Approver = std::function<ApprovalDecision(ApprovalRequest const&)>;

/// The human went away (closed terminal, aborted session). Ends the session.
class ApprovalChannelClosed: public std::runtime_error
{
public:
    ApprovalChannelClosed(): std::runtime_error("approval channel closed") {}
};

inline constexpr std::string_view DeniedObservation = "Command denied by user.";

class ApprovalGate
{
public:
    ApprovalGate(ApprovalMode mode, Approver approver, std::vector<std::string> const& allowlist = {});

    /// True when the request may run. Throws ApprovalChannelClosed on abort.
    [[nodiscard]] bool approve(ApprovalRequest const& request) const;

    /// Allowlist check alone: full regex match and no shell control operators.
    [[nodiscard]] bool allowlisted(std::string_view input) const;

    [[nodiscard]] ApprovalMode mode() const noexcept { return _mode; }

private:
    ApprovalMode _mode;
    Approver _approver;
    std::vector<std::regex> _allowlist;
};

} // namespace foampilot
