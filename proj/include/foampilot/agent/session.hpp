// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/agent/action.hpp>
#include <foampilot/agent/message.hpp>
#include <foampilot/llm/provider.hpp>
#include <foampilot/tools/toolbelt.hpp>

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace foampilot
{

struct SessionPolicy
{
    int max_loops = 25;
    int max_parse_retries = 3;
    std::size_t context_window = 128000;
    double budget_fraction = 0.8;
    ApprovalMode approval_mode = ApprovalMode::Interactive;
    /// Regexes auto-approved in Allowlist mode.
    std::vector<std::string> allowlist;

    void validate() const;
    /// Transcript size (in estimated tokens) above which the session stops.
    [[nodiscard]] std::size_t budget_tokens() const noexcept;
};

enum class LoopStatus
{
    Completed,
    GaveUp,
    MaxLoopsReached,
    BudgetExceeded,
    UserAborted,
};

[[nodiscard]] std::string_view to_string(LoopStatus status) noexcept;

struct LoopOutcome
{
    LoopStatus status = LoopStatus::GaveUp;
    /// The final answer when Completed, a progress summary otherwise.
    std::string final_text;
    int loop_count = 0;
    Transcript transcript;
};

struct SessionEvent
{
    enum class Kind
    {
        MessageAppended,
        ToolRequested,
        ToolResult,
        StatusChanged,
    };

    Kind kind;
    std::optional<Message> message;
    std::string approval_id;
    std::string tool;
    std::string input;
    std::optional<foampilot::ToolResult> result;
    /// "running" while the loop is active, then the final LoopStatus name.
    std::string status;
};

using EventSink = std::function<void(SessionEvent const&)>;

inline constexpr std::string_view MalformedActionObservation =
    "Invalid action format. Respond with one JSON blob containing keys action and action_input.";

/// Observation text for a tool result as the model will see it.
[[nodiscard]] std::string format_observation(ToolResult const& result);

/// One summarization call over the newest part of the transcript that fits
/// `budgetTokens`. Provider failures fall back to fallback_summary().
[[nodiscard]] std::string summarize_transcript(Transcript const& transcript, ChatProvider& llm,
                                               std::size_t budgetTokens);

/// Deterministic summary built from role counts and the last observation.
[[nodiscard]] std::string fallback_summary(Transcript const& transcript);

/// The messages summarize_transcript() would send.
[[nodiscard]] std::vector<Message> summary_request(Transcript const& transcript, std::size_t budgetTokens);

/// A conversation with the model. run() may be called repeatedly; each call
/// appends a user turn and drives the tool loop until it terminates.
class AgentSession
{
public:
    AgentSession(ChatProvider& llm, ToolRegistry const& tools, SessionPolicy policy, Approver approver = {},
                 EventSink sink = {});

    LoopOutcome run(std::string userPrompt);

    /// Makes the loop stop with UserAborted at its next step. Thread-safe.
    void request_abort() noexcept { _abort = true; }

    [[nodiscard]] std::optional<Transcript> const& transcript() const noexcept { return _transcript; }

private:
    void append(Message message);
    void emit(SessionEvent event) const;
    LoopOutcome finish(LoopStatus status, std::string finalText);

    ChatProvider& _llm;
    ToolRegistry const& _tools;
    SessionPolicy _policy;
    ApprovalGate _gate;
    EventSink _sink;
    std::optional<Transcript> _transcript;
    std::atomic<bool> _abort = false;
    std::size_t _nextApproval = 1;
};

LoopOutcome run_session(std::string initialUserPrompt, ChatProvider& llm, ToolRegistry const& tools,
                        SessionPolicy const& policy, Approver approver = {}, EventSink sink = {});

} // namespace foampilot
