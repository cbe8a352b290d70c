// SPDX-License-Identifier: Apache-2.0
#include <foampilot/agent/prompts.hpp>
#include <foampilot/agent/session.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace foampilot
{

namespace
{

    constexpr std::string_view SummaryInstruction =
        "You are reviewing an unfinished session between a fire scientist and an assistant that uses tools. "
        "Summarize, for the scientist, what was requested, what has been done so far including tool results, "
        "what remains to be done, and any errors encountered. Be concise.";

    constexpr std::string_view SummaryCue = "Write the progress summary now.";

    constexpr std::size_t ExcerptBytes = 400;

    std::string tail_bytes(std::string_view text, std::size_t n)
    {
        return std::string(text.size() <= n ? text : text.substr(text.size() - n));
    }

} // namespace

void SessionPolicy::validate() const
{
    if (max_loops < 1)
        throw std::invalid_argument("max_loops must be >= 1");
    if (max_parse_retries < 1)
        throw std::invalid_argument("max_parse_retries must be >= 1");
    if (context_window < 1024)
        throw std::invalid_argument("context_window must be >= 1024");
    if (!(budget_fraction > 0.0 && budget_fraction <= 1.0))
        throw std::invalid_argument("budget_fraction must be in (0, 1]");
}

std::size_t SessionPolicy::budget_tokens() const noexcept
{
    return static_cast<std::size_t>(std::floor(budget_fraction * static_cast<double>(context_window)));
}

std::string_view to_string(LoopStatus status) noexcept
{
    switch (status)
    {
        case LoopStatus::Completed: return "completed";
        case LoopStatus::GaveUp: return "gave_up";
        case LoopStatus::MaxLoopsReached: return "max_loops_reached";
        case LoopStatus::BudgetExceeded: return "budget_exceeded";
        case LoopStatus::UserAborted: return "user_aborted";
    }
    return "unknown";
}

std::string format_observation(ToolResult const& result)
{
    auto text = result.output.empty() && result.ok ? std::string("(no output)") : result.output;
    if (result.exit_code && *result.exit_code != 0)
        text += fmt::format("\n[exit code {}]", *result.exit_code);
    return text;
}

std::string fallback_summary(Transcript const& transcript)
{
    auto const observations = transcript.count(Role::ToolObservation);
    std::string last = "none";
    for (auto it = transcript.messages().rbegin(); it != transcript.messages().rend(); ++it)
        if (it->role() == Role::ToolObservation)
        {
            last = tail_bytes(it->content(), ExcerptBytes);
            break;
        }
    return fmt::format("Session stopped after {} tool calls ({} assistant messages, {} user messages). "
                       "Last observation: {}",
                       observations, transcript.count(Role::Assistant), transcript.count(Role::User), last);
}

std::vector<Message> summary_request(Transcript const& transcript, std::size_t budgetTokens)
{
    Message const instruction(Role::System, std::string(SummaryInstruction));
    Message const cue(Role::User, std::string(SummaryCue));
    auto const overhead = instruction.token_estimate() + cue.token_estimate();
    auto remaining = budgetTokens > overhead ? budgetTokens - overhead : 0;

    // Newest first until the budget is spent; the oldest message that only
    // partly fits keeps its tail.
    std::vector<Message> tail;
    auto const& all = transcript.messages();
    for (auto it = all.rbegin(); it != all.rend() && remaining > 0; ++it)
    {
        if (it->role() == Role::System)
            continue;
        if (it->token_estimate() <= remaining)
        {
            remaining -= it->token_estimate();
            tail.push_back(*it);
        }
        else
        {
            tail.emplace_back(it->role(), tail_bytes(it->content(), remaining * 4));
            break;
        }
    }
    std::ranges::reverse(tail);

    std::vector<Message> request;
    request.reserve(tail.size() + 2);
    request.push_back(instruction);
    for (auto& m: tail)
        request.push_back(std::move(m));
    request.push_back(cue);
    return request;
}

std::string summarize_transcript(Transcript const& transcript, ChatProvider& llm, std::size_t budgetTokens)
{
    try
    {
        auto const request = summary_request(transcript, budgetTokens);
        auto response = llm.complete(request);
        if (!response.text.empty())
            return std::move(response.text);
    }
    catch (ProviderError const&)
    {
    }
    return fallback_summary(transcript);
}

AgentSession::AgentSession(ChatProvider& llm, ToolRegistry const& tools, SessionPolicy policy, Approver approver,
                           EventSink sink):
    _llm(llm),
    _tools(tools),
    _policy(std::move(policy)),
    _gate(_policy.approval_mode, std::move(approver), _policy.allowlist),
    _sink(std::move(sink))
{
    _policy.validate();
    if (_tools.empty())
        throw std::invalid_argument("an agent session needs at least one tool");
}

void AgentSession::emit(SessionEvent event) const
{
    if (_sink)
        _sink(event);
}

void AgentSession::append(Message message)
{
    _transcript->append(message);
    emit(SessionEvent { .kind = SessionEvent::Kind::MessageAppended, .message = std::move(message) });
}

LoopOutcome AgentSession::finish(LoopStatus status, std::string finalText)
{
    if (status != LoopStatus::Completed)
    {
        auto summary = summarize_transcript(*_transcript, _llm, _policy.budget_tokens());
        finalText = finalText.empty() ? std::move(summary) : finalText + "\n" + summary;
    }
    emit(SessionEvent { .kind = SessionEvent::Kind::StatusChanged, .status = std::string(to_string(status)) });
    return LoopOutcome {
        .status = status,
        .final_text = std::move(finalText),
        .loop_count = static_cast<int>(_transcript->count(Role::ToolObservation)),
        .transcript = *_transcript,
    };
}

LoopOutcome AgentSession::run(std::string userPrompt)
{
    emit(SessionEvent { .kind = SessionEvent::Kind::StatusChanged, .status = "running" });
    if (!_transcript)
    {
        _transcript.emplace(render_system_prompt(_tools.names()), std::move(userPrompt));
        for (auto const& m: _transcript->messages())
            emit(SessionEvent { .kind = SessionEvent::Kind::MessageAppended, .message = m });
    }
    else
        append(Message(Role::User, std::move(userPrompt)));

    int dispatched = 0;
    int malformed = 0;
    while (true)
    {
        if (_abort)
            return finish(LoopStatus::UserAborted, {});
        if (_transcript->total_token_estimate() > _policy.budget_tokens())
            return finish(LoopStatus::BudgetExceeded, {});

        ChatResponse response;
        try
        {
            response = _llm.complete(_transcript->messages());
        }
        catch (ProviderError const& e)
        {
            return finish(LoopStatus::GaveUp, fmt::format("Model provider failed: {}", e.what()));
        }
        append(Message(Role::Assistant, response.text));

        auto action = parse_action(response.text);
        switch (action.kind)
        {
            case AgentAction::Kind::FinalAnswer: return finish(LoopStatus::Completed, std::move(*action.answer));

            case AgentAction::Kind::Malformed:
                if (++malformed >= _policy.max_parse_retries)
                    return finish(LoopStatus::GaveUp, {});
                append(Message(Role::User, std::string(MalformedActionObservation)));
                continue;

            case AgentAction::Kind::ToolCall: break;
        }

        malformed = 0;
        auto const approvalId = fmt::format("a{}", _nextApproval++);
        auto const& input = *action.tool_input;
        emit(SessionEvent { .kind = SessionEvent::Kind::ToolRequested,
                            .approval_id = approvalId,
                            .tool = *action.tool_name,
                            .input = input_to_text(input) });

        ToolResult result;
        try
        {
            result = _tools.dispatch(*action.tool_name, ToolCall { approvalId, input, _gate });
        }
        catch (ApprovalChannelClosed const&)
        {
            return finish(LoopStatus::UserAborted, {});
        }
        catch (std::exception const& e)
        {
            result = ToolResult { .ok = false, .output = fmt::format("Tool error: {}", e.what()) };
        }

        emit(SessionEvent { .kind = SessionEvent::Kind::ToolResult,
                            .approval_id = approvalId,
                            .tool = *action.tool_name,
                            .result = result });
        append(Message(Role::ToolObservation, format_observation(result)));

        if (++dispatched >= _policy.max_loops)
            return finish(LoopStatus::MaxLoopsReached, {});
    }
}

LoopOutcome run_session(std::string initialUserPrompt, ChatProvider& llm, ToolRegistry const& tools,
                        SessionPolicy const& policy, Approver approver, EventSink sink)
{
    AgentSession session(llm, tools, policy, std::move(approver), std::move(sink));
    return session.run(std::move(initialUserPrompt));
}

} // namespace foampilot
