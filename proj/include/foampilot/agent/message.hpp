// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace foampilot
{

/// Heuristic token count: ceil(bytes / 4). Stands in for a provider tokenizer
/// when guarding the context budget.
[[nodiscard]] constexpr std::size_t estimate_tokens(std::string_view text) noexcept
{
    return (text.size() + 3) / 4;
}

enum class Role
{
    System,
    User,
    Assistant,
    ToolObservation,
};

[[nodiscard]] std::string_view to_string(Role role) noexcept;

class Message
{
public:
    Message(Role role, std::string content);

    [[nodiscard]] Role role() const noexcept { return _role; }
    [[nodiscard]] std::string const& content() const noexcept { return _content; }
    [[nodiscard]] std::size_t token_estimate() const noexcept { return _tokenEstimate; }

    bool operator==(Message const&) const = default;

private:
    Role _role;
    std::string _content;
    std::size_t _tokenEstimate;
};

/// Ordered conversation state. The first message is always the system prompt
/// and the second the opening user request.
class Transcript
{
public:
    Transcript(std::string systemPrompt, std::string userPrompt);

    void append(Message message);

    [[nodiscard]] std::vector<Message> const& messages() const noexcept { return _messages; }
    [[nodiscard]] std::size_t total_token_estimate() const noexcept { return _totalTokens; }
    [[nodiscard]] std::size_t size() const noexcept { return _messages.size(); }
    [[nodiscard]] std::size_t count(Role role) const noexcept;

    bool operator==(Transcript const&) const = default;

private:
    std::vector<Message> _messages;
    std::size_t _totalTokens = 0;
};

} // namespace foampilot
