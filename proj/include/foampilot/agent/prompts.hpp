// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace foampilot
{

class EmptyToolList: public std::invalid_argument
{
public:
    EmptyToolList(): std::invalid_argument("tool list is empty") {}
};

class MissingBinding: public std::invalid_argument
{
public:
    explicit MissingBinding(std::string name);
    [[nodiscard]] std::string const& name() const noexcept { return _name; }

private:
    std::string _name;
};

/// Structured-chat system prompt with the tool names substituted.
/// Throws EmptyToolList, or std::invalid_argument on duplicate names.
[[nodiscard]] std::string render_system_prompt(std::vector<std::string> const& toolNames);

enum class PromptTemplate
{
    CaseConfig,
    SerialJob,
    HpcJob,
};

using PromptBindings = std::map<std::string, std::string, std::less<>>;

/// Placeholders used by a template, e.g. "case_path".
[[nodiscard]] std::vector<std::string> template_placeholders(PromptTemplate id);

/// Substitutes {name} placeholders in one pass. Binding values are inserted
/// verbatim and never rescanned, so case contents containing braces are safe.
[[nodiscard]] std::string render_prompt_template(PromptTemplate id, PromptBindings const& bindings);

} // namespace foampilot
