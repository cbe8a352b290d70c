// SPDX-License-Identifier: Apache-2.0
#include <foampilot/agent/prompts.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <string_view>

namespace foampilot
{

namespace
{

    constexpr std::string_view SystemPromptTemplate =
        "You are an assistant whose job is to help fire scientists navigate and summarize the source code, "
        "modify the simulation case configuration files, and run simulation jobs.\n"
        "Respond to the human scientist as helpfully and accurately as possible.\n"
        "You have access to the following tools: {tool_names}.\n"
        "Use a JSON blob to specify a tool by providing an action key (tool name) and an action_input key "
        "(tool input).\n"
        "Valid \"action\" values: \"Final Answer\" or {tool_names}.\n"
        "Provide only ONE action per $JSON_BLOB, as shown:\n"
        "\n"
        "```\n"
        "{\n"
        "\"action\": $TOOL_NAME,\n"
        "\"action_input\": $INPUT\n"
        "}\n"
        "```\n"
        "\n"
        "Follow this format:\n"
        "\n"
        "Question: input question to answer\n"
        "Thought: consider previous and subsequent steps\n"
        "while requests is not finished, do\n"
        "    Action:\n"
        "    ```\n"
        "    $JSON_BLOB\n"
        "    ```\n"
        "    Observation: action result\n"
        "end\n"
        "\n"
        "After the problem is solved, give a final thought to summarize.";

    constexpr std::string_view CaseConfigTemplate =
        "I have a FireFOAM simulation case located at {case_path}.\n"
        "{user_request}\n"
        "Always read the contents of a file before modifying it. "
        "I have compressed the entire case directory, including the README file, into a single long string "
        "for you to view and understand my request, as follows: \n"
        "{case_contents}";

    constexpr std::string_view SerialJobTemplate =
        "I have a FireFOAM simulation case located at {case_path}. Take a look at the case directory. "
        "Mesh the case using the provided script, and then run the simulation in serial on the command line "
        "by invoking fireFoam. Write the output to a log file. After the simulation is finished, plot the "
        "results of volumetric heat release rate and save them in the case directory. "
        "Remember to load environment variables from {OF_bashrc_path}.";

    constexpr std::string_view HpcJobTemplate =
        "I have a FireFOAM simulation case located at {case_path}. Determine what SLURM queues you have "
        "access to. Mesh the case using the provided script. Based on the mesh size and the resources you "
        "have available, choose how many nodes to use. Use all physical cores on each node you use. "
        "Configure the number of subdomains in the case based on the number of physical cores and decompose "
        "the domain. Prepare a SLURM script for the queue and core count, then submit the job. Remember to "
        "always load environment variables from {OF_bashrc_path} before any FOAM command, both in the "
        "command line and in the SLURM script. Always read the contents of a file before modifying it. "
        "I have compressed the entire case directory, including the README file, into a single long string "
        "for you to view and understand my request, as follows: {case_contents}";

    std::string_view template_text(PromptTemplate id)
    {
        switch (id)
        {
            case PromptTemplate::CaseConfig: return CaseConfigTemplate;
            case PromptTemplate::SerialJob: return SerialJobTemplate;
            case PromptTemplate::HpcJob: return HpcJobTemplate;
        }
        throw std::invalid_argument("unknown prompt template");
    }

    bool is_placeholder_char(char c)
    {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    }

    /// Calls `visit(name)` for every {identifier} in `text`; appends literal
    /// text and the visitor's replacement to `out`.
    template <typename Visitor>
    std::string substitute(std::string_view text, Visitor&& visit)
    {
        std::string out;
        out.reserve(text.size());
        std::size_t i = 0;
        while (i < text.size())
        {
            if (text[i] == '{')
            {
                auto j = i + 1;
                while (j < text.size() && is_placeholder_char(text[j]))
                    ++j;
                if (j > i + 1 && j < text.size() && text[j] == '}')
                {
                    out += visit(text.substr(i + 1, j - i - 1));
                    i = j + 1;
                    continue;
                }
            }
            out += text[i++];
        }
        return out;
    }

} // namespace

MissingBinding::MissingBinding(std::string name):
    std::invalid_argument("missing prompt binding: " + name), _name(std::move(name))
{
}

std::string render_system_prompt(std::vector<std::string> const& toolNames)
{
    if (toolNames.empty())
        throw EmptyToolList();
    if (std::set<std::string>(toolNames.begin(), toolNames.end()).size() != toolNames.size())
        throw std::invalid_argument("duplicate tool names");

    auto const joined = fmt::format("{}", fmt::join(toolNames, ", "));
    return substitute(SystemPromptTemplate, [&](std::string_view) { return joined; });
}

std::vector<std::string> template_placeholders(PromptTemplate id)
{
    std::vector<std::string> names;
    (void) substitute(template_text(id), [&](std::string_view name) {
        if (std::ranges::find(names, name) == names.end())
            names.emplace_back(name);
        return std::string();
    });
    return names;
}

std::string render_prompt_template(PromptTemplate id, PromptBindings const& bindings)
{
    return substitute(template_text(id), [&](std::string_view name) {
        auto const it = bindings.find(name);
        if (it == bindings.end())
            throw MissingBinding(std::string(name));
        return it->second;
    });
}

} // namespace foampilot
