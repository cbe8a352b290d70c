// SPDX-License-Identifier: Apache-2.0
#include <foampilot/cli/commands.hpp>
#include <foampilot/hpc/serial.hpp>

#include <fmt/format.h>

#include <iostream>

namespace foampilot
{

int report_failure(Console& console, std::string_view what)
{
    std::string line(what);
    std::ranges::replace(line, '\n', ' ');
    console.err << "error: " << line << std::endl;
    return FailureExit;
}

Approver terminal_approver(Console& console)
{
    return [&console](ApprovalRequest const& request) {
        console.out << fmt::format("[{}] {} wants to run:\n{}\napprove? [y]es / [n]o / [a]bort: ",
                                   request.approval_id, request.tool, request.rendered_input)
                    << std::flush;
        std::string answer;
        if (!std::getline(console.in, answer))
            return ApprovalDecision::Abort;
        if (answer == "y" || answer == "yes")
            return ApprovalDecision::Approve;
        if (answer == "a" || answer == "abort")
            return ApprovalDecision::Abort;
        return ApprovalDecision::Deny;
    };
}

namespace
{

    std::string plural(std::size_t n, std::string_view word)
    {
        return fmt::format("{} {}{}", n, word, n == 1 ? "" : "s");
    }

    /// Narrates tool activity on stderr so stdout carries only results.
    EventSink trace_sink(Console& console)
    {
        return [&console](SessionEvent const& event) {
            if (event.kind == SessionEvent::Kind::ToolRequested)
                console.err << fmt::format("> {} {}\n", event.tool, event.input);
            else if (event.kind == SessionEvent::Kind::ToolResult && event.result)
                console.err << fmt::format("< {}{}\n", event.result->ok ? "ok" : "failed",
                                           event.result->exit_code
                                               ? fmt::format(" (exit {})", *event.result->exit_code)
                                               : std::string());
        };
    }

    Approver approver_for(Services const& services, Console& console)
    {
        if (services.config.policy.approval_mode == ApprovalMode::AutoApprove)
            return {};
        return terminal_approver(console);
    }

    void print_outcome(LoopOutcome const& outcome, Console& console)
    {
        console.out << outcome.final_text << "\n";
        console.out << fmt::format("status: {} after {}\n", to_string(outcome.status),
                                   plural(static_cast<std::size_t>(outcome.loop_count), "tool call"));
    }

    LoopOutcome run_prepared(PreparedSession const& prepared, Services const& services, Console& console)
    {
        auto llm = services.make_llm();
        return run_session(*prepared.initial_prompt, *llm, prepared.tools, services.config.policy,
                           approver_for(services, console), trace_sink(console));
    }

    template <typename F>
    int guarded(Console& console, F&& body)
    {
        try
        {
            return body();
        }
        catch (std::exception const& e)
        {
            return report_failure(console, e.what());
        }
    }

} // namespace

int cmd_index(fs::path const& src, fs::path const& out, Services const& services, Console& console)
{
    return guarded(console, [&] {
        if (!services.embedder)
            throw ConfigError("indexing needs an embedding provider: set FOAMPILOT_LLM_BASE_URL or pass --llm mock:PATH");
        auto const entries = scan_corpus(src);
        std::vector<SourceDoc> docs;
        docs.reserve(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i)
            docs.push_back(prepare_document(src, entries[i], i));
        auto const index = build_index(std::move(docs), *services.embedder);
        if (out.has_parent_path())
            fs::create_directories(out.parent_path());
        save_index(index, out);
        console.out << fmt::format("indexed {} from {} into {}\n", plural(index.docs.size(), "document"),
                                   src.string(), out.string());
        console.out << fmt::format("{} truncated for embedding\n", plural(index.truncated_count(), "document"));
        console.out << fmt::format("dimension {} ({})\n", index.dimension, index.embed_model_tag);
        return 0;
    });
}

int cmd_ask(std::string const& question, std::optional<fs::path> const& index, Services const& services,
            Console& console)
{
    return guarded(console, [&] {
        auto const prepared =
            prepare_session(SessionMode::Ask, SessionParams { .index_path = index, .text = question }, services);
        print_outcome(run_prepared(prepared, services, console), console);
        return 0;
    });
}

int cmd_configure(fs::path const& casePath, std::string const& request, Services const& services, Console& console)
{
    return guarded(console, [&] {
        auto const prepared = prepare_session(SessionMode::Configure,
                                              SessionParams { .case_path = casePath, .text = request }, services);
        auto const outcome = run_prepared(prepared, services, console);
        print_outcome(outcome, console);
        auto const after = CaseTree::load(prepared.workdir);
        console.out << format_diff_report(diff_case(*prepared.case_before, after));
        return 0;
    });
}

int cmd_run(RunArgs const& args, Services const& services, Console& console)
{
    return guarded(console, [&] {
        if (args.mode != SessionMode::RunSerial && args.mode != SessionMode::RunHpc)
            throw UsageError("run mode must be serial or hpc");
        SessionParams params { .case_path = args.case_path, .bashrc = args.bashrc };

        if (args.direct)
        {
            if (!fs::is_directory(args.case_path))
                throw UsageError("case directory not found: " + args.case_path.string());
            if (!fs::is_regular_file(args.bashrc))
                throw UsageError("bashrc not found: " + args.bashrc.string());
            auto const bashrc = fs::absolute(args.bashrc);
            if (args.mode == SessionMode::RunSerial)
            {
                auto const log = run_serial(args.case_path, bashrc, *services.runner);
                console.out << "solver log: " << log.string() << "\n";
                return 0;
            }
            HpcOptions options;
            options.cells_per_core = services.config.cells_per_core;
            options.partition_override = args.partition;
            auto const job = submit_hpc_job(args.case_path, bashrc, *services.runner, options);
            console.out << fmt::format("cells: {}\npartition: {}\nnodes: {}\nntasks: {}\nscript: {}\n",
                                       job.mesh.cell_count, job.layout.partition, job.layout.nodes,
                                       job.layout.ntasks, job.script_path.string());
            console.out << "job id: " << job.status.job_id << "\n";
            return 0;
        }

        auto const prepared = prepare_session(args.mode, params, services);
        auto const outcome = run_prepared(prepared, services, console);
        print_outcome(outcome, console);
        if (args.mode == SessionMode::RunHpc)
        {
            // The newest submission the model made, if any.
            auto const& messages = outcome.transcript.messages();
            for (auto it = messages.rbegin(); it != messages.rend(); ++it)
            {
                if (it->role() != Role::ToolObservation)
                    continue;
                if (auto id = parse_job_id(it->content()))
                {
                    console.out << "job id: " << *id << "\n";
                    break;
                }
            }
        }
        return 0;
    });
}

int cmd_chat(Services const& services, Console& console)
{
    return guarded(console, [&] {
        auto const prepared = prepare_session(SessionMode::Chat, SessionParams {}, services);
        auto llm = services.make_llm();
        AgentSession session(*llm, prepared.tools, services.config.policy, approver_for(services, console),
                             trace_sink(console));
        console.out << "foampilot chat; an empty line or end of input quits\n";
        std::string line;
        while (console.out << "> " << std::flush, std::getline(console.in, line))
        {
            if (line.empty())
                break;
            console.out << "user: " << line << "\n";
            auto const outcome = session.run(line);
            console.out << "assistant: " << outcome.final_text << "\n";
            if (outcome.status != LoopStatus::Completed)
                console.out << "status: " << to_string(outcome.status) << "\n";
            if (outcome.status == LoopStatus::UserAborted)
                break;
        }
        return 0;
    });
}

} // namespace foampilot
