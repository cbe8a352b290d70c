// SPDX-License-Identifier: Apache-2.0
#include <foampilot/cli/commands.hpp>
#include <foampilot/cli/server.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace foampilot;

int main(int argc, char** argv)
{
    CLI::App app { "foampilot: an LLM agent for OpenFOAM case work" };
    app.require_subcommand(1);

    std::optional<std::string> configPath;
    std::optional<std::string> approval;
    std::optional<std::string> llmSpec;
    std::optional<std::string> model;
    std::optional<int> maxLoops;
    app.add_option("--config", configPath, "Config file (default ./foampilot.json, then ~/foampilot.json)");
    app.add_option("--approval", approval, "interactive | allowlist | auto")
        ->check(CLI::IsMember({ "interactive", "allowlist", "auto" }));
    app.add_option("--llm", llmSpec, "mock:PATH replays a scripted provider");
    app.add_option("--model", model, "Chat model name");
    app.add_option("--max-loops", maxLoops, "Tool calls per run before stopping")->check(CLI::PositiveNumber);

    std::string src, out;
    auto* index = app.add_subcommand("index", "Build a code index");
    index->add_option("--src", src, "Source tree")->required();
    index->add_option("--out", out, "Index file to write")->required();

    std::string question;
    std::optional<std::string> indexPath;
    auto* ask = app.add_subcommand("ask", "Ask about the indexed source code");
    ask->add_option("question", question)->required();
    ask->add_option("--index", indexPath, "Index file");

    std::string casePath, request;
    auto* configure = app.add_subcommand("configure", "Modify a case from a plain-language request");
    configure->add_option("--case", casePath, "Case directory")->required();
    configure->add_option("request", request)->required();

    std::string runMode, bashrc;
    std::optional<std::string> partition;
    bool direct = false;
    auto* run = app.add_subcommand("run", "Mesh and run a case, serially or through SLURM");
    run->add_option("mode", runMode)->required()->check(CLI::IsMember({ "serial", "hpc" }));
    run->add_option("--case", casePath, "Case directory")->required();
    run->add_option("--bashrc", bashrc, "OpenFOAM environment script")->required();
    run->add_flag("--direct", direct, "Run the fixed pipeline without the model");
    run->add_option("--partition", partition, "SLURM partition for --direct hpc");

    auto* chat = app.add_subcommand("chat", "Interactive session in the terminal");

    ServeOptions serveOptions;
    std::optional<int> port;
    std::optional<std::string> bind;
    std::string staticDir;
    auto* serve = app.add_subcommand("serve", "HTTP and server-sent events API for the web console");
    serve->add_option("--port", port, "Port (default 8787)")->check(CLI::Range(0, 65535));
    serve->add_option("--bind", bind, "Listen address; required for anything but loopback");
    serve->add_option("--static", staticDir, "Console bundle directory");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        std::cerr << "error: " << e.what() << std::endl;
        return FailureExit;
    }

    Console console { std::cin, std::cout, std::cerr };
    try
    {
        auto config = load_config(configPath ? std::optional<fs::path>(*configPath) : std::nullopt);
        if (approval)
            config.policy.approval_mode = parse_approval_mode(*approval);
        if (model)
            config.provider.chat_model = *model;
        if (maxLoops)
            config.policy.max_loops = *maxLoops;
        config.policy.validate();
        auto services = make_services(std::move(config), llmSpec);

        if (*index)
            return cmd_index(src, out, services, console);
        if (*ask)
            return cmd_ask(question, indexPath ? std::optional<fs::path>(*indexPath) : std::nullopt, services,
                           console);
        if (*configure)
            return cmd_configure(casePath, request, services, console);
        if (*run)
            return cmd_run(RunArgs { .mode = runMode == "hpc" ? SessionMode::RunHpc : SessionMode::RunSerial,
                                     .case_path = casePath,
                                     .bashrc = bashrc,
                                     .direct = direct,
                                     .partition = partition },
                           services, console);
        if (*chat)
            return cmd_chat(services, console);
        if (*serve)
        {
            serveOptions.port = port.value_or(services.config.serve_port);
            if (bind)
                serveOptions.bind = *bind;
            serveOptions.static_dir = staticDir;
            return cmd_serve(serveOptions, std::move(services), std::cout, std::cerr);
        }
    }
    catch (std::exception const& e)
    {
        return report_failure(console, e.what());
    }
    return FailureExit;
}
