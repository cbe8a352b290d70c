// SPDX-License-Identifier: Apache-2.0
#include "../support/corpus_gen.hpp"
#include "../support/helpers.hpp"

#include <foampilot/cli/commands.hpp>
#include <foampilot/cli/config.hpp>
#include <foampilot/cli/modes.hpp>
#include <foampilot/index/vector_index.hpp>

#include <doctest.h>

#include <cstdio>
#include <map>
#include <sys/wait.h>

using namespace foampilot;

namespace
{

EnvLookup env_from(std::map<std::string, std::string> values)
{
    return [values = std::move(values)](std::string const& name) -> std::optional<std::string> {
        if (auto it = values.find(name); it != values.end())
            return it->second;
        return std::nullopt;
    };
}

struct Captured
{
    std::istringstream in;
    std::ostringstream out;
    std::ostringstream err;
    Console console { in, out, err };

    explicit Captured(std::string input = {}): in(std::move(input)) {}
};

Services scripted(MockScript script, std::shared_ptr<ProcessRunner> runner = std::make_shared<PosixProcessRunner>(),
                  ApprovalMode mode = ApprovalMode::AutoApprove)
{
    Services s;
    s.config.policy.approval_mode = mode;
    s.make_llm = [script] { return std::make_unique<MockProvider>(script); };
    s.embedder = std::make_shared<HashEmbedder>();
    s.runner = std::move(runner);
    return s;
}

struct CliRun
{
    int exit_code = -1;
    std::string output;
};

/// Runs the foampilot binary with stderr folded into stdout.
CliRun run_cli(std::string const& args, fs::path const& cwd)
{
    auto const command = "cd '" + cwd.string() + "' && HOME='" + cwd.string() + "' '" FOAMPILOT_CLI "' " + args + " 2>&1";
    CliRun run;
    auto* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (auto n = std::fread(buffer, 1, sizeof buffer, pipe))
        run.output.append(buffer, n);
    auto const status = pclose(pipe);
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return run;
}

} // namespace

TEST_CASE("config file discovery")
{
    testing::TempDir dir;
    CHECK_THROWS_AS((void)find_config_file(dir / "nope.json", env_from({})), ConfigError);
    CHECK(!find_config_file(std::nullopt, env_from({ { "HOME", dir.path().string() } })));
    testing::write_file(dir / "foampilot.json", "{}");
    CHECK(find_config_file(std::nullopt, env_from({ { "HOME", dir.path().string() } })) == dir / "foampilot.json");
    CHECK(find_config_file(dir / "foampilot.json", env_from({})) == dir / "foampilot.json");
}

TEST_CASE("config precedence per key")
{
    testing::TempDir dir;
    testing::write_file(dir / "cfg.json", R"({
        "llm": { "base_url": "http://file", "model": "file-model", "embed_model": "file-embed",
                 "temperature": 0.5, "max_retries": 7, "timeout_s": 12 },
        "policy": { "max_loops": 9, "budget_fraction": 0.5, "allowlist": ["ls*"], "approval": "allowlist" },
        "retrieval_k": 6, "cells_per_core": 1000, "script_interpreter": "python3.11",
        "serve_port": 9000, "index_path": "idx.fpix"
    })");

    AppConfig const defaults;
    auto const none = load_config(std::nullopt, env_from({ { "HOME", dir.path().string() } }));
    CHECK(none.provider.chat_model == defaults.provider.chat_model);
    CHECK(none.policy.max_loops == 25);
    CHECK(none.policy.context_window == 128000);
    CHECK(none.policy.budget_fraction == 0.8);
    CHECK(none.retrieval_k == 4);
    CHECK(none.cells_per_core == 50000);
    CHECK(none.serve_port == 8787);
    CHECK(!none.source);

    auto const file = load_config(dir / "cfg.json", env_from({}));
    CHECK(file.source == dir / "cfg.json");
    CHECK(file.provider.base_url == "http://file");
    CHECK(file.provider.chat_model == "file-model");
    CHECK(file.provider.embed_model == "file-embed");
    CHECK(file.provider.temperature == 0.5);
    CHECK(file.provider.max_retries == 7);
    CHECK(file.provider.request_timeout.count() == 12);
    CHECK(file.policy.max_loops == 9);
    CHECK(file.policy.budget_fraction == 0.5);
    CHECK(file.policy.allowlist == std::vector<std::string> { "ls*" });
    CHECK(file.policy.approval_mode == ApprovalMode::Allowlist);
    CHECK(file.retrieval_k == 6);
    CHECK(file.cells_per_core == 1000);
    CHECK(file.script_interpreter == "python3.11");
    CHECK(file.serve_port == 9000);
    CHECK(file.index_path == "idx.fpix");

    auto const env = load_config(dir / "cfg.json", env_from({ { "FOAMPILOT_LLM_BASE_URL", "http://env" },
                                                              { "FOAMPILOT_LLM_MODEL", "env-model" },
                                                              { "FOAMPILOT_TEMPERATURE", "0.1" },
                                                              { "FOAMPILOT_APPROVAL", "auto" } }));
    CHECK(env.provider.base_url == "http://env");
    CHECK(env.provider.chat_model == "env-model");
    CHECK(env.provider.temperature == 0.1);
    CHECK(env.policy.approval_mode == ApprovalMode::AutoApprove);
    // Keys the environment does not set keep the file value.
    CHECK(env.provider.embed_model == "file-embed");
    CHECK(env.script_interpreter == "python3.11");

    CHECK_THROWS_AS((void)load_config(dir / "cfg.json", env_from({ { "FOAMPILOT_TEMPERATURE", "warm" } })),
                    ConfigError);
    testing::write_file(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS((void)load_config(dir / "bad.json", env_from({})), ConfigError);
}

TEST_CASE("session modes and params")
{
    CHECK(parse_session_mode("configure") == SessionMode::Configure);
    CHECK(parse_session_mode("run_hpc") == SessionMode::RunHpc);
    CHECK(to_string(SessionMode::Ask) == "ask");
    CHECK_THROWS_AS((void)parse_session_mode("dance"), UsageError);

    auto p = session_params_from_json({ { "case", "/c" }, { "bashrc", "/b" }, { "question", "why?" } });
    CHECK(p.case_path == fs::path("/c"));
    CHECK(p.bashrc == fs::path("/b"));
    CHECK(p.text == "why?");
    CHECK_THROWS_AS((void)session_params_from_json({ { "case", 3 } }), UsageError);

    auto const services = scripted(testing::script({ testing::final_text("x") }));
    testing::TempDir dir;
    CHECK_THROWS_AS((void)prepare_session(SessionMode::Configure, SessionParams { .text = "x" }, services),
                    UsageError);
    CHECK_THROWS((void)prepare_session(SessionMode::RunSerial, SessionParams { .case_path = dir.path() }, services));
    CHECK_THROWS((void)prepare_session(SessionMode::Ask, SessionParams { .text = "q" }, services));

    auto chat = prepare_session(SessionMode::Chat, SessionParams {}, services);
    CHECK(!chat.initial_prompt);
    CHECK(chat.tools.names() == std::vector<std::string> { "shell", "script" });

    testing::write_file(dir / "bashrc", "");
    auto run = prepare_session(SessionMode::RunHpc,
                               SessionParams { .case_path = dir.path(), .bashrc = dir / "bashrc" }, services);
    REQUIRE(run.initial_prompt);
    CHECK(run.initial_prompt->find((dir / "bashrc").string()) != std::string::npos);
}

TEST_CASE("make_services")
{
    AppConfig config;
    auto unconfigured = make_services(config);
    CHECK(!unconfigured.embedder);
    CHECK_THROWS_AS((void)unconfigured.make_llm(), ConfigError);
    CHECK_THROWS_AS((void)make_services(config, "openai"), UsageError);

    auto mock = make_services(config, "mock:" + (testing::fixtures() / "scripts/burner_resize.json").string());
    CHECK(mock.embedder->model_tag() == "hash-bow-256");
    auto a = mock.make_llm();
    auto b = mock.make_llm();
    CHECK(a.get() != b.get());
}

TEST_CASE("index and ask commands")
{
    testing::TempDir dir;
    auto const pairs = testing::write_synthetic_corpus(dir / "src", 6);
    auto services = scripted(testing::script({
        testing::action_text("retrieve", { { "query", pairs[2].term }, { "k", 1 } }),
        testing::final_text("It lives in " + pairs[2].stem + "."),
    }));

    Captured idx;
    CHECK(cmd_index(dir / "src", dir / "out/code.fpix", services, idx.console) == 0);
    CHECK(idx.out.str()
          == "indexed 6 documents from " + (dir / "src").string() + " into " + (dir / "out/code.fpix").string()
                 + "\n0 documents truncated for embedding\ndimension 256 (hash-bow-256)\n");

    Captured ask;
    CHECK(cmd_ask("Where is " + pairs[2].term + "?", dir / "out/code.fpix", services, ask.console) == 0);
    CHECK(ask.out.str() == "It lives in " + pairs[2].stem + ".\nstatus: completed after 1 tool call\n");
    CHECK(ask.err.str().find("> retrieve") != std::string::npos);

    Captured missing;
    CHECK(cmd_index(dir / "nope", dir / "x.fpix", services, missing.console) == FailureExit);
    CHECK(missing.err.str().find("root not found") != std::string::npos);

    Captured noIndex;
    CHECK(cmd_ask("q", dir / "absent.fpix", services, noIndex.console) == FailureExit);
    CHECK(noIndex.err.str().starts_with("error: "));

    services.embedder.reset();
    Captured noEmbed;
    CHECK(cmd_index(dir / "src", dir / "y.fpix", services, noEmbed.console) == FailureExit);
}

TEST_CASE("configure command reproduces the burner edit")
{
    testing::TempDir dir;
    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    auto const script = MockScript::load(testing::fixtures() / "scripts/burner_resize.json");
    auto services = scripted(script);

    Captured run;
    REQUIRE(cmd_configure(dir / "case", "Please double burner size.", services, run.console) == 0);
    auto const out = run.out.str();
    CHECK(out.find("status: completed after 5 tool calls\n") != std::string::npos);
    CHECK(out.find("2 files changed:\n  system/snappyHexMeshDict\n") != std::string::npos);
    CHECK(testing::read_file(dir / "case/system/topoSetDict").find("box (-0.3 -0.3 -0.001) (0.3 0.3 0.001);")
          != std::string::npos);

    Captured missing;
    CHECK(cmd_configure(dir / "nope", "x", services, missing.console) == FailureExit);
}

TEST_CASE("configure with every command denied changes nothing")
{
    testing::TempDir dir;
    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    auto runner = std::make_shared<testing::FakeRunner>();
    auto services = scripted(
        testing::script({ testing::action_text("shell", "sed -i s/a/b/ system/topoSetDict") }, true), runner,
        ApprovalMode::Interactive);

    Captured run("n\nn\nn\nn\nn\n");
    services.config.policy.max_parse_retries = 3;
    services.config.policy.max_loops = 5;
    REQUIRE(cmd_configure(dir / "case", "double burner", services, run.console) == 0);
    CHECK(runner->spawn_count() == 0);
    CHECK(run.out.str().find("status: max_loops_reached after 5 tool calls") != std::string::npos);
    CHECK(run.out.str().find("No case files changed.") != std::string::npos);
    CHECK(run.out.str().find("[a1] shell wants to run:") != std::string::npos);

    Captured aborted("a\n");
    REQUIRE(cmd_configure(dir / "case", "double burner", services, aborted.console) == 0);
    CHECK(aborted.out.str().find("status: user_aborted") != std::string::npos);
    CHECK(runner->spawn_count() == 0);
}

TEST_CASE("run commands")
{
    testing::TempDir dir;
    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    testing::write_file(dir / "bashrc", "");
    auto const fx = testing::fixtures() / "hpc";
    auto runner = std::make_shared<testing::FakeRunner>([&](ProcessRequest const& r) -> ProcessResult {
        if (r.command.starts_with("sinfo"))
            return { 0, testing::read_file(fx / "sinfo.txt") };
        if (r.command.ends_with("checkMesh"))
            return { 0, testing::read_file(fx / "checkMesh.log") };
        if (r.command.starts_with("sbatch"))
            return { 0, testing::read_file(fx / "sbatch.txt") };
        return { 0, "" };
    });
    auto services = scripted(testing::script({
                                 testing::action_text("shell", "sbatch job.slurm"),
                                 testing::final_text("Submitted."),
                             }),
                             runner);

    Captured direct;
    REQUIRE(cmd_run(RunArgs { SessionMode::RunHpc, dir / "case", dir / "bashrc", true, std::nullopt }, services,
                    direct.console)
            == 0);
    CHECK(direct.out.str()
          == "cells: 1600000\npartition: compute\nnodes: 1\nntasks: 32\nscript: " + (dir / "case/job.slurm").string()
                 + "\njob id: 4242\n");
    auto const requests = runner->requests();
    CHECK(std::count_if(requests.begin(), requests.end(), [](auto const& r) { return r.command.starts_with("sbatch"); })
          == 1);

    Captured agent;
    REQUIRE(cmd_run(RunArgs { SessionMode::RunHpc, dir / "case", dir / "bashrc", false, std::nullopt }, services,
                    agent.console)
            == 0);
    CHECK(agent.out.str() == "Submitted.\nstatus: completed after 1 tool call\njob id: 4242\n");

    Captured serial;
    REQUIRE(cmd_run(RunArgs { SessionMode::RunSerial, dir / "case", dir / "bashrc", true, std::nullopt }, services,
                    serial.console)
            == 0);
    CHECK(serial.out.str() == "solver log: " + (dir / "case/log.fireFoam").string() + "\n");

    Captured noCase;
    CHECK(cmd_run(RunArgs { SessionMode::RunSerial, dir / "nope", dir / "bashrc", true, std::nullopt }, services,
                  noCase.console)
          == FailureExit);
    Captured noBashrc;
    CHECK(cmd_run(RunArgs { SessionMode::RunHpc, dir / "case", dir / "nope", true, std::nullopt }, services,
                  noBashrc.console)
          == FailureExit);
    CHECK(noBashrc.err.str().find("bashrc not found") != std::string::npos);
    Captured noBashrcAgent;
    CHECK(cmd_run(RunArgs { SessionMode::RunHpc, dir / "case", dir / "nope", false, std::nullopt }, services,
                  noBashrcAgent.console)
          == FailureExit);
}

TEST_CASE("chat command")
{
    auto services = scripted(testing::script({
        testing::final_text("Hello."),
        testing::action_text("shell", "echo hi"),
        testing::final_text("Ran it."),
    }));
    auto runner = std::make_shared<testing::FakeRunner>();
    services.runner = runner;
    Captured chat("hi\nrun something\n\nignored\n");
    REQUIRE(cmd_chat(services, chat.console) == 0);
    auto const out = chat.out.str();
    CHECK(out.find("user: hi\nassistant: Hello.\n") != std::string::npos);
    CHECK(out.find("user: run something\nassistant: Ran it.\n") != std::string::npos);
    CHECK(out.find("ignored") == std::string::npos);
    CHECK(runner->spawn_count() == 1);
}

TEST_CASE("terminal approver")
{
    Captured c("y\nno\nabort\n");
    auto approver = terminal_approver(c.console);
    ApprovalRequest request { "a1", "shell", "ls" };
    CHECK(approver(request) == ApprovalDecision::Approve);
    CHECK(approver(request) == ApprovalDecision::Deny);
    CHECK(approver(request) == ApprovalDecision::Abort);
    CHECK(approver(request) == ApprovalDecision::Abort);
    CHECK(c.out.str().starts_with("[a1] shell wants to run:\nls\napprove? [y]es / [n]o / [a]bort: "));
}

TEST_CASE("foampilot binary")
{
    testing::TempDir dir;
    auto const help = run_cli("--help", dir.path());
    CHECK(help.exit_code == 0);
    for (auto const* sub: { "index", "ask", "configure", "run", "chat", "serve" })
        CHECK(help.output.find(sub) != std::string::npos);

    auto const bad = run_cli("frobnicate", dir.path());
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.starts_with("error: "));

    auto const missing = run_cli("--llm mock:none.json index --src nowhere --out x.fpix", dir.path());
    CHECK(missing.exit_code == 2);

    testing::write_synthetic_corpus(dir / "src", 3);
    testing::write_file(dir / "s.json", R"({"steps":[{"response":"```json\n{\"action\":\"Final Answer\",\"action_input\":\"done\"}\n```"}]})");
    auto const indexed = run_cli("--llm mock:s.json index --src src --out code.fpix", dir.path());
    CHECK(indexed.exit_code == 0);
    CHECK(indexed.output.find("indexed 3 documents") != std::string::npos);

    auto const asked = run_cli("--llm mock:s.json ask --index code.fpix 'what is it?'", dir.path());
    CHECK(asked.exit_code == 0);
    CHECK(asked.output == "done\nstatus: completed after 0 tool calls\n");

    auto const noProvider = run_cli("ask --index code.fpix 'what?'", dir.path());
    CHECK(noProvider.exit_code == 2);
    CHECK(noProvider.output.find("FOAMPILOT_LLM_BASE_URL") != std::string::npos);

    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    testing::copy_tree(testing::fixtures() / "scripts", dir / "scripts");
    auto const configured = run_cli(
        "--llm mock:scripts/burner_resize.json --approval auto configure --case case 'double burner size'", dir.path());
    CHECK(configured.exit_code == 0);
    CHECK(configured.output.find("2 files changed") != std::string::npos);

    auto const loops = run_cli("--llm mock:s.json --max-loops 0 ask --index code.fpix q", dir.path());
    CHECK(loops.exit_code == 2);
}
