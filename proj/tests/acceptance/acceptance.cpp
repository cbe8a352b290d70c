// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "../support/corpus_gen.hpp"
#include "../support/dict_gen.hpp"
#include "../support/helpers.hpp"

#include <foampilot/agent/session.hpp>
#include <foampilot/casekit/case_tree.hpp>
#include <foampilot/cli/commands.hpp>
#include <foampilot/hpc/serial.hpp>
#include <foampilot/hpc/slurm.hpp>
#include <foampilot/index/corpus.hpp>
#include <foampilot/index/vector_index.hpp>
#include <foampilot/tools/toolbelt.hpp>

#include <fmt/format.h>

#include <chrono>
#include <iostream>
#include <regex>

using namespace foampilot;
using Clock = std::chrono::steady_clock;

namespace
{

/// Collects failed expectations for one criterion.
class Verdict
{
public:
    void expect(bool ok, std::string what)
    {
        if (!ok && _failures.size() < 5)
            _failures.push_back(std::move(what));
        _failed = _failed || !ok;
    }
    [[nodiscard]] bool ok() const { return !_failed; }
    [[nodiscard]] std::string detail() const { return fmt::format("{}", fmt::join(_failures, "; ")); }
    std::string note;

private:
    bool _failed = false;
    std::vector<std::string> _failures;
};

struct Criterion
{
    int number;
    std::string name;
    std::optional<double> limit_s;
    std::function<void(Verdict&)> body;
};

SessionPolicy auto_policy()
{
    SessionPolicy p;
    p.approval_mode = ApprovalMode::AutoApprove;
    return p;
}

// 1 ------------------------------------------------------------------------
void burner_resize(Verdict& v)
{
    testing::TempDir dir;
    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    auto const script = MockScript::load(testing::fixtures() / "scripts/burner_resize.json");
    Services services;
    services.config.policy = auto_policy();
    services.make_llm = [script] { return std::make_unique<MockProvider>(script); };
    services.runner = std::make_shared<PosixProcessRunner>();

    auto const before = CaseTree::load(dir / "case");
    std::istringstream in;
    std::ostringstream out, err;
    Console console { in, out, err };
    int const code = cmd_configure(dir / "case", "Please double burner size.", services, console);
    v.expect(code == 0, "cmd_configure exit " + std::to_string(code) + ": " + err.str());
    v.expect(out.str().find("status: completed after") != std::string::npos, "status not completed");

    auto const topo = testing::read_file(dir / "case/system/topoSetDict");
    auto const snappy = testing::read_file(dir / "case/system/snappyHexMeshDict");
    v.expect(topo.find("box (-0.3 -0.3 -0.001) (0.3 0.3 0.001);") != std::string::npos, "topoSetDict box");
    v.expect(topo.find("0.15") == std::string::npos, "old box left in topoSetDict");
    v.expect(snappy.find("min (-0.3 -0.3 0.0);") != std::string::npos, "snappyHexMeshDict min");
    v.expect(snappy.find("max (0.3 0.3 0.0);") != std::string::npos, "snappyHexMeshDict max");

    auto const files = changed_files(diff_case(before, CaseTree::load(dir / "case")));
    v.expect(files == std::vector<std::string> { "system/snappyHexMeshDict", "system/topoSetDict" },
             fmt::format("changed files: {}", fmt::join(files, ", ")));
}

// 2 ------------------------------------------------------------------------
void dictionary_round_trip(Verdict& v)
{
    std::vector<fs::path> files;
    for (auto const& e: fs::directory_iterator(testing::fixtures() / "dicts"))
        files.push_back(e.path());
    for (auto const& e: fs::recursive_directory_iterator(testing::fixtures() / "poolFire"))
        if (e.is_regular_file() && e.path().parent_path() != testing::fixtures() / "poolFire")
            files.push_back(e.path());
    v.expect(files.size() >= 20, fmt::format("only {} fixture files", files.size()));

    std::size_t failures = 0;
    for (auto const& f: files)
    {
        try
        {
            auto const once = parse_dict(testing::read_file(f));
            bool const same = parse_dict(serialize_dict(once)) == once;
            failures += same ? 0 : 1;
            v.expect(same, "fixture " + f.filename().string());
        }
        catch (std::exception const& e)
        {
            ++failures;
            v.expect(false, f.filename().string() + ": " + e.what());
        }
    }
    testing::DictGenerator gen(2024);
    for (int i = 0; i < 500; ++i)
    {
        auto const node = gen.dictionary();
        try
        {
            auto const once = parse_dict(serialize_dict(node));
            bool const same = once == node && parse_dict(serialize_dict(once)) == once;
            failures += same ? 0 : 1;
            v.expect(same, fmt::format("generated #{}", i));
        }
        catch (std::exception const& e)
        {
            ++failures;
            v.expect(false, fmt::format("generated #{}: {}", i, e.what()));
        }
    }
    v.note = fmt::format("{} fixtures + 500 generated, {} failures", files.size(), failures);
}

// 3 ------------------------------------------------------------------------
void retrieval_precision(Verdict& v)
{
    testing::TempDir dir;
    auto const pairs = testing::write_synthetic_corpus(dir.path(), 50);
    auto const entries = scan_corpus(dir.path());
    v.expect(entries.size() == 50, fmt::format("{} documents, expected 50 pairs", entries.size()));
    std::vector<SourceDoc> docs;
    for (std::size_t i = 0; i < entries.size(); ++i)
        docs.push_back(prepare_document(dir.path(), entries[i], i));
    HashEmbedder embedder;
    auto const index = build_index(std::move(docs), embedder);

    // Each query is the distinctive term itself; the phrased variant is
    // reported alongside but not gated.
    auto rank_of = [&](std::string const& query, std::string const& stem) -> std::optional<std::size_t> {
        auto const hits = search(index, embedder.embed_one(query), 4);
        for (std::size_t r = 0; r < hits.size(); ++r)
            if (hits[r].doc->rel_path.find("/" + stem + "/") != std::string::npos)
                return r;
        return std::nullopt;
    };
    int top4 = 0;
    int rank1 = 0;
    int phrasedRank1 = 0;
    for (std::size_t q = 0; q < 20; ++q)
    {
        auto const& target = pairs[q];
        auto const rank = rank_of(target.term, target.stem);
        top4 += rank ? 1 : 0;
        rank1 += rank == std::size_t(0) ? 1 : 0;
        phrasedRank1 += rank_of("Where is " + target.term + " implemented?", target.stem) == std::size_t(0) ? 1 : 0;
    }
    v.expect(top4 >= 18, fmt::format("top-4 hits {}/20", top4));
    v.expect(rank1 >= 15, fmt::format("rank-1 hits {}/20", rank1));
    v.note = fmt::format("top-4 {}/20, rank-1 {}/20; phrased rank-1 {}/20", top4, rank1, phrasedRank1);
}

// 4 ------------------------------------------------------------------------
void truncation_safety(Verdict& v)
{
    std::mt19937_64 rng(4);
    std::vector<SourceDoc> docs;
    for (std::size_t i = 0; i < 200; ++i)
    {
        std::string body;
        std::size_t const lines = std::uniform_int_distribution<std::size_t>(0, 400)(rng);
        for (std::size_t l = 0; l < lines; ++l)
            body += testing::random_text(rng, 120) + "\n";
        if (i % 3 == 0)
            body += testing::random_text(rng, 5000);
        docs.push_back(SourceDoc { i, fmt::format("d{}/f{}.C", i, i),
                                   fmt::format("// File: d{}/f{}.C\n", i, i) + body, false });
    }
    HashEmbedder embedder;
    int violations = 0;
    for (std::size_t maxTokens: { std::size_t(16), std::size_t(17), std::size_t(64), std::size_t(1000), std::size_t(8192) })
    {
        auto const index = build_index(docs, embedder, maxTokens);
        for (std::size_t i = 0; i < docs.size(); ++i)
        {
            auto const cut = truncate_for_embedding(docs[i].full_text, maxTokens);
            bool ok = cut.starts_with("// File:") && index.docs[i].embedded_chars == cut.size()
                      && estimate_tokens(cut) <= maxTokens;
            // Hash collisions can tie short path-only texts, so the document
            // only has to be among the best-scoring hits.
            auto const hits = search(index, embedder.embed_one(cut), docs.size());
            bool found = false;
            for (auto const& hit: hits)
            {
                if (hit.score < hits[0].score - 1e-6)
                    break;
                found = found || hit.doc->doc_id == i;
            }
            ok = ok && found;
            for (auto const& hit: hits)
                ok = ok && hit.doc->full_text == docs[hit.doc->doc_id].full_text;
            if (!ok)
            {
                ++violations;
                v.expect(false, fmt::format("doc {} at max_tokens {}", i, maxTokens));
            }
        }
    }
    v.note = fmt::format("200 docs x 5 budgets, {} violations", violations);
}

// 5 ------------------------------------------------------------------------
void loop_termination(Verdict& v)
{
    testing::TempDir dir;
    testing::FakeRunner runner;
    ToolbeltOptions options;
    options.workdir = dir.path();
    options.runner = &runner;
    auto const tools = make_toolbelt(options);
    auto const policy = auto_policy();
    v.expect(policy.max_loops == 25 && policy.max_parse_retries == 3, "default policy changed");

    auto run = [&](MockScript script) {
        MockProvider llm(std::move(script));
        return run_session("go", llm, tools, policy);
    };
    auto const call = testing::action_text("shell", "ls");
    auto const a = run(testing::script({ testing::final_text("done") }));
    v.expect(a.status == LoopStatus::Completed && a.loop_count == 0, "(a) immediate answer");
    auto const b = run(testing::script({ call, call, call, testing::final_text("done") }));
    v.expect(b.status == LoopStatus::Completed && b.loop_count == 3, "(b) three calls");
    auto const c = run(testing::script({ call }, true));
    v.expect(c.status == LoopStatus::MaxLoopsReached && c.loop_count == 25, "(c) never answers");
    auto const d = run(testing::script({ "no blob", "still none", "nothing" }));
    v.expect(d.status == LoopStatus::GaveUp, "(d) malformed");
    v.note = fmt::format("{} / {}({}) / {}({}) / {}", to_string(a.status), to_string(b.status), b.loop_count,
                         to_string(c.status), c.loop_count, to_string(d.status));
}

// 6 ------------------------------------------------------------------------
void budget_guard(Verdict& v)
{
    testing::TempDir dir;
    for (std::size_t window: { std::size_t(4000), std::size_t(128000) })
    {
        auto policy = auto_policy();
        policy.context_window = window;
        policy.max_loops = 1000;
        auto const big = std::string(8192, 'o');
        testing::FakeRunner runner([&](ProcessRequest const&) { return ProcessResult { 0, big }; });
        ToolbeltOptions options;
        options.workdir = dir.path();
        options.runner = &runner;
        auto const tools = make_toolbelt(options);
        MockProvider llm(testing::script({ testing::action_text("shell", "cat big") }, true));
        auto const outcome = run_session("go", llm, tools, policy);
        v.expect(outcome.status == LoopStatus::BudgetExceeded, fmt::format("window {}: {}", window, to_string(outcome.status)));
        v.expect(!outcome.final_text.empty(), fmt::format("window {}: empty summary", window));
        v.expect(outcome.transcript.total_token_estimate() > policy.budget_tokens(), "transcript under budget");
    }
    std::mt19937_64 rng(6);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i)
    {
        auto const s = testing::random_text(rng, 4096, i % 2 == 0);
        std::size_t const oracle = s.size() / 4 + (s.size() % 4 != 0 ? 1 : 0);
        mismatches += estimate_tokens(s) == oracle ? 0 : 1;
    }
    v.expect(mismatches == 0, fmt::format("{} estimator mismatches", mismatches));
}

// 7 ------------------------------------------------------------------------
void hpc_pipeline(Verdict& v)
{
    testing::TempDir dir;
    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    testing::write_file(dir / "bashrc", "");
    auto const fx = testing::fixtures() / "hpc";
    auto const sinfo = testing::read_file(fx / "sinfo.txt");
    auto const checkMesh = testing::read_file(fx / "checkMesh.log");
    auto const sbatch = testing::read_file(fx / "sbatch.txt");
    v.expect(sinfo == "compute* 4 32\n", "sinfo fixture");
    v.expect(checkMesh.find("cells:            1600000") != std::string::npos, "checkMesh fixture");
    v.expect(sbatch == "Submitted batch job 4242\n", "sbatch fixture");

    testing::FakeRunner runner([&](ProcessRequest const& r) -> ProcessResult {
        if (r.command.starts_with("sinfo"))
            return { 0, sinfo };
        if (r.command.ends_with("checkMesh"))
            return { 0, checkMesh };
        if (r.command.starts_with("sbatch"))
            return { 0, sbatch };
        return { 0, "" };
    });
    HpcOptions options;
    options.cells_per_core = 50'000;
    auto const job = submit_hpc_job(dir / "case", dir / "bashrc", runner, options);
    v.expect(job.layout.nodes == 1, fmt::format("nodes={}", job.layout.nodes));
    v.expect(job.layout.ntasks == 32, fmt::format("ntasks={}", job.layout.ntasks));
    v.expect(job.status.job_id == 4242, fmt::format("job id {}", job.status.job_id));
    auto const dict = testing::read_file(dir / "case/system/decomposeParDict");
    v.expect(dict.find("numberOfSubdomains 32;") != std::string::npos, "decomposeParDict");
    auto const script = testing::read_file(job.script_path);
    v.expect(script.find("#SBATCH --ntasks=32\n") != std::string::npos, "--ntasks line");
    v.expect(script.find("mpirun -np 32 fireFoam -parallel") != std::string::npos, "mpirun line");

    auto const source = "source " + (dir / "bashrc").string();
    bool sourced = false;
    std::istringstream lines(script);
    for (std::string line; std::getline(lines, line);)
    {
        sourced = sourced || line.starts_with(source);
        if (line.find("fireFoam") != std::string::npos && !line.starts_with("#"))
            v.expect(sourced, "solver line before source: " + line);
    }
    for (auto const& r: runner.requests())
        if (!r.command.starts_with("sinfo") && !r.command.starts_with("sbatch"))
            v.expect(r.command.starts_with(source + " && "), "unsourced command: " + r.command);
}

// 8 ------------------------------------------------------------------------
void serial_run(Verdict& v)
{
    testing::TempDir dir;
    testing::copy_tree(testing::fixtures() / "poolFire", dir / "case");
    auto const bin = dir / "bin";
    testing::write_file(bin / "fireFoam", "#!/bin/sh\necho 'stub solver sentinel 7f3a'\n");
    fs::permissions(bin / "fireFoam", fs::perms::owner_all, fs::perm_options::add);
    testing::write_file(dir / "bashrc", "export PATH=\"" + bin.string() + ":$PATH\"\n");
    testing::write_file(dir / "case/mesh.sh", "#!/bin/sh\necho meshed\n");
    fs::permissions(dir / "case/mesh.sh", fs::perms::owner_all, fs::perm_options::add);

    PosixProcessRunner runner;
    auto const log = run_serial(dir / "case", dir / "bashrc", runner);
    v.expect(log == dir / "case/log.fireFoam", "log path " + log.string());
    v.expect(testing::read_file(log).find("stub solver sentinel 7f3a") != std::string::npos, "sentinel missing");

    testing::write_file(dir / "case/mesh.sh", "#!/bin/sh\necho failing\nexit 2\n");
    try
    {
        (void)run_serial(dir / "case", dir / "bashrc", runner);
        v.expect(false, "mesh failure not reported");
    }
    catch (StageFailed const& e)
    {
        v.expect(e.stage() == "mesh" && e.exit_code() == 2, "wrong stage " + e.stage());
    }
}

// 9 ------------------------------------------------------------------------
void approval_gate(Verdict& v)
{
    testing::TempDir dir;
    testing::FakeRunner runner;
    ToolbeltOptions options;
    options.workdir = dir.path();
    options.runner = &runner;
    options.script = true;
    options.script_options.scratch_dir = dir.path();
    auto const tools = make_toolbelt(options);
    SessionPolicy policy;
    policy.approval_mode = ApprovalMode::Interactive;
    int asked = 0;
    Approver denyAll = [&](ApprovalRequest const&) {
        ++asked;
        return ApprovalDecision::Deny;
    };
    MockProvider llm(testing::script({ testing::action_text("shell", "rm -rf /"),
                                       testing::action_text("script", "print('x')"),
                                       testing::action_text("shell", "ls"), testing::final_text("gave up") }));
    auto const outcome = run_session("go", llm, tools, policy, denyAll);
    v.expect(runner.spawn_count() == 0, fmt::format("{} processes spawned", runner.spawn_count()));
    v.expect(asked == 3, fmt::format("approver asked {} times", asked));
    int denials = 0;
    for (auto const& m: outcome.transcript.messages())
        if (m.role() == Role::ToolObservation)
        {
            ++denials;
            v.expect(m.content().find("Command denied by user.") != std::string::npos, "observation: " + m.content());
        }
    v.expect(denials == 3, fmt::format("{} denial observations", denials));

    ApprovalGate gate(ApprovalMode::Allowlist, [](ApprovalRequest const&) { return ApprovalDecision::Deny; },
                      { "ls( -[a-z]+)*( [^ ]+)?", "cat [^ ]+", "grep -n [^ ]+ [^ ]+" });
    for (auto const* cmd: { "ls -la", "cat system/controlDict", "grep -n box system/topoSetDict" })
        v.expect(gate.approve({ "a", "shell", cmd }), std::string("not allowlisted: ") + cmd);
    for (auto const* cmd: { "rm -rf /", "cat a; rm b", "ls > out" })
        v.expect(!gate.approve({ "a", "shell", cmd }), std::string("wrongly allowlisted: ") + cmd);
}

// 10 -----------------------------------------------------------------------
void index_persistence(Verdict& v)
{
    testing::TempDir dir;
    testing::write_synthetic_corpus(dir / "corpus", 50);
    auto const entries = scan_corpus(dir / "corpus");
    std::vector<SourceDoc> docs;
    for (std::size_t i = 0; i < entries.size(); ++i)
        docs.push_back(prepare_document(dir / "corpus", entries[i], i));
    HashEmbedder embedder;
    auto const index = build_index(std::move(docs), embedder);
    v.expect(index.docs.size() == 50, "index size");

    save_index(index, dir / "a.fpix");
    auto const loaded = load_index(dir / "a.fpix");
    v.expect(loaded == index, "loaded index differs");
    save_index(loaded, dir / "b.fpix");
    auto const bytes = testing::read_file(dir / "a.fpix");
    v.expect(bytes == testing::read_file(dir / "b.fpix"), "re-saved bytes differ");

    auto corrupt = bytes;
    corrupt[bytes.size() * 3 / 4] ^= 0x01;
    testing::write_file(dir / "corrupt.fpix", corrupt);
    try
    {
        (void)load_index(dir / "corrupt.fpix");
        v.expect(false, "corrupted byte accepted");
    }
    catch (CorruptIndex const&)
    {
    }
    auto bumped = bytes;
    bumped[4] = static_cast<char>(VectorIndex::FormatVersion + 1);
    testing::write_file(dir / "bumped.fpix", bumped);
    try
    {
        (void)load_index(dir / "bumped.fpix");
        v.expect(false, "version bump accepted");
    }
    catch (VersionMismatch const&)
    {
    }
}

} // namespace

int main()
{
    std::vector<Criterion> const criteria {
        { 1, "burner-resize scenario", 5.0, burner_resize },
        { 2, "dictionary round-trip", 10.0, dictionary_round_trip },
        { 3, "retrieval precision", 5.0, retrieval_precision },
        { 4, "truncation safety", std::nullopt, truncation_safety },
        { 5, "agent-loop termination", 2.0, loop_termination },
        { 6, "budget guard", std::nullopt, budget_guard },
        { 7, "HPC pipeline", 2.0, hpc_pipeline },
        { 8, "serial run", 5.0, serial_run },
        { 9, "approval gate soundness", std::nullopt, approval_gate },
        { 10, "index persistence", std::nullopt, index_persistence },
    };

    int failed = 0;
    for (auto const& c: criteria)
    {
        Verdict verdict;
        auto const start = Clock::now();
        try
        {
            c.body(verdict);
        }
        catch (std::exception const& e)
        {
            verdict.expect(false, std::string("threw: ") + e.what());
        }
        double const seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (c.limit_s && seconds >= *c.limit_s)
            verdict.expect(false, fmt::format("took {:.2f} s, limit {} s", seconds, *c.limit_s));

        auto line = fmt::format("{} {:>2} {} ({:.2f} s)", verdict.ok() ? "PASS" : "FAIL", c.number, c.name, seconds);
        if (!verdict.note.empty())
            line += " [" + verdict.note + "]";
        if (!verdict.ok())
        {
            line += ": " + verdict.detail();
            ++failed;
        }
        std::cout << line << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
