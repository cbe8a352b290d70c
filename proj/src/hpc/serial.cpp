// SPDX-License-Identifier: Apache-2.0
#include <foampilot/hpc/serial.hpp>
#include <foampilot/index/corpus.hpp>

#include <fmt/format.h>

#include <fstream>

namespace foampilot
{

StageFailed::StageFailed(std::string stage, int exitCode, std::string logTail):
    std::runtime_error(fmt::format("{} stage failed with exit code {}", stage, exitCode)),
    _stage(std::move(stage)),
    _exitCode(exitCode),
    _logTail(std::move(logTail))
{
}

namespace
{

    std::string tail_of(std::string_view text, std::size_t n = 2000)
    {
        return std::string(text.size() <= n ? text : text.substr(text.size() - n));
    }

    std::string tail_of_file(fs::path const& path)
    {
        std::error_code ec;
        if (!fs::exists(path, ec))
            return {};
        try
        {
            return tail_of(read_text_file(path));
        }
        catch (std::exception const&)
        {
            return {};
        }
    }

    void write_log(fs::path const& path, std::string const& text)
    {
        std::ofstream out(path, std::ios::trunc | std::ios::binary);
        out << text;
    }

    void check_case(fs::path const& caseRoot)
    {
        if (!fs::is_directory(caseRoot))
            throw CaseMissing(caseRoot);
        if (!fs::exists(caseRoot / "mesh.sh"))
            throw MeshScriptMissing(caseRoot / "mesh.sh");
    }

    ProcessResult run_mesh(fs::path const& caseRoot, fs::path const& bashrc, ProcessRunner& runner,
                           std::chrono::duration<double> timeout)
    {
        auto result = runner.run(ProcessRequest { with_environment(bashrc, "./mesh.sh"), caseRoot, timeout });
        write_log(caseRoot / "log.mesh", result.output);
        if (result.timed_out || result.exit_code != 0)
            throw StageFailed("mesh", result.timed_out ? -1 : result.exit_code, tail_of(result.output));
        return result;
    }

} // namespace

fs::path run_serial(fs::path const& caseRoot, fs::path const& bashrc, ProcessRunner& runner,
                    RunOptions const& options)
{
    check_case(caseRoot);
    run_mesh(caseRoot, bashrc, runner, options.mesh_timeout);

    auto const logName = "log." + options.solver;
    auto const log = caseRoot / logName;
    auto const result = runner.run(ProcessRequest {
        with_environment(bashrc, fmt::format("{} > {} 2>&1", shell_word(options.solver), logName)), caseRoot,
        options.solver_timeout });
    if (result.timed_out || result.exit_code != 0)
    {
        auto logTail = tail_of_file(log);
        throw StageFailed("solver", result.timed_out ? -1 : result.exit_code,
                          logTail.empty() ? tail_of(result.output) : logTail);
    }
    return log;
}

HpcSubmission submit_hpc_job(fs::path const& caseRoot, fs::path const& bashrc, ProcessRunner& runner,
                             HpcOptions const& options)
{
    check_case(caseRoot);
    auto const root = fs::absolute(caseRoot);

    auto const sinfo = runner.run(ProcessRequest { std::string(SinfoCommand), root, std::chrono::seconds(60) });
    if (sinfo.exit_code == CommandNotFoundExit)
        throw SchedulerUnavailable("sinfo is not available");
    if (sinfo.exit_code != 0)
        throw SchedulerUnavailable(fmt::format("sinfo failed with exit code {}", sinfo.exit_code));

    HpcSubmission submission;
    submission.resources = parse_resources(sinfo.output);

    auto const mesh = run_mesh(root, bashrc, runner, options.mesh_timeout);
    try
    {
        submission.mesh = parse_cell_count(mesh.output, root / "log.mesh");
    }
    catch (CellCountNotFound const&)
    {
        auto const check = runner.run(
            ProcessRequest { with_environment(bashrc, "checkMesh"), root, std::chrono::hours(1) });
        write_log(root / "log.checkMesh", check.output);
        submission.mesh = parse_cell_count(check.output, root / "log.checkMesh");
    }

    submission.layout = choose_layout(submission.mesh.cell_count, submission.resources, options.cells_per_core,
                                      options.partition_override);

    BackupLedger backups;
    submission.decompose_dict = write_decompose_dict(root, submission.layout.ntasks, backups);

    auto const decompose = runner.run(
        ProcessRequest { with_environment(bashrc, "decomposePar -force"), root, std::chrono::hours(6) });
    write_log(root / "log.decomposePar", decompose.output);
    if (decompose.timed_out || decompose.exit_code != 0)
        throw StageFailed("decompose", decompose.timed_out ? -1 : decompose.exit_code, tail_of(decompose.output));

    JobSpec spec;
    spec.job_name = options.job_name;
    spec.partition = submission.layout.partition;
    spec.nodes = submission.layout.nodes;
    spec.ntasks = submission.layout.ntasks;
    spec.bashrc_path = bashrc;
    spec.case_path = root;
    spec.solver = options.solver;
    spec.log_name = "log." + options.solver;

    submission.script_path = root / "job.slurm";
    {
        std::ofstream out(submission.script_path, std::ios::trunc);
        out << render_slurm_script(spec);
        if (!out)
            throw std::runtime_error("cannot write " + submission.script_path.string());
    }
    fs::permissions(submission.script_path, fs::perms::owner_exec, fs::perm_options::add);

    submission.status = submit(submission.script_path, runner);
    return submission;
}

} // namespace foampilot
