// SPDX-License-Identifier: Apache-2.0
#include <foampilot/casekit/foam_node.hpp>
#include <foampilot/hpc/slurm.hpp>
#include <foampilot/index/corpus.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

namespace foampilot
{

SubmitFailed::SubmitFailed(int exitCode, std::string const& excerpt):
    std::runtime_error(fmt::format("sbatch failed with exit code {}: {}", exitCode, excerpt))
{
}

JobIdNotFound::JobIdNotFound(std::string const& output):
    std::runtime_error("no job id in sbatch output: " + output.substr(0, 200))
{
}

namespace
{

    std::optional<int> positive_int(std::string_view token)
    {
        while (!token.empty() && token.back() == '+')
            token.remove_suffix(1);
        int value = 0;
        auto const [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || end != token.data() + token.size() || value < 1)
            return std::nullopt;
        return value;
    }

    std::string tail_excerpt(std::string_view text, std::size_t n = 500)
    {
        return std::string(text.size() <= n ? text : text.substr(text.size() - n));
    }

    std::string trim(std::string_view s)
    {
        auto const first = s.find_first_not_of(" \t\r\n");
        if (first == std::string_view::npos)
            return {};
        auto const last = s.find_last_not_of(" \t\r\n");
        return std::string(s.substr(first, last - first + 1));
    }

} // namespace

Partition const& ClusterResources::default_partition() const
{
    if (partitions.empty())
        throw NoPartitions();
    for (auto const& p: partitions)
        if (p.is_default)
            return p;
    return partitions.front();
}

Partition const* ClusterResources::find(std::string_view name) const
{
    for (auto const& p: partitions)
        if (p.name == name)
            return &p;
    return nullptr;
}

ClusterResources parse_resources(std::string_view sinfoOutput)
{
    ClusterResources resources;
    std::istringstream lines { std::string(sinfoOutput) };
    std::string line;
    while (std::getline(lines, line))
    {
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;)
            tokens.push_back(t);
        if (tokens.empty())
            continue;

        auto const nodes = tokens.size() == 3 ? positive_int(tokens[1]) : std::nullopt;
        auto const cores = tokens.size() == 3 ? positive_int(tokens[2]) : std::nullopt;
        if (!nodes || !cores)
        {
            ++resources.warnings;
            continue;
        }

        Partition p;
        p.name = tokens[0];
        if (p.name.ends_with('*'))
        {
            p.name.pop_back();
            p.is_default = true;
        }
        if (p.name.empty())
        {
            ++resources.warnings;
            continue;
        }
        p.node_count = *nodes;
        p.cores_per_node = *cores;

        // sinfo splits a partition whose nodes differ; merge to keep names unique.
        auto existing = std::ranges::find(resources.partitions, p.name, &Partition::name);
        if (existing != resources.partitions.end())
        {
            existing->node_count += p.node_count;
            existing->cores_per_node = std::min(existing->cores_per_node, p.cores_per_node);
            existing->is_default = existing->is_default || p.is_default;
        }
        else
            resources.partitions.push_back(std::move(p));
    }
    if (resources.partitions.empty())
        throw NoPartitions();
    return resources;
}

MeshStats parse_cell_count(std::string_view logText, fs::path sourceLog)
{
    static std::regex const pattern(R"(cells:\s*([0-9]+))");
    std::optional<long long> last;
    for (std::cregex_iterator it(logText.data(), logText.data() + logText.size(), pattern), end; it != end; ++it)
        last = std::stoll((*it)[1].str());
    if (!last || *last <= 0)
        throw CellCountNotFound();
    return MeshStats { *last, std::move(sourceLog) };
}

Layout choose_layout(long long cells, ClusterResources const& resources, long long cellsPerCore,
                     std::optional<std::string> const& partitionOverride)
{
    if (cells <= 0)
        throw std::invalid_argument("cell count must be positive");
    if (cellsPerCore <= 0)
        throw std::invalid_argument("cells_per_core must be positive");

    Partition const* partition = nullptr;
    if (partitionOverride)
    {
        partition = resources.find(*partitionOverride);
        if (partition == nullptr)
            throw std::invalid_argument("partition not available: " + *partitionOverride);
    }
    else
        partition = &resources.default_partition();

    auto const desiredCores = (cells + cellsPerCore - 1) / cellsPerCore;
    auto const cpn = static_cast<long long>(partition->cores_per_node);
    auto const wanted = (desiredCores + cpn - 1) / cpn;
    auto const nodes = static_cast<int>(std::clamp<long long>(wanted, 1, partition->node_count));
    return Layout { partition->name, nodes, nodes * partition->cores_per_node, partition->cores_per_node };
}

void BackupLedger::backup_once(fs::path const& file)
{
    if (!fs::exists(file) || _done.contains(file))
        return;
    fs::copy_file(file, fs::path(file.string() + ".bak"), fs::copy_options::overwrite_existing);
    _done.insert(file);
}

fs::path write_decompose_dict(fs::path const& caseRoot, int ntasks, BackupLedger& backups)
{
    if (!fs::is_directory(caseRoot))
        throw CaseMissing(caseRoot);
    if (ntasks < 1)
        throw std::invalid_argument("ntasks must be >= 1");

    auto const path = caseRoot / "system" / "decomposeParDict";
    fs::create_directories(path.parent_path());

    std::optional<FoamNode> dict;
    if (fs::exists(path))
    {
        backups.backup_once(path);
        try
        {
            dict = parse_dict(read_text_file(path));
        }
        catch (ParseError const&)
        {
        }
    }
    if (!dict)
    {
        dict = FoamNode::dict({
            FoamEntry { "FoamFile", FoamNode::dict({
                                        FoamEntry { "version", FoamNode::number(2.0) },
                                        FoamEntry { "format", FoamNode::word("ascii") },
                                        FoamEntry { "class", FoamNode::word("dictionary") },
                                        FoamEntry { "location", FoamNode::string("system") },
                                        FoamEntry { "object", FoamNode::word("decomposeParDict") },
                                    }) },
        });
    }
    dict = set_entry(*dict, "numberOfSubdomains", FoamNode::integer(ntasks));
    dict = set_entry(*dict, "method", FoamNode::word("scotch"));

    std::ofstream out(path, std::ios::trunc);
    out << serialize_dict(*dict);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return path;
}

void JobSpec::validate() const
{
    if (nodes < 1)
        throw std::invalid_argument("nodes must be >= 1");
    if (ntasks < nodes || ntasks % nodes != 0)
        throw std::invalid_argument("ntasks must fill every node equally");
    if (partition.empty())
        throw std::invalid_argument("partition is empty");
    if (solver.empty() || log_name.empty() || job_name.empty())
        throw std::invalid_argument("job name, solver and log name must be set");
}

std::string shell_word(std::string_view text)
{
    bool const plain = !text.empty() && std::ranges::all_of(text, [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '/' || c == '-' || c == '+';
    });
    if (plain)
        return std::string(text);
    std::string out = "'";
    for (char c: text)
        out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

std::string with_environment(fs::path const& bashrc, std::string_view command)
{
    return fmt::format("source {} && {}", shell_word(bashrc.string()), command);
}

std::string render_slurm_script(JobSpec const& spec)
{
    spec.validate();
    return fmt::format("#!/bin/bash\n"
                       "#SBATCH --job-name={}\n"
                       "#SBATCH --partition={}\n"
                       "#SBATCH --nodes={}\n"
                       "#SBATCH --ntasks={}\n"
                       "#SBATCH --output={}.slurm\n"
                       "\n"
                       "source {}\n"
                       "cd {}\n"
                       "mpirun -np {} {} -parallel > {} 2>&1\n",
                       spec.job_name, spec.partition, spec.nodes, spec.ntasks, spec.log_name,
                       shell_word(spec.bashrc_path.string()), shell_word(spec.case_path.string()), spec.ntasks,
                       spec.solver, spec.log_name);
}

std::string_view to_string(JobState state) noexcept
{
    switch (state)
    {
        case JobState::Pending: return "pending";
        case JobState::Running: return "running";
        case JobState::Completed: return "completed";
        case JobState::Failed: return "failed";
        case JobState::Unknown: return "unknown";
    }
    return "unknown";
}

JobState parse_job_state(std::string_view token) noexcept
{
    if (token == "PENDING" || token == "REQUEUED" || token == "SUSPENDED")
        return JobState::Pending;
    if (token == "RUNNING" || token == "CONFIGURING" || token == "COMPLETING")
        return JobState::Running;
    if (token == "COMPLETED")
        return JobState::Completed;
    if (token == "FAILED" || token == "CANCELLED" || token == "TIMEOUT" || token == "NODE_FAIL"
        || token == "OUT_OF_MEMORY" || token == "BOOT_FAIL" || token == "DEADLINE" || token == "PREEMPTED")
        return JobState::Failed;
    return JobState::Unknown;
}

std::optional<long long> parse_job_id(std::string_view sbatchOutput)
{
    static std::regex const pattern(R"(Submitted batch job ([0-9]+))");
    std::cmatch match;
    if (!std::regex_search(sbatchOutput.data(), sbatchOutput.data() + sbatchOutput.size(), match, pattern))
        return std::nullopt;
    auto const id = std::stoll(match[1].str());
    return id > 0 ? std::optional(id) : std::nullopt;
}

JobStatus submit(fs::path const& scriptPath, ProcessRunner& runner)
{
    if (!fs::exists(scriptPath))
        throw std::invalid_argument("batch script not found: " + scriptPath.string());
    auto const dir = scriptPath.has_parent_path() ? scriptPath.parent_path() : fs::path(".");
    auto const result = runner.run(ProcessRequest { "sbatch " + shell_word(scriptPath.string()), dir,
                                                    std::chrono::seconds(120) });
    if (result.timed_out || result.exit_code != 0)
        throw SubmitFailed(result.exit_code, tail_excerpt(result.output));
    auto const id = parse_job_id(result.output);
    if (!id)
        throw JobIdNotFound(result.output);
    return JobStatus { *id, JobState::Pending };
}

JobStatus poll_status(long long jobId, ProcessRunner& runner)
{
    if (jobId <= 0)
        throw std::invalid_argument("job id must be positive");

    auto const queue = runner.run(
        ProcessRequest { fmt::format("squeue -h -j {} -o %T", jobId), fs::current_path(), std::chrono::seconds(60) });
    if (queue.exit_code == CommandNotFoundExit)
        throw SchedulerUnavailable("squeue is not available");

    // squeue forgets finished jobs; fall back to accounting when it has any.
    auto state = queue.exit_code == 0 ? trim(queue.output) : std::string();
    if (state.empty())
    {
        auto const acct = runner.run(ProcessRequest { fmt::format("sacct -n -X -j {} -o State", jobId),
                                                      fs::current_path(), std::chrono::seconds(60) });
        if (acct.exit_code == 0)
            state = trim(acct.output);
    }
    auto const token = state.substr(0, state.find_first_of(" \t\n"));
    return JobStatus { jobId, parse_job_state(token) };
}

} // namespace foampilot
