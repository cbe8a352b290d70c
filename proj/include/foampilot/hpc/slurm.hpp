// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/tools/process.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foampilot
{

namespace fs = std::filesystem;

/// Resource discovery command; columns are partition, node count, cores per node.
inline constexpr std::string_view SinfoCommand = "sinfo -h -o \"%P %D %c\"";
inline constexpr long long DefaultCellsPerCore = 50'000;
inline constexpr std::string_view DefaultSolver = "fireFoam";

class NoPartitions: public std::runtime_error
{
public:
    NoPartitions(): std::runtime_error("no SLURM partitions found") {}
};

class CellCountNotFound: public std::runtime_error
{
public:
    CellCountNotFound(): std::runtime_error("no 'cells:' count found in mesh log") {}
};

class CaseMissing: public std::runtime_error
{
public:
    explicit CaseMissing(fs::path const& root): std::runtime_error("case directory not found: " + root.string()) {}
};

class SubmitFailed: public std::runtime_error
{
public:
    SubmitFailed(int exitCode, std::string const& excerpt);
};

class JobIdNotFound: public std::runtime_error
{
public:
    explicit JobIdNotFound(std::string const& output);
};

class SchedulerUnavailable: public std::runtime_error
{
public:
    explicit SchedulerUnavailable(std::string const& what): std::runtime_error(what) {}
};

struct Partition
{
    std::string name;
    int node_count = 0;
    int cores_per_node = 0;
    /// Marked with a trailing '*' by sinfo.
    bool is_default = false;

    bool operator==(Partition const&) const = default;
};

struct ClusterResources
{
    std::vector<Partition> partitions;
    /// Lines of scheduler output that could not be parsed.
    int warnings = 0;

    /// The sinfo default partition, else the first one. Throws NoPartitions.
    [[nodiscard]] Partition const& default_partition() const;
    [[nodiscard]] Partition const* find(std::string_view name) const;
};

[[nodiscard]] ClusterResources parse_resources(std::string_view sinfoOutput);

struct MeshStats
{
    long long cell_count = 0;
    fs::path source_log;
};

/// The last `cells: N` match wins, i.e. the final refined mesh.
[[nodiscard]] MeshStats parse_cell_count(std::string_view logText, fs::path sourceLog = {});

struct Layout
{
    std::string partition;
    int nodes = 0;
    int ntasks = 0;
    int cores_per_node = 0;
};

/// ceil(cells / cellsPerCore) cores, rounded up to whole nodes (every node is
/// filled) and clamped to the partition size.
[[nodiscard]] Layout choose_layout(long long cells, ClusterResources const& resources, long long cellsPerCore,
                                   std::optional<std::string> const& partitionOverride = std::nullopt);

/// Remembers which files were already backed up during one run.
class BackupLedger
{
public:
    /// Copies `file` to `file.bak` the first time it is seen.
    void backup_once(fs::path const& file);

private:
    std::set<fs::path> _done;
};

/// Writes system/decomposeParDict with `numberOfSubdomains` and `method scotch`,
/// keeping any other entries of an existing, parseable file.
fs::path write_decompose_dict(fs::path const& caseRoot, int ntasks, BackupLedger& backups);

struct JobSpec
{
    std::string job_name = "foampilot";
    std::string partition;
    int nodes = 1;
    int ntasks = 1;
    fs::path bashrc_path;
    fs::path case_path;
    std::string solver = std::string(DefaultSolver);
    std::string log_name = "log.fireFoam";

    void validate() const;
};

[[nodiscard]] std::string render_slurm_script(JobSpec const& spec);

enum class JobState
{
    Pending,
    Running,
    Completed,
    Failed,
    Unknown,
};

[[nodiscard]] std::string_view to_string(JobState state) noexcept;
[[nodiscard]] JobState parse_job_state(std::string_view token) noexcept;

struct JobStatus
{
    long long job_id = 0;
    JobState state = JobState::Unknown;
};

/// Extracts N from "Submitted batch job N".
[[nodiscard]] std::optional<long long> parse_job_id(std::string_view sbatchOutput);

JobStatus submit(fs::path const& scriptPath, ProcessRunner& runner);
JobStatus poll_status(long long jobId, ProcessRunner& runner);

/// Shell-quotes `path` when it contains anything beyond [A-Za-z0-9_./+-].
[[nodiscard]] std::string shell_word(std::string_view text);

/// "source {bashrc} && {command}".
[[nodiscard]] std::string with_environment(fs::path const& bashrc, std::string_view command);

} // namespace foampilot
