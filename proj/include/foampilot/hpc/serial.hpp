// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/hpc/slurm.hpp>

#include <chrono>

namespace foampilot
{

class MeshScriptMissing: public std::runtime_error
{
public:
    explicit MeshScriptMissing(fs::path const& script): std::runtime_error("mesh script not found: " + script.string())
    {
    }
};

class StageFailed: public std::runtime_error
{
public:
    StageFailed(std::string stage, int exitCode, std::string logTail);

    [[nodiscard]] std::string const& stage() const noexcept { return _stage; }
    [[nodiscard]] int exit_code() const noexcept { return _exitCode; }
    [[nodiscard]] std::string const& log_tail() const noexcept { return _logTail; }

private:
    std::string _stage;
    int _exitCode;
    std::string _logTail;
};

struct RunOptions
{
    std::string solver = std::string(DefaultSolver);
    std::chrono::duration<double> mesh_timeout = std::chrono::hours(6);
    std::chrono::duration<double> solver_timeout = std::chrono::hours(24 * 7);
};

/// Meshes with ./mesh.sh, then runs the solver into log.<solver>, both after
/// sourcing the environment. Returns the solver log path.
fs::path run_serial(fs::path const& caseRoot, fs::path const& bashrc, ProcessRunner& runner,
                    RunOptions const& options = {});

struct HpcOptions
{
    long long cells_per_core = DefaultCellsPerCore;
    std::optional<std::string> partition_override;
    std::string solver = std::string(DefaultSolver);
    std::string job_name = "foampilot";
    std::chrono::duration<double> mesh_timeout = std::chrono::hours(6);
};

struct HpcSubmission
{
    ClusterResources resources;
    MeshStats mesh;
    Layout layout;
    fs::path decompose_dict;
    fs::path script_path;
    JobStatus status;
};

/// Discovery, meshing, layout, decomposition, batch script and submission in
/// one deterministic pass.
HpcSubmission submit_hpc_job(fs::path const& caseRoot, fs::path const& bashrc, ProcessRunner& runner,
                             HpcOptions const& options = {});

} // namespace foampilot
