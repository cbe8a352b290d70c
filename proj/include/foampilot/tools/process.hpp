// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

namespace foampilot
{

struct ProcessRequest
{
    std::string command;
    std::filesystem::path workdir;
    std::chrono::duration<double> timeout = std::chrono::seconds(600);
};

struct ProcessResult
{
    int exit_code = 0;
    /// Interleaved stdout and stderr.
    std::string output;
    bool timed_out = false;
    std::chrono::duration<double> duration {};
};

/// Process-spawn seam: every tool and the job runner start processes only
/// through this interface.
class ProcessRunner
{
public:
    virtual ~ProcessRunner() = default;
    virtual ProcessResult run(ProcessRequest const& request) = 0;
};

/// Runs commands with `bash -c` (falling back to /bin/sh) in their own process
/// group; a timeout kills the whole group.
class PosixProcessRunner final: public ProcessRunner
{
public:
    ProcessResult run(ProcessRequest const& request) override;
};

/// Exit status 127 is what shells report for an unknown command.
inline constexpr int CommandNotFoundExit = 127;

} // namespace foampilot
