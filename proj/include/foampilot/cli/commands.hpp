// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/cli/modes.hpp>

#include <iosfwd>

namespace foampilot
{

/// Exit code for every failure path; the message goes to err as "error: ...".
inline constexpr int FailureExit = 2;

struct Console
{
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

/// Prints the pending call and reads y / n / a(bort) from the console.
/// End of input aborts.
[[nodiscard]] Approver terminal_approver(Console& console);

int cmd_index(fs::path const& src, fs::path const& out, Services const& services, Console& console);
int cmd_ask(std::string const& question, std::optional<fs::path> const& index, Services const& services,
            Console& console);
int cmd_configure(fs::path const& casePath, std::string const& request, Services const& services, Console& console);

struct RunArgs
{
    SessionMode mode = SessionMode::RunSerial;
    fs::path case_path;
    fs::path bashrc;
    /// Skip the model and run the deterministic pipeline.
    bool direct = false;
    std::optional<std::string> partition;
};

int cmd_run(RunArgs const& args, Services const& services, Console& console);
int cmd_chat(Services const& services, Console& console);

/// Prints "error: <what>" and returns FailureExit.
int report_failure(Console& console, std::string_view what);

} // namespace foampilot
