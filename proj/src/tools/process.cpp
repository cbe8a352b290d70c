// SPDX-License-Identifier: Apache-2.0
#include <foampilot/tools/process.hpp>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <stdexcept>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace foampilot
{

namespace
{

    using Clock = std::chrono::steady_clock;

    int decode_status(int status)
    {
        if (WIFEXITED(status))
            return WEXITSTATUS(status);
        if (WIFSIGNALED(status))
            return 128 + WTERMSIG(status);
        return -1;
    }

    [[noreturn]] void exec_child(ProcessRequest const& request, int outFd)
    {
        setpgid(0, 0);
        if (auto devNull = ::open("/dev/null", O_RDONLY); devNull >= 0)
            dup2(devNull, STDIN_FILENO);
        dup2(outFd, STDOUT_FILENO);
        dup2(outFd, STDERR_FILENO);
        if (!request.workdir.empty() && ::chdir(request.workdir.c_str()) != 0)
        {
            auto const msg = "cannot enter working directory: " + request.workdir.string() + "\n";
            (void) !::write(STDERR_FILENO, msg.data(), msg.size());
            _exit(126);
        }
        ::execl("/bin/bash", "bash", "-c", request.command.c_str(), static_cast<char*>(nullptr));
        ::execl("/bin/sh", "sh", "-c", request.command.c_str(), static_cast<char*>(nullptr));
        _exit(CommandNotFoundExit);
    }

} // namespace

ProcessResult PosixProcessRunner::run(ProcessRequest const& request)
{
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0)
        throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));

    auto const start = Clock::now();
    auto const deadline = start + std::chrono::duration_cast<Clock::duration>(request.timeout);
    pid_t const pid = ::fork();
    if (pid < 0)
    {
        ::close(fds[0]);
        ::close(fds[1]);
        throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0)
        exec_child(request, fds[1]);

    ::setpgid(pid, pid);
    ::close(fds[1]);

    ProcessResult result;
    char buffer[8192];
    bool open = true;
    while (open)
    {
        auto const remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (remaining.count() <= 0)
        {
            result.timed_out = true;
            break;
        }
        pollfd pfd { fds[0], POLLIN, 0 };
        auto const ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
        if (ready < 0 && errno != EINTR)
            break;
        if (ready <= 0)
            continue;
        auto const n = ::read(fds[0], buffer, sizeof buffer);
        if (n > 0)
            result.output.append(buffer, static_cast<std::size_t>(n));
        else if (n == 0 || errno != EINTR)
            open = false;
    }
    ::close(fds[0]);

    int status = 0;
    while (!result.timed_out)
    {
        auto const done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid || (done < 0 && errno != EINTR))
            break;
        if (Clock::now() >= deadline)
            result.timed_out = true;
        else
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (result.timed_out)
    {
        ::kill(-pid, SIGKILL);
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR)
        {
        }
    }

    result.exit_code = decode_status(status);
    result.duration = Clock::now() - start;
    return result;
}

} // namespace foampilot
