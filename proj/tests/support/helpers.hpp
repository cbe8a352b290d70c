// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/llm/mock.hpp>
#include <foampilot/tools/process.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace testing
{

inline fs::path fixtures()
{
    return fs::path(FOAMPILOT_FIXTURES);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::mt19937_64 rng { std::random_device {}() };
        _path = fs::temp_directory_path() / ("foampilot_test_" + std::to_string(rng()));
        fs::create_directories(_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(_path, ec);
    }
    TempDir(TempDir const&) = delete;
    TempDir& operator=(TempDir const&) = delete;

    fs::path const& path() const { return _path; }
    fs::path operator/(fs::path const& rel) const { return _path / rel; }

private:
    fs::path _path;
};

inline void write_file(fs::path const& path, std::string_view text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline std::string read_file(fs::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void copy_tree(fs::path const& from, fs::path const& to)
{
    fs::create_directories(to);
    fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

/// Assistant text carrying one fenced action blob.
inline std::string action_text(std::string const& action, nlohmann::json const& input,
                               std::string const& thought = "Thought: next step.")
{
    nlohmann::json blob { { "action", action }, { "action_input", input } };
    return thought + "\n```json\n" + blob.dump(2) + "\n```";
}

inline std::string final_text(std::string const& answer)
{
    return action_text("Final Answer", answer, "Thought: I know the final answer.");
}

inline foampilot::MockScript script(std::vector<std::string> responses, bool repeat = false)
{
    foampilot::MockScript s;
    for (auto& r: responses)
        s.steps.push_back(foampilot::MockStep { std::nullopt, std::move(r) });
    s.repeat = repeat;
    return s;
}

/// Process seam that never spawns anything: records requests and answers
/// from a handler.
class FakeRunner final: public foampilot::ProcessRunner
{
public:
    using Handler = std::function<foampilot::ProcessResult(foampilot::ProcessRequest const&)>;

    FakeRunner() = default;
    explicit FakeRunner(Handler handler): _handler(std::move(handler)) {}

    foampilot::ProcessResult run(foampilot::ProcessRequest const& request) override
    {
        std::lock_guard lock(_m);
        _requests.push_back(request);
        if (_handler)
            return _handler(request);
        return foampilot::ProcessResult { 0, "ran: " + request.command };
    }

    std::size_t spawn_count() const
    {
        std::lock_guard lock(_m);
        return _requests.size();
    }

    std::vector<foampilot::ProcessRequest> requests() const
    {
        std::lock_guard lock(_m);
        return _requests;
    }

private:
    mutable std::mutex _m;
    Handler _handler;
    std::vector<foampilot::ProcessRequest> _requests;
};

inline std::string random_text(std::mt19937_64& rng, std::size_t maxLen, bool printable = true)
{
    std::uniform_int_distribution<std::size_t> len(0, maxLen);
    std::uniform_int_distribution<int> ch(printable ? 32 : 0, printable ? 126 : 255);
    std::string s(len(rng), '\0');
    for (auto& c: s)
        c = static_cast<char>(ch(rng));
    return s;
}

} // namespace testing
