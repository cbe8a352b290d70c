// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <foampilot/agent/session.hpp>
#include <foampilot/llm/provider.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace foampilot
{

namespace fs = std::filesystem;

inline constexpr std::string_view ConfigFileName = "foampilot.json";
inline constexpr int DefaultServePort = 8787;

class ConfigError: public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct AppConfig
{
    ProviderConfig provider;
    SessionPolicy policy;
    std::size_t retrieval_k = DefaultRetrievalK;
    long long cells_per_core = 50'000;
    fs::path index_path;
    std::string script_interpreter = "python3";
    int serve_port = DefaultServePort;
    /// Where the loaded file came from, if any.
    std::optional<fs::path> source;
};

using EnvLookup = std::function<std::optional<std::string>(std::string const&)>;

/// Reads the real process environment.
[[nodiscard]] std::optional<std::string> process_env(std::string const& name);

/// Explicit path if given (must exist), else ./foampilot.json, else
/// $HOME/foampilot.json.
[[nodiscard]] std::optional<fs::path> find_config_file(std::optional<fs::path> const& explicitPath,
                                                       EnvLookup const& env = process_env);

/// Overlays the keys present in `doc` onto `config`.
void apply_config_json(AppConfig& config, nlohmann::json const& doc);

/// Overlays the FOAMPILOT_* variables that are set.
void apply_environment(AppConfig& config, EnvLookup const& env);

/// Built-in defaults, then the config file, then the environment. Command
/// line flags are applied by the caller last.
[[nodiscard]] AppConfig load_config(std::optional<fs::path> const& explicitPath, EnvLookup const& env = process_env);

} // namespace foampilot
