// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/engine.hpp>
#include <spiceagent/error.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace spiceagent::cli
{

/// Process exit codes. Documented in the README; do not renumber.
enum ExitCode : int
{
    Ok = 0,
    Internal = 1,
    InputError = 2,   ///< unreadable/malformed deck, raw file, question file or config
    MeasureError = 3, ///< unknown signal or a feature that cannot be extracted
    IterationCap = 4, ///< agent session ended without a final answer
    EngineError = 5,  ///< simulator missing, failed, timed out or the deck is unsupported
    EndpointError = 6,///< LLM or embedding endpoint unreachable or misbehaving
};

ExitCode exit_code_for(Errc code) noexcept;

/// Effective settings after merging config file < command-line flags < environment.
struct CliConfig
{
    EngineKind engine = EngineKind::Auto;
    std::string engine_command;
    double engine_timeout_s = 120.0;
    std::string llm_base_url;
    std::string llm_model = "gpt-4o";
    std::string llm_api_key; ///< environment only
    std::string embedding_base_url;
    std::string embedding_model = "text-embedding-3-large";
    std::string embedding_api_key; ///< environment only
    std::string retrieval_backend = "lexical";
    std::size_t max_iterations = 8;
    double temperature = 1.0;
    double top_p = 1.0;
    std::filesystem::path output_dir = "spiceagent-out";

    SimulatorOptions simulator() const;
};

/// Reads a JSON config file; unknown keys and credential keys are rejected.
CliConfig load_config_file(std::filesystem::path const& path);
/// Applies SPICEAGENT_* variables on top of `config`.
void apply_environment(CliConfig& config);
/// $SPICEAGENT_CONFIG, else $XDG_CONFIG_HOME/spiceagent/config.json, else ~/.config/spiceagent/config.json.
std::optional<std::filesystem::path> default_config_path();

int run(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

} // namespace spiceagent::cli
