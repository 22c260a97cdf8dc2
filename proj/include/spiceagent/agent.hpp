// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/engine.hpp>
#include <spiceagent/error.hpp>
#include <spiceagent/llm.hpp>
#include <spiceagent/netlist.hpp>
#include <spiceagent/rag.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spiceagent
{

struct SessionConfig
{
    std::size_t max_iterations = 8;
    SamplingParams sampling;
    /// Appended to the generated system prompt.
    std::string system_instructions;
    std::shared_ptr<RetrievalIndex const> datasheet;
    std::size_t datasheet_k = 4;
    SimulatorOptions simulator;
    /// false = single turn, no tools (plain chat baseline).
    bool tools_enabled = true;

    void validate() const;
};

enum class Termination
{
    FinalAnswer,
    IterationCap,
    Error,
};

std::string_view termination_name(Termination termination) noexcept;

struct SessionOutcome
{
    std::optional<Netlist> final_netlist; ///< set iff termination == FinalAnswer
    std::vector<ChatMessage> transcript;
    std::size_t iterations_used = 0;
    Termination termination = Termination::Error;
    std::optional<Netlist> last_candidate; ///< most recent parseable deck seen, for diagnostics
    std::optional<Errc> error;
    std::string diagnostics;
};

nlohmann::json outcome_to_json(SessionOutcome const& outcome);

std::string build_system_prompt(SessionConfig const& config);

std::vector<ToolSpec> default_toolset(bool datasheet_attached);

/// Session state behind the tools: the current candidate deck plus the
/// simulator and datasheet handles.
class Toolbox
{
  public:
    Toolbox(Netlist initial, SessionConfig const& config);

    std::vector<ToolSpec> const& specs() const noexcept { return _specs; }
    Netlist const& candidate() const noexcept { return _candidate; }

    /// Never throws for tool-level problems; they come back as failed results.
    ToolResult execute(ToolCall const& call);

  private:
    std::string submit_netlist(nlohmann::json const& args);
    std::string simulate_and_read(nlohmann::json const& args);
    std::string search_datasheet(nlohmann::json const& args);

    Netlist _candidate;
    SessionConfig const& _config;
    std::vector<ToolSpec> _specs;
};

/// Fenced block tagged spice/netlist/cir/net/sp first, otherwise the longest
/// run of card-like lines that ends in ".end".
std::optional<Netlist> extract_netlist_from_response(std::string_view text);

SessionOutcome run_session(std::string const& task_prompt, Netlist const& initial, SessionConfig const& config, LlmClient& client);

} // namespace spiceagent
