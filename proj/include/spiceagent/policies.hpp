// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/benchmark.hpp>
#include <spiceagent/engine.hpp>
#include <spiceagent/llm.hpp>

#include <memory>
#include <optional>

namespace spiceagent
{

/// The one element a policy adjusts to move a buck feature.
enum class Knob
{
    InputVoltage,  ///< DC supply (mean output)
    Inductance,    ///< inductor current ripple
    Capacitance,   ///< output voltage ripple
    SwitchPeriod,  ///< switching frequency; on-time scales with it to keep the duty cycle
};

struct KnobChoice
{
    Knob knob;
    double current = 0.0; ///< value in the unmodified deck
    int sign = 1;         ///< +1 if the feature grows with the knob
};

/// Throws PatternMismatch / InvalidArgument when the question has no buck knob.
KnobChoice knob_for(BenchmarkQuestion const& question, BuckCircuit const& circuit);

/// Writes `value` into the deck element behind `knob`.
Netlist apply_knob(Netlist const& deck, BuckCircuit const& circuit, Knob knob, double value);

/// Closed-form answer: buck design equations for parameter questions, the
/// requested bridge component for topology questions. nullopt when neither applies.
std::optional<Netlist> oracle_answer(BenchmarkQuestion const& question);

/// Answers in one turn with the analytic solution.
std::unique_ptr<LlmClient> make_oracle_agent(BenchmarkQuestion const& question);

/// Echoes the netlist it was given, unchanged.
std::unique_ptr<LlmClient> make_noop_agent();

/// Measures, then bisects one knob in log space over [x0/8, x0*8] until the
/// reading is within the question's tolerance. Topology questions get the deck back unchanged.
std::unique_ptr<LlmClient> make_greedy_bisection_agent(BenchmarkQuestion const& question);

} // namespace spiceagent
