// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/dataset.hpp>
#include <spiceagent/netlist.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

namespace spiceagent
{

struct TransientSpec
{
    double t_stop = 0.0;
    double t_step_hint = 0.0;    ///< 0 = engine default
    double t_start_record = 0.0; ///< samples before this time are discarded

    void validate() const;
};

/// Reads ".tran" from a deck: ".tran Tstep Tstop [Tstart [Tmax]]" or LTspice's ".tran Tstop".
std::optional<TransientSpec> transient_from_netlist(Netlist const& netlist);

/// Ideal buck converter: switch + freewheeling diode + LC filter + resistive load.
struct BuckParams
{
    double v_in = 0.0;
    double inductance = 0.0;
    double capacitance = 0.0;
    double load = 0.0;
    double f_switch = 0.0;
    double duty = 0.0;
    double esr = 0.0;

    void validate() const;
    double period() const noexcept { return 1.0 / f_switch; }
};

/// Names of the deck elements a detected buck was built from; they become the signal names of the reference engine's output.
struct BuckCircuit
{
    BuckParams params;
    std::string input_node = "in";
    std::string switch_node = "sw";
    std::string output_node = "out";
    std::string inductor = "L1";
    std::string switch_element = "S1";
    std::string input_source = "V1";
    std::string pulse_source = "V2";
    std::string capacitor = "C1";
    bool pulse_at_switch_node = false;
};

/// Structural match against the canonical ideal buck. Throws PatternMismatch.
BuckCircuit detect_buck_pattern(Netlist const& netlist);

/// Settling horizon and defaults for the reference engine.
/// `with_startup` keeps the whole record (for settle-time readings) at a coarser step.
TransientSpec default_transient(BuckParams const& params, bool with_startup = false);

/// Fixed-step trapezoidal integration of the two-state buck; emits time,
/// V(out), V(sw), V(in), I(L) and the switch current.
Dataset run_reference_buck(BuckCircuit const& circuit, TransientSpec const& spec);
Dataset run_reference_buck(BuckParams const& params, TransientSpec const& spec);

struct EngineConfig
{
    /// e.g. "ngspice -b -r {raw_path} {netlist_path}" or "wine LTspice.exe -b {netlist_path}".
    std::string command_template;
    std::filesystem::path working_dir; ///< parent for per-job temp dirs; empty = system temp
    std::chrono::duration<double> timeout { 120.0 };
    bool keep_artifacts = false;

    void validate() const;
};

/// Runs the external simulator in an isolated temporary directory and parses its raw output.
Dataset run_external(Netlist const& netlist, TransientSpec const& spec, EngineConfig const& config);

enum class EngineKind
{
    Reference,
    External,
    Auto, ///< reference when the deck is a canonical buck, external otherwise
};

std::string_view engine_kind_name(EngineKind kind) noexcept;
EngineKind engine_kind_from_name(std::string_view name);

struct SimulatorOptions
{
    EngineKind kind = EngineKind::Auto;
    std::optional<EngineConfig> external;
};

/// Front door used by the tools and the benchmark. `with_startup` requests a record that starts at t = 0.
Dataset simulate(Netlist const& netlist, SimulatorOptions const& options, bool with_startup = false);

} // namespace spiceagent
