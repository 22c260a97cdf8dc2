// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/dataset.hpp>

#include <span>
#include <string>
#include <string_view>

namespace spiceagent
{

/// A single signal over time. Views into caller-owned storage.
struct Trace
{
    std::string name;
    std::span<double const> time;
    std::span<double const> values;
    std::string unit;

    /// Throws TraceTooShort (< 2 points) or NonMonotonicTime.
    void validate() const;
};

Trace trace_from(Dataset const& dataset, std::string_view signal);

struct SteadyWindow
{
    double t_start = 0.0;
    double t_end = 0.0;
    /// Set when the means of the window's two halves differ by more than 1 % of the window mean.
    bool drifting = false;
};

enum class MeasurementKind
{
    Mean,
    Ripple,
    SwitchingFrequency,
    SettleTime,
};

std::string_view measurement_kind_name(MeasurementKind kind) noexcept;
/// Accepts "mean", "ripple", "switching_frequency", "settle_time" and the
/// tool-style aliases ("get_ripple", "get_mean_output_voltage", ...).
MeasurementKind measurement_kind_from_name(std::string_view name);

struct Measurement
{
    MeasurementKind kind = MeasurementKind::Mean;
    double value = 0.0;
    std::string unit;
    SteadyWindow window;
    std::string diagnostics;

    /// "<kind> <value> <unit> (window <t0>..<t1>)" - the line the agent sees.
    std::string render() const;
};

inline constexpr double default_steady_fraction = 0.2;

SteadyWindow steady_state_window(Trace const& trace, double fraction = default_steady_fraction);

Measurement get_mean_output_voltage(Trace const& trace, SteadyWindow const& window);
Measurement get_ripple(Trace const& trace, SteadyWindow const& window);
Measurement get_switching_frequency(Trace const& trace, SteadyWindow const& window);
Measurement get_settle_in_time(Trace const& trace);

/// Picks the signal, derives the default steady window and dispatches.
Measurement read_feature(Dataset const& dataset, std::string_view signal, MeasurementKind kind);

} // namespace spiceagent
