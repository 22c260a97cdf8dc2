// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/error.hpp>
#include <spiceagent/measure.hpp>
#include <spiceagent/netlist.hpp>

#include <fmt/format.h>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <numbers>
#include <vector>

namespace spiceagent
{

void Trace::validate() const
{
    if (time.size() != values.size())
        throw Error(Errc::InvalidArgument, fmt::format("trace '{}' has {} times but {} values", name, time.size(), values.size()));
    if (time.size() < 2)
        throw Error(Errc::TraceTooShort, fmt::format("trace '{}' has fewer than 2 points", name));
    for (std::size_t i = 1; i < time.size(); ++i)
        if (!(time[i] > time[i - 1]))
            throw Error(Errc::NonMonotonicTime, fmt::format("trace '{}' time not increasing at point {}", name, i));
}

Trace trace_from(Dataset const& dataset, std::string_view signal)
{
    auto const index = dataset.find(signal);
    if (index == Dataset::npos || index == 0)
    {
        std::string known;
        for (std::size_t i = 1; i < dataset.variables().size(); ++i)
            known += (known.empty() ? "" : ", ") + dataset.variables()[i].name;
        throw Error(Errc::UnknownSignal, fmt::format("no signal '{}' (available: {})", signal, known));
    }
    auto const& var = dataset.variables()[index];
    return Trace { var.name, dataset.time(), dataset.column(index), std::string(quantity_unit(var.quantity)) };
}

std::string_view measurement_kind_name(MeasurementKind kind) noexcept
{
    switch (kind)
    {
        case MeasurementKind::Mean: return "mean";
        case MeasurementKind::Ripple: return "ripple";
        case MeasurementKind::SwitchingFrequency: return "switching_frequency";
        case MeasurementKind::SettleTime: return "settle_time";
    }
    return "mean";
}

MeasurementKind measurement_kind_from_name(std::string_view name)
{
    auto const n = to_lower(name);
    if (n == "mean" || n == "get_mean_output_voltage" || n == "mean_output_voltage")
        return MeasurementKind::Mean;
    if (n == "ripple" || n == "get_ripple")
        return MeasurementKind::Ripple;
    if (n == "switching_frequency" || n == "get_switching_frequency" || n == "frequency")
        return MeasurementKind::SwitchingFrequency;
    if (n == "settle_time" || n == "get_settle_in_time" || n == "settle_in_time")
        return MeasurementKind::SettleTime;
    throw Error(Errc::InvalidArgument,
                fmt::format("unknown measurement kind '{}' (mean|ripple|switching_frequency|settle_time)", name));
}

std::string Measurement::render() const
{
    return fmt::format("{} {:.6g} {} (window {:.6g}..{:.6g})", measurement_kind_name(kind), value, unit, window.t_start, window.t_end);
}

namespace
{
    double interpolate(Trace const& tr, double t)
    {
        auto const& time = tr.time;
        if (t <= time.front())
            return tr.values.front();
        if (t >= time.back())
            return tr.values.back();
        auto const it = std::upper_bound(time.begin(), time.end(), t);
        auto const i = static_cast<std::size_t>(it - time.begin());
        auto const t0 = time[i - 1], t1 = time[i];
        auto const w = (t - t0) / (t1 - t0);
        return tr.values[i - 1] + w * (tr.values[i] - tr.values[i - 1]);
    }

    // Half-open index range [first, last) of samples with t0 <= t <= t1.
    std::pair<std::size_t, std::size_t> sample_range(Trace const& tr, double t0, double t1)
    {
        auto const first = std::lower_bound(tr.time.begin(), tr.time.end(), t0);
        auto const last = std::upper_bound(tr.time.begin(), tr.time.end(), t1);
        return { static_cast<std::size_t>(first - tr.time.begin()), static_cast<std::size_t>(last - tr.time.begin()) };
    }

    void check_window(Trace const& tr, SteadyWindow const& w)
    {
        tr.validate();
        auto const span = tr.time.back() - tr.time.front();
        auto const slack = 1e-9 * span;
        if (!(w.t_start < w.t_end) || w.t_start < tr.time.front() - slack || w.t_end > tr.time.back() + slack)
            throw Error(Errc::EmptyWindow,
                        fmt::format("window {:.6g}..{:.6g} is not inside trace '{}' ({:.6g}..{:.6g})", w.t_start, w.t_end, tr.name, tr.time.front(), tr.time.back()));
        auto const [first, last] = sample_range(tr, w.t_start, w.t_end);
        if (first >= last)
            throw Error(Errc::EmptyWindow, fmt::format("no samples of '{}' inside window", tr.name));
    }

    // Trapezoidal time-average over [t0, t1], with interpolated end points.
    double time_average(Trace const& tr, double t0, double t1)
    {
        auto const [first, last] = sample_range(tr, t0, t1);
        double area = 0.0;
        double prev_t = t0;
        double prev_v = interpolate(tr, t0);
        for (auto i = first; i < last; ++i)
        {
            area += 0.5 * (prev_v + tr.values[i]) * (tr.time[i] - prev_t);
            prev_t = tr.time[i];
            prev_v = tr.values[i];
        }
        area += 0.5 * (prev_v + interpolate(tr, t1)) * (t1 - prev_t);
        return area / (t1 - t0);
    }

    std::size_t next_pow2(std::size_t n)
    {
        std::size_t p = 1;
        while (p < n)
            p <<= 1;
        return p;
    }

    // FFTW's planner is not re-entrant; execution is.
    std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

    std::vector<double> magnitude_spectrum(std::vector<double>& samples)
    {
        auto const n = samples.size();
        std::vector<std::complex<double>> spectrum(n / 2 + 1);
        fftw_plan plan = nullptr;
        {
            std::lock_guard lock(planner_mutex());
            plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), samples.data(), reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
        }
        fftw_execute(plan);
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
        std::vector<double> mag(spectrum.size());
        std::transform(spectrum.begin(), spectrum.end(), mag.begin(), [](auto const& c) { return std::abs(c); });
        return mag;
    }
} // namespace

SteadyWindow steady_state_window(Trace const& trace, double fraction)
{
    trace.validate();
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(Errc::InvalidArgument, fmt::format("steady-state fraction {} outside (0, 1]", fraction));

    auto const t_end = trace.time.back();
    auto const t_start = t_end - fraction * (t_end - trace.time.front());
    SteadyWindow w { t_start, t_end, false };

    auto const mid = 0.5 * (t_start + t_end);
    auto const whole = time_average(trace, t_start, t_end);
    auto const first = time_average(trace, t_start, mid);
    auto const second = time_average(trace, mid, t_end);
    w.drifting = std::abs(second - first) > 0.01 * std::abs(whole);
    return w;
}

Measurement get_mean_output_voltage(Trace const& trace, SteadyWindow const& window)
{
    check_window(trace, window);
    Measurement m { MeasurementKind::Mean, time_average(trace, window.t_start, window.t_end), trace.unit, window, {} };
    if (window.drifting)
        m.diagnostics = "signal still drifting inside the window";
    return m;
}

Measurement get_ripple(Trace const& trace, SteadyWindow const& window)
{
    check_window(trace, window);
    auto const [first, last] = sample_range(trace, window.t_start, window.t_end);
    auto lo = std::min(interpolate(trace, window.t_start), interpolate(trace, window.t_end));
    auto hi = std::max(interpolate(trace, window.t_start), interpolate(trace, window.t_end));
    for (auto i = first; i < last; ++i)
    {
        lo = std::min(lo, trace.values[i]);
        hi = std::max(hi, trace.values[i]);
    }
    Measurement m { MeasurementKind::Ripple, hi - lo, trace.unit, window, {} };
    if (window.drifting)
        m.diagnostics = "signal still drifting inside the window";
    return m;
}

Measurement get_switching_frequency(Trace const& trace, SteadyWindow const& window)
{
    check_window(trace, window);
    auto const [first, last] = sample_range(trace, window.t_start, window.t_end);
    auto const n = std::max<std::size_t>(next_pow2(last - first), 16);
    auto const span = window.t_end - window.t_start;
    auto const dt = span / static_cast<double>(n);

    std::vector<double> samples(n);
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        samples[k] = interpolate(trace, window.t_start + static_cast<double>(k) * dt);
        scale += std::abs(samples[k]);
    }
    double const mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        auto const hann = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
        samples[k] = (samples[k] - mean) * hann;
    }

    auto const mag = magnitude_spectrum(samples);
    std::size_t peak = 1;
    for (std::size_t k = 2; k < mag.size(); ++k)
        if (mag[k] > mag[peak])
            peak = k;
    if (!(mag[peak] > 1e-9 * scale))
        throw Error(Errc::NoPeak, fmt::format("spectrum of '{}' is flat after DC removal", trace.name));

    // Parabola through the log-magnitudes of the peak bin and its neighbours.
    double offset = 0.0;
    if (peak + 1 < mag.size())
    {
        auto const tiny = 1e-300;
        auto const a = std::log(mag[peak - 1] + tiny);
        auto const b = std::log(mag[peak] + tiny);
        auto const c = std::log(mag[peak + 1] + tiny);
        auto const denom = a - 2.0 * b + c;
        if (denom < 0.0)
            offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    auto const frequency = (static_cast<double>(peak) + offset) / span;

    Measurement m { MeasurementKind::SwitchingFrequency, frequency, "Hz", window, {} };
    if (frequency * span < 8.0)
        m.diagnostics = fmt::format("window holds only {:.3g} periods; at least 8 recommended", frequency * span);
    return m;
}

Measurement get_settle_in_time(Trace const& trace)
{
    auto const window = steady_state_window(trace);
    auto const steady = get_mean_output_voltage(trace, window).value;

    double peak = 0.0;
    for (auto v: trace.values)
        peak = std::max(peak, std::abs(v));
    if (std::abs(steady) <= 1e-9 * peak || steady == 0.0)
        throw Error(Errc::NeverSettles, fmt::format("'{}' settles towards zero; a 90 % threshold is undefined", trace.name));
    if (window.drifting)
        throw Error(Errc::AmbiguousSteadyState, fmt::format("'{}' is still drifting in the last {:.0f} % of the record", trace.name, 100 * default_steady_fraction));

    auto const threshold = 0.9 * steady;
    auto const reached = [&](double v) { return steady > 0 ? v >= threshold : v <= threshold; };

    for (std::size_t i = 0; i < trace.values.size(); ++i)
    {
        if (!reached(trace.values[i]))
            continue;
        double t = trace.time[i];
        if (i > 0)
        {
            auto const v0 = trace.values[i - 1], v1 = trace.values[i];
            t = trace.time[i - 1] + (threshold - v0) / (v1 - v0) * (trace.time[i] - trace.time[i - 1]);
        }
        return Measurement { MeasurementKind::SettleTime, t, "s", window, fmt::format("threshold {:.6g} {}", threshold, trace.unit) };
    }
    throw Error(Errc::NeverSettles, fmt::format("'{}' never reaches 90 % of its steady value", trace.name));
}

Measurement read_feature(Dataset const& dataset, std::string_view signal, MeasurementKind kind)
{
    auto const trace = trace_from(dataset, signal);
    switch (kind)
    {
        case MeasurementKind::Mean: return get_mean_output_voltage(trace, steady_state_window(trace));
        case MeasurementKind::Ripple: return get_ripple(trace, steady_state_window(trace));
        case MeasurementKind::SwitchingFrequency: return get_switching_frequency(trace, steady_state_window(trace));
        case MeasurementKind::SettleTime: return get_settle_in_time(trace);
    }
    throw Error(Errc::InvalidArgument, "unknown measurement kind");
}

} // namespace spiceagent
