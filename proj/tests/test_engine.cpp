// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/engine.hpp>
#include <spiceagent/error.hpp>

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>

using namespace spiceagent;

namespace
{

Netlist reference_deck() { return parse_netlist(fixtures::read("circuits/buck_reference.cir")); }

// Plain statistics over the recorded tail, computed here rather than via the measure module.
struct Tail
{
    double mean = 0, min = 0, max = 0;
};

Tail tail_of(Dataset const& ds, std::string_view signal, double fraction = 0.2)
{
    auto const idx = ds.find(signal);
    EXPECT_NE(idx, Dataset::npos) << signal;
    auto const t = ds.time();
    auto const v = ds.column(idx);
    auto const t0 = t.back() - fraction * (t.back() - t.front());
    Tail out { 0, 1e300, -1e300 };
    double area = 0, first = -1;
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        if (t[i - 1] < t0)
            continue;
        if (first < 0)
            first = t[i - 1];
        area += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
        out.min = std::min({ out.min, v[i], v[i - 1] });
        out.max = std::max({ out.max, v[i], v[i - 1] });
    }
    out.mean = area / (t.back() - first);
    return out;
}

template <typename F>
double seconds(F&& f)
{
    auto const start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

EngineConfig mock_engine()
{
    EngineConfig cfg;
    cfg.command_template = std::string(SPICEAGENT_MOCK_ENGINE) + " {netlist_path} {raw_path}";
    cfg.timeout = std::chrono::seconds(30);
    return cfg;
}

Errc code_of(auto&& f)
{
    try
    {
        f();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return Errc::InvalidArgument;
}

} // namespace

TEST(Transient, ReadsBothDirectiveForms)
{
    auto spec = transient_from_netlist(reference_deck());
    ASSERT_TRUE(spec);
    EXPECT_DOUBLE_EQ(spec->t_stop, 2e-3);
    EXPECT_DOUBLE_EQ(spec->t_step_hint, 0.0);

    spec = transient_from_netlist(parse_netlist("V1 a 0 1\n.tran 3m\n"));
    ASSERT_TRUE(spec);
    EXPECT_DOUBLE_EQ(spec->t_stop, 3e-3);
    EXPECT_FALSE(transient_from_netlist(parse_netlist("V1 a 0 1\n")));
}

TEST(Detect, ReferenceFixture)
{
    auto const c = detect_buck_pattern(reference_deck());
    EXPECT_DOUBLE_EQ(c.params.v_in, 12.0);
    EXPECT_DOUBLE_EQ(c.params.duty, 0.5);
    EXPECT_DOUBLE_EQ(c.params.f_switch, 500e3);
    EXPECT_DOUBLE_EQ(c.params.inductance, 10e-6);
    EXPECT_DOUBLE_EQ(c.params.capacitance, 100e-6);
    EXPECT_DOUBLE_EQ(c.params.load, 6.0);
    EXPECT_EQ(c.output_node, "OUT");
    EXPECT_EQ(c.inductor, "L1");
    EXPECT_EQ(c.input_source, "V1");
}

TEST(Detect, RenamedDeckAndSignalNames)
{
    auto const deck = parse_netlist(fixtures::read("circuits/buck_renamed.cir"));
    auto const c = detect_buck_pattern(deck);
    EXPECT_EQ(c.output_node, "vo");
    EXPECT_EQ(c.switch_node, "n_phase");
    EXPECT_EQ(c.inductor, "Lf");
    auto const ds = simulate(deck, {});
    EXPECT_NE(ds.find("V(vo)"), Dataset::npos);
    EXPECT_NE(ds.find("I(Lf)"), Dataset::npos);
    EXPECT_NE(ds.find("V(n_phase)"), Dataset::npos);
}

TEST(Detect, ParallelLoadsAndPulseAtSwitchNode)
{
    auto const deck = parse_netlist("V2 sw 0 PULSE(0 10 0 1n 1n 0.6u 2u)\nL1 sw out 10u\nC1 out 0 10u\nR1 out 0 10\nR2 out 0 10\n");
    auto const c = detect_buck_pattern(deck);
    EXPECT_TRUE(c.pulse_at_switch_node);
    EXPECT_DOUBLE_EQ(c.params.load, 5.0);
    EXPECT_DOUBLE_EQ(c.params.duty, 0.3);
    EXPECT_DOUBLE_EQ(c.params.v_in, 10.0);
}

TEST(Detect, Mismatches)
{
    auto const ltc = parse_netlist(fixtures::read("circuits/ltc7802_like.cir"));
    EXPECT_EQ(code_of([&] { detect_buck_pattern(ltc); }), Errc::PatternMismatch);
    auto const no_diode = remove_component(reference_deck(), "D1");
    EXPECT_EQ(code_of([&] { detect_buck_pattern(no_diode); }), Errc::PatternMismatch);
    auto const two_caps = add_component(reference_deck(), Component::parse("C2 OUT 0 1u"));
    EXPECT_EQ(code_of([&] { detect_buck_pattern(two_caps); }), Errc::PatternMismatch);
    auto const series_r = add_component(reference_deck(), Component::parse("R9 OUT X 1k"));
    EXPECT_EQ(code_of([&] { detect_buck_pattern(series_r); }), Errc::PatternMismatch);
}

TEST(Horizon, DefaultsFollowTimeConstant)
{
    BuckParams p { 12, 10e-6, 100e-6, 6, 500e3, 0.5, 0 };
    auto const spec = default_transient(p);
    // tau = 2RC = 1.2 ms -> 15 tau = 18 ms = 9000 periods (ceil may add one); record the last 100 periods.
    EXPECT_NEAR(spec.t_stop, 9000 * 2e-6, 2e-6 + 1e-12);
    EXPECT_NEAR(spec.t_stop - spec.t_start_record, 100 * 2e-6, 1e-12);
    auto const startup = default_transient(p, true);
    EXPECT_EQ(startup.t_start_record, 0.0);
    EXPECT_NEAR(startup.t_stop, 6000 * 2e-6, 2e-6 + 1e-12);

    BuckParams fast { 12, 1e-6, 1e-6, 1, 100e3, 0.5, 0 };
    EXPECT_NEAR(default_transient(fast).t_stop, 400 / 100e3, 1e-12);

    BuckParams slow { 12, 1e-3, 1, 1e3, 1e6, 0.5, 0 };
    EXPECT_NEAR(default_transient(slow).t_stop, 20000 / 1e6, 1e-12);
}

TEST(Physics, ContinuousConductionMatchesClosedForm)
{
    auto const deck = reference_deck();
    std::optional<Dataset> ds;
    auto const elapsed = seconds([&] { ds = simulate(deck, {}); });
    auto const* out = &*ds;
    EXPECT_LT(elapsed, 5.0);

    auto const vout = tail_of(*out, "V(out)");
    EXPECT_NEAR(vout.mean, oracle::buck_vout(12, 0.5), 0.02 * 6.0);
    auto const il = tail_of(*out, "I(L1)");
    auto const di = oracle::buck_inductor_ripple(12, 0.5, 10e-6, 500e3);
    EXPECT_NEAR(il.max - il.min, di, 0.05 * di);
    auto const dv = oracle::buck_output_ripple(di, 100e-6, 500e3);
    EXPECT_NEAR(vout.max - vout.min, dv, 0.10 * dv);
    EXPECT_GT(il.min, 0.0);
}

TEST(Physics, RandomCcmOperatingPoints)
{
    oracle::Rng rng(11);
    for (int i = 0; i < 6; ++i)
    {
        BuckParams p;
        p.v_in = rng.uniform(5, 48);
        p.duty = rng.uniform(0.2, 0.8);
        p.f_switch = rng.log_uniform(100e3, 2e6);
        p.load = rng.uniform(2, 20);
        // Deep CCM: ripple at most 40 % of the load current.
        auto const i_load = p.duty * p.v_in / p.load;
        p.inductance = p.duty * p.v_in * (1 - p.duty) / (0.4 * i_load * p.f_switch) * rng.uniform(1, 3);
        // Keep 15 tau inside the 20000-period horizon cap.
        auto const c_max = std::min(200e-6, 20000.0 / (30.0 * p.load * p.f_switch));
        p.capacitance = rng.log_uniform(c_max / 20, c_max);
        auto const ds = run_reference_buck(p, default_transient(p));
        auto const vout = tail_of(ds, "V(out)");
        EXPECT_NEAR(vout.mean, oracle::buck_vout(p.v_in, p.duty), 0.02 * p.duty * p.v_in) << i;
        auto const il = tail_of(ds, "I(L1)");
        auto const di = oracle::buck_inductor_ripple(p.v_in, p.duty, p.inductance, p.f_switch);
        EXPECT_NEAR(il.max - il.min, di, 0.05 * di) << i;
    }
}

TEST(Physics, DiscontinuousAtHundredTimesLoad)
{
    auto const deck = set_component_value(reference_deck(), "Rload", { 600, "" });
    std::optional<Dataset> ds;
    EXPECT_LT(seconds([&] { ds = simulate(deck, {}); }), 5.0);
    auto const il = tail_of(*ds, "I(L1)");
    EXPECT_EQ(il.min, 0.0);
    auto const vout = tail_of(*ds, "V(out)");
    auto const expected = oracle::buck_dcm_vout(12, 0.5, 10e-6, 500e3, 600);
    EXPECT_NEAR(vout.mean, expected, 0.02 * expected);
    EXPECT_GT(vout.mean, 6.0 * 1.5);
}

TEST(Physics, EsrAddsRipple)
{
    BuckParams p { 12, 10e-6, 100e-6, 6, 500e3, 0.5, 0.0 };
    auto ideal = tail_of(run_reference_buck(p, default_transient(p)), "V(out)");
    p.esr = 0.01;
    auto with_esr = tail_of(run_reference_buck(p, default_transient(p)), "V(out)");
    // ESR ripple = esr * dI = 6 mV dominates the 1.5 mV capacitive ripple.
    EXPECT_GT(with_esr.max - with_esr.min, 3 * (ideal.max - ideal.min));
}

TEST(Physics, StartupRecordBeginsAtZero)
{
    auto const ds = simulate(reference_deck(), {}, true);
    EXPECT_EQ(ds.time().front(), 0.0);
    EXPECT_EQ(ds.column(ds.find("V(out)")).front(), 0.0);
}

TEST(Physics, StepTooCoarse)
{
    BuckParams p { 12, 10e-6, 100e-6, 6, 500e3, 0.5, 0.0 };
    TransientSpec spec { 1e-3, 2e-6 / 10, 0 };
    EXPECT_EQ(code_of([&] { run_reference_buck(p, spec); }), Errc::StepTooCoarse);
    p.duty = 1.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(External, MockControllerEngine)
{
    auto const deck = parse_netlist(fixtures::read("circuits/ltc7802_like.cir"));
    fixtures::TempDir work;
    auto cfg = mock_engine();
    cfg.working_dir = work.path;
    auto const ds = simulate(deck, { EngineKind::Auto, cfg });
    auto const vout = tail_of(ds, "V(out)");
    EXPECT_NEAR(vout.mean, 0.8 * (1 + 470e3 / 22.1e3), 0.01);
    EXPECT_TRUE(std::filesystem::is_empty(work.path)) << "job directory left behind";

    cfg.keep_artifacts = true;
    simulate(deck, { EngineKind::External, cfg });
    EXPECT_FALSE(std::filesystem::is_empty(work.path));
}

TEST(External, FailureModes)
{
    auto const deck = parse_netlist(fixtures::read("circuits/ltc7802_like.cir"));
    auto const spec = TransientSpec { 1e-3, 0, 0 };
    EngineConfig cfg;

    cfg.command_template = "/nonexistent/simulator {netlist_path}";
    EXPECT_EQ(code_of([&] { run_external(deck, spec, cfg); }), Errc::EngineNotFound);

    cfg.command_template = "false {netlist_path}";
    EXPECT_EQ(code_of([&] { run_external(deck, spec, cfg); }), Errc::EngineFailure);

    cfg.command_template = "true {netlist_path}";
    EXPECT_EQ(code_of([&] { run_external(deck, spec, cfg); }), Errc::RawMissing);

    cfg.command_template = "sh -c 'sleep 5' {netlist_path}";
    cfg.timeout = std::chrono::milliseconds(200);
    Errc code {};
    EXPECT_LT(seconds([&] { code = code_of([&] { run_external(deck, spec, cfg); }); }), 2.0);
    EXPECT_EQ(code, Errc::EngineTimeout);

    cfg.command_template = "true";
    EXPECT_EQ(code_of([&] { cfg.validate(); }), Errc::ConfigError);

    // Over the controller's 40 V rating the mock refuses to run.
    auto const hot = set_component_value(deck, "V1", { 48, "" });
    EXPECT_EQ(code_of([&] { run_external(hot, spec, mock_engine()); }), Errc::EngineFailure);
}

TEST(Frontend, EngineSelection)
{
    auto const ltc = parse_netlist(fixtures::read("circuits/ltc7802_like.cir"));
    EXPECT_EQ(code_of([&] { simulate(ltc, {}); }), Errc::PatternMismatch);
    EXPECT_EQ(code_of([&] { simulate(ltc, { EngineKind::Reference, mock_engine() }); }), Errc::PatternMismatch);
    EXPECT_EQ(code_of([&] { simulate(reference_deck(), { EngineKind::External, std::nullopt }); }), Errc::ConfigError);
    EXPECT_EQ(engine_kind_from_name("External"), EngineKind::External);
    EXPECT_EQ(code_of([] { engine_kind_from_name("ltspice"); }), Errc::ConfigError);
}
