// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/benchmark.hpp>
#include <spiceagent/error.hpp>
#include <spiceagent/policies.hpp>

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

using namespace spiceagent;
using nlohmann::json;

namespace
{

Error error_of(auto&& f)
{
    try
    {
        f();
    }
    catch (Error const& e)
    {
        return e;
    }
    ADD_FAILURE() << "expected an error";
    return Error(Errc::InvalidArgument, "none");
}

std::filesystem::path questions_dir() { return fixtures::data_dir() / "questions"; }

json valid_doc()
{
    return json::parse(R"j({"schema":"spiceagent.questions/1","questions":[
      {"id":"q1","circuit":"../circuits/buck_reference.cir","category":"parameter_tuning",
       "prompt_template":"Make V(out) {target}.","target":{"value":0.1,"unit":"A"},
       "verification":{"tool":"ripple","signal":"I(L1)"}},
      {"id":"q2","circuit":"../circuits/buck_reference.cir","category":"topology_adaption",
       "prompt_template":"Add a bleeder.",
       "verification":{"tool":"pin_connected_via","pin_node":"out","target_node":"0","kind":"R","value":100000}}
    ]})j");
}

std::vector<BenchmarkQuestion> parse(json const& doc) { return parse_questions(doc.dump(), questions_dir()); }

EvalResult result(std::string id, bool solved, std::optional<double> ape = std::nullopt)
{
    EvalResult r;
    r.question_id = std::move(id);
    r.solved = solved;
    r.ape = ape;
    if (ape)
        r.measured = Measurement { MeasurementKind::Mean, 1.0 + *ape, "V", { 0.0, 1.0, false }, {} };
    r.termination = "final_answer";
    r.iterations_used = 2;
    if (!solved)
        r.failure_reason = "measured 1, V outside \"x\"";
    return r;
}

Report two_question_report(std::vector<std::vector<EvalResult>> runs)
{
    Report report;
    report.questions = { { "a", QuestionCategory::ParameterTuning, "buck" }, { "b", QuestionCategory::TopologyAdaption, "ctrl" } };
    report.runs = std::move(runs);
    aggregate(report);
    return report;
}

} // namespace

TEST(Questions, SampleFilesLoad)
{
    auto const sample = load_questions(questions_dir() / "sample_buck.json");
    EXPECT_EQ(sample.size(), 12u);
    std::size_t topology = 0;
    for (auto const& q: sample)
    {
        EXPECT_FALSE(q.deck.cards().empty()) << q.id;
        topology += q.category == QuestionCategory::TopologyAdaption;
    }
    EXPECT_EQ(topology, 2u);

    auto const ltc = load_questions(questions_dir() / "ltc7802_example.json");
    ASSERT_EQ(ltc.size(), 2u);
    EXPECT_EQ(ltc[0].target->magnitude, 38.0);
    ASSERT_TRUE(ltc[1].verification.topology);
    EXPECT_EQ(ltc[1].verification.topology->pin_node, "MODE");
    EXPECT_EQ(ltc[1].verification.topology->value, 100000.0);
}

TEST(Questions, DefaultsAndPathResolution)
{
    auto const qs = parse(valid_doc());
    ASSERT_EQ(qs.size(), 2u);
    EXPECT_EQ(qs[0].tolerance_pct, 5.0);
    EXPECT_EQ(qs[0].circuit_class, "unspecified");
    EXPECT_EQ(qs[0].verification.kind, MeasurementKind::Ripple);
    EXPECT_EQ(qs[0].circuit, (questions_dir() / "../circuits/buck_reference.cir").lexically_normal());
}

TEST(Questions, SchemaViolationsListEveryField)
{
    auto doc = valid_doc();
    doc["questions"][0].erase("target");
    doc["questions"][0]["category"] = "parameter_tuning";
    doc["questions"][1]["target"] = { { "value", 1 }, { "unit", "V" } };
    doc["questions"][1]["verification"]["kind"] = "Q";
    auto const e = error_of([&] { parse(doc); });
    EXPECT_EQ(e.code(), Errc::SchemaViolation);
    std::string const msg = e.what();
    EXPECT_NE(msg.find("questions[0].target: required for parameter_tuning"), std::string::npos) << msg;
    EXPECT_NE(msg.find("questions[1].target: not allowed for topology_adaption"), std::string::npos) << msg;
    EXPECT_NE(msg.find("questions[1].verification.kind"), std::string::npos) << msg;
}

TEST(Questions, MalformedDocuments)
{
    auto const code = [](std::string_view text) { return error_of([&] { parse_questions(text, questions_dir()); }).code(); };
    EXPECT_EQ(code("{ nope"), Errc::SchemaViolation);
    EXPECT_EQ(code(R"({"schema":"other/1","questions":[]})"), Errc::SchemaViolation);
    EXPECT_EQ(code(R"({"schema":"spiceagent.questions/1","questions":[]})"), Errc::SchemaViolation);

    auto dup = valid_doc();
    dup["questions"][1] = dup["questions"][0];
    EXPECT_EQ(error_of([&] { parse(dup); }).code(), Errc::SchemaViolation);

    auto placeholder = valid_doc();
    placeholder["questions"][0]["prompt_template"] = "no placeholder";
    EXPECT_EQ(error_of([&] { parse(placeholder); }).code(), Errc::SchemaViolation);

    auto zero = valid_doc();
    zero["questions"][0]["target"]["value"] = 0;
    EXPECT_EQ(error_of([&] { parse(zero); }).code(), Errc::SchemaViolation);

    auto tool = valid_doc();
    tool["questions"][0]["verification"]["tool"] = "rms";
    EXPECT_EQ(error_of([&] { parse(tool); }).code(), Errc::SchemaViolation);
}

TEST(Questions, MissingFixtures)
{
    auto doc = valid_doc();
    doc["questions"][0]["circuit"] = "../circuits/absent.cir";
    EXPECT_EQ(error_of([&] { parse(doc); }).code(), Errc::MissingFixture);
    EXPECT_EQ(error_of([] { load_questions("/nonexistent/questions.json"); }).code(), Errc::MissingFixture);
}

TEST(Prompt, TargetFormattingAndNetlist)
{
    EXPECT_EQ(format_si(0.1, "A"), "100 mA");
    EXPECT_EQ(format_si(500e-6, "V"), "500 µV");
    EXPECT_EQ(format_si(250e3, "Hz"), "250 kHz");
    EXPECT_EQ(format_si(3.3, "V"), "3.3 V");
    EXPECT_EQ(format_si(0.0, "V"), "0 V");

    auto const q = parse(valid_doc()).front();
    auto const prompt = render_prompt(q);
    EXPECT_TRUE(prompt.starts_with("Make V(out) 100 mA.\n\nNetlist:\n```spice\n")) << prompt;
    EXPECT_TRUE(prompt.ends_with("```\n"));
    EXPECT_EQ(parse_netlist(prompt.substr(prompt.find("```spice\n") + 9, prompt.rfind("```") - prompt.find("```spice\n") - 9)),
              q.deck);
}

TEST(Metrics, ApeAndTolerance)
{
    EXPECT_DOUBLE_EQ(absolute_percentage_error(100, 95), 5.0);
    EXPECT_DOUBLE_EQ(absolute_percentage_error(20e-3, 120e-3), 500.0);
    EXPECT_DOUBLE_EQ(absolute_percentage_error(-2, -1), 50.0);
    EXPECT_EQ(error_of([] { absolute_percentage_error(0, 1); }).code(), Errc::InvalidArgument);

    EXPECT_TRUE(within_tolerance(18e-3, 18.5e-3, 5));
    EXPECT_FALSE(within_tolerance(18e-3, 19e-3, 5));
    EXPECT_TRUE(within_tolerance(-5, -5.2, 5));

    oracle::Rng rng(21);
    for (int i = 0; i < 1000; ++i)
    {
        auto const a = (rng.coin() ? 1 : -1) * rng.log_uniform(1e-9, 1e6);
        auto const f = a * rng.uniform(-2, 3);
        EXPECT_NEAR(absolute_percentage_error(a, f), oracle::ape(a, f), 1e-9 * (1 + oracle::ape(a, f)));
        auto const tol = rng.uniform(0.1, 50);
        if (std::abs(oracle::ape(a, f) - tol) > 1e-9)
        {
            EXPECT_EQ(within_tolerance(a, f, tol), oracle::ape(a, f) <= tol);
        }
    }
}

TEST(Metrics, MedianIsRobustToOutliers)
{
    EXPECT_DOUBLE_EQ(median({ 3, 1, 2 }), 2.0);
    EXPECT_DOUBLE_EQ(median({ 4, 1, 3, 2 }), 2.5);
    EXPECT_DOUBLE_EQ(median({ 1, 2, 3, 4, 1e9 }), 3.0);
    EXPECT_EQ(error_of([] { median({}); }).code(), Errc::InvalidArgument);
}

TEST(Aggregate, MedianExcludesTopologyAndCountsBreakdowns)
{
    // Topology results carry no APE; a stray one must still be ignored.
    auto stray = result("b", true, 999.0);
    auto const report = two_question_report({ { result("a", true, 2.0), stray }, { result("a", false, 30.0), result("b", false) } });
    EXPECT_DOUBLE_EQ(report.solve_rate, 50.0);
    EXPECT_EQ(report.run_solve_rates, (std::vector<double> { 100.0, 0.0 }));
    ASSERT_TRUE(report.median_ape);
    EXPECT_DOUBLE_EQ(*report.median_ape, 16.0);
    ASSERT_EQ(report.by_category.size(), 2u);
    EXPECT_EQ(report.by_category[0].key, "parameter_tuning");
    EXPECT_EQ(report.by_category[0].solved, 1u);
    EXPECT_EQ(report.by_category[0].total, 2u);
    EXPECT_EQ(report.by_class[1].key, "ctrl");
}

TEST(Aggregate, ConfidenceInterval)
{
    auto const same = two_question_report({ { result("a", true, 1.0), result("b", false) }, { result("a", true, 1.0), result("b", false) } });
    ASSERT_TRUE(same.solve_rate_ci);
    EXPECT_DOUBLE_EQ(same.solve_rate_ci->first, 50.0);
    EXPECT_DOUBLE_EQ(same.solve_rate_ci->second, 50.0);

    auto const single = two_question_report({ { result("a", true, 1.0), result("b", true) } });
    EXPECT_FALSE(single.solve_rate_ci);
    EXPECT_EQ(error_of([] { t_confidence_interval({ 1.0 }); }).code(), Errc::InvalidArgument);

    oracle::Rng rng(8);
    for (int i = 0; i < 20; ++i)
    {
        std::vector<double> xs(2 + rng.index(9));
        for (auto& x: xs)
            x = rng.uniform(0, 100);
        auto const n = static_cast<double>(xs.size());
        auto const mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
        double ss = 0;
        for (auto x: xs)
            ss += (x - mean) * (x - mean);
        auto const half = oracle::t_upper_quantile(0.025, n - 1) * std::sqrt(ss / (n - 1)) / std::sqrt(n);
        auto const [lo, hi] = t_confidence_interval(xs);
        EXPECT_NEAR(lo, mean - half, 1e-4 * (1 + half)) << xs.size();
        EXPECT_NEAR(hi, mean + half, 1e-4 * (1 + half)) << xs.size();
    }
}

TEST(Report, CsvRoundTrip)
{
    auto const report = two_question_report(
        { { result("a", true, 2.5), result("b", false) }, { result("a", false, 12.0), result("b", true) }, { result("a", true, 0.5), result("b", true) } });
    auto const csv = report_csv(report);
    EXPECT_TRUE(csv.starts_with("run,question_id,category,circuit_class,solved,measured,unit,ape_pct,termination,iterations,failure_reason\n"));
    auto const back = report_from_csv(csv);
    EXPECT_EQ(report_csv(back), csv);
    EXPECT_DOUBLE_EQ(back.solve_rate, report.solve_rate);
    EXPECT_EQ(back.run_solve_rates, report.run_solve_rates);
    EXPECT_EQ(*back.median_ape, *report.median_ape);
    EXPECT_EQ(back.runs[0][1].failure_reason, report.runs[0][1].failure_reason);
    EXPECT_EQ(report_summary(back), report_summary(report));
    EXPECT_EQ(report_table(back), report_table(report));

    EXPECT_EQ(error_of([] { report_from_csv("wrong,header\n"); }).code(), Errc::SchemaViolation);
}

TEST(Report, TableLines)
{
    auto const report = two_question_report({ { result("a", true, 2.0), result("b", false) } });
    auto const table = report_table(report);
    EXPECT_NE(table.find("solve_rate: 50.0"), std::string::npos) << table;
    EXPECT_NE(table.find("solve_rate_ci95: n/a"), std::string::npos) << table;
    EXPECT_NE(table.find("median_ape: 2.00"), std::string::npos) << table;
    auto const summary = report_summary(report);
    EXPECT_DOUBLE_EQ(summary["solve_rate"].get<double>(), 50.0);
}

TEST(Evaluate, FailureReasons)
{
    auto const qs = load_questions(questions_dir() / "sample_buck.json");
    auto const& mean6 = *std::find_if(qs.begin(), qs.end(), [](auto const& q) { return q.id == "buck-mean-6v"; });
    auto const& topo = *std::find_if(qs.begin(), qs.end(), [](auto const& q) { return q.category == QuestionCategory::TopologyAdaption; });

    EXPECT_EQ(evaluate_answer(mean6, std::nullopt, {}).failure_reason, "no parseable netlist in the answer");

    auto const ok = evaluate_answer(mean6, mean6.deck, {});
    EXPECT_TRUE(ok.solved) << ok.failure_reason.value_or("");
    EXPECT_LT(*ok.ape, 5.0);

    auto const off = evaluate_answer(mean6, apply_knob(mean6.deck, detect_buck_pattern(mean6.deck), Knob::InputVoltage, 20.0), {});
    EXPECT_FALSE(off.solved);
    EXPECT_TRUE(off.failure_reason->starts_with("measured ")) << *off.failure_reason;
    EXPECT_NEAR(*off.ape, oracle::ape(6.0, off.measured->value), 1e-9);

    auto const unsolved_topo = evaluate_answer(topo, topo.deck, {});
    EXPECT_FALSE(unsolved_topo.solved);
    EXPECT_TRUE(unsolved_topo.failure_reason->starts_with("no R100k bridge between ")) << *unsolved_topo.failure_reason;
    EXPECT_FALSE(unsolved_topo.ape);

    auto const broken = remove_component(mean6.deck, "D1");
    auto const sim = evaluate_answer(mean6, broken, {});
    EXPECT_FALSE(sim.solved);
    EXPECT_TRUE(sim.failure_reason->starts_with("SimulationFailed: ")) << *sim.failure_reason;
}

TEST(Run, OracleSolvesEverythingAndNoopSolvesTheBaseline)
{
    auto const qs = load_questions(questions_dir() / "sample_buck.json");
    fixtures::TempDir dir;
    BenchmarkConfig cfg;
    cfg.n_runs = 2;
    cfg.workers = 2;
    cfg.transcript_dir = dir.path;
    auto const oracle_report = run_benchmark(qs, [](auto const& q, std::size_t) { return make_oracle_agent(q); }, cfg);
    EXPECT_DOUBLE_EQ(oracle_report.solve_rate, 100.0);
    EXPECT_EQ(oracle_report.n_runs(), 2u);
    ASSERT_TRUE(oracle_report.solve_rate_ci);
    EXPECT_DOUBLE_EQ(oracle_report.solve_rate_ci->second - oracle_report.solve_rate_ci->first, 0.0);
    for (std::size_t i = 1; i < oracle_report.questions.size(); ++i)
        EXPECT_LT(oracle_report.questions[i - 1].id, oracle_report.questions[i].id);
    EXPECT_TRUE(std::filesystem::exists(dir.path / "run1" / "buck-mean-6v.json"));
    auto const transcript = json::parse(std::ifstream(dir.path / "run0" / "buck-mean-6v.json"));
    EXPECT_EQ(transcript["termination"], "final_answer");

    cfg.transcript_dir.reset();
    cfg.n_runs = 1;
    auto const noop = run_benchmark(qs, [](auto const&, std::size_t) { return make_noop_agent(); }, cfg);
    EXPECT_NEAR(noop.solve_rate, 100.0 * 2 / 12, 1e-9);
    EXPECT_GE(oracle_report.solve_rate - noop.solve_rate, 50.0);

    EXPECT_EQ(error_of([&] { run_benchmark({}, [](auto const&, std::size_t) { return make_noop_agent(); }, cfg); }).code(), Errc::ConfigError);
    cfg.n_runs = 0;
    EXPECT_EQ(error_of([&] { run_benchmark(qs, [](auto const&, std::size_t) { return make_noop_agent(); }, cfg); }).code(), Errc::ConfigError);
}

TEST(Run, ControllerQuestionWithMockEngine)
{
    auto qs = load_questions(questions_dir() / "ltc7802_example.json");
    qs.resize(1);
    EngineConfig engine;
    engine.command_template = std::string(SPICEAGENT_MOCK_ENGINE) + " {netlist_path} {raw_path}";
    BenchmarkConfig cfg;
    cfg.session.simulator = { EngineKind::Auto, engine };
    RetrievalConfig rc;
    rc.chunk_size = 120;
    rc.overlap = 40;
    cfg.session.datasheet = std::make_shared<RetrievalIndex const>(index(chunk_document(fixtures::read("datasheets/ltc7802_excerpt.txt"), rc), rc));
    auto const report = run_benchmark(
        qs,
        [](auto const&, std::size_t) {
            return std::make_unique<ScriptedClient>(ScriptedClient::from_file(fixtures::data_dir() / "scripts/ltc7802_raise_output.json"));
        },
        cfg);
    auto const& r = report.runs[0][0];
    EXPECT_EQ(r.termination, "final_answer");
    EXPECT_TRUE(r.solved) << r.failure_reason.value_or("");
    EXPECT_NEAR(r.measured->value, 0.8 * (1 + 1050e3 / 22.1e3), 0.01);
}
