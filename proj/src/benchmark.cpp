// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/benchmark.hpp>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace spiceagent
{

using nlohmann::json;

std::string_view category_name(QuestionCategory category) noexcept
{
    switch (category)
    {
        case QuestionCategory::ParameterTuning: return "parameter_tuning";
        case QuestionCategory::TopologyAdaption: return "topology_adaption";
    }
    return "parameter_tuning";
}

namespace
{
    constexpr std::string_view placeholder = "{target}";

    std::optional<QuestionCategory> category_from_name(std::string_view name)
    {
        if (name == "parameter_tuning")
            return QuestionCategory::ParameterTuning;
        if (name == "topology_adaption")
            return QuestionCategory::TopologyAdaption;
        return std::nullopt;
    }

    std::string read_text(std::filesystem::path const& path)
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    }

    /// Collects field-level problems for one question.
    struct Checker
    {
        std::vector<std::string>& problems;
        std::string where;

        void fail(std::string_view field, std::string_view what) { problems.push_back(fmt::format("{}.{}: {}", where, field, what)); }

        std::optional<std::string> string(json const& q, char const* field, bool required = true)
        {
            if (!q.contains(field))
            {
                if (required)
                    fail(field, "required");
                return std::nullopt;
            }
            if (!q.at(field).is_string() || q.at(field).get<std::string>().empty())
            {
                fail(field, "must be a non-empty string");
                return std::nullopt;
            }
            return q.at(field).get<std::string>();
        }

        std::optional<double> number(json const& q, char const* field, bool required = true)
        {
            if (!q.contains(field))
            {
                if (required)
                    fail(field, "required");
                return std::nullopt;
            }
            if (!q.at(field).is_number())
            {
                fail(field, "must be a number");
                return std::nullopt;
            }
            return q.at(field).get<double>();
        }
    };

    std::optional<BenchmarkQuestion> parse_question(json const& q, std::string const& where, std::vector<std::string>& problems,
                                                    std::filesystem::path const& base_dir, std::vector<std::string>& missing)
    {
        Checker check { problems, where };
        if (!q.is_object())
        {
            problems.push_back(fmt::format("{}: must be an object", where));
            return std::nullopt;
        }
        auto const before = problems.size();
        BenchmarkQuestion question;

        auto const id = check.string(q, "id");
        auto const circuit = check.string(q, "circuit");
        auto const klass = check.string(q, "circuit_class", false);
        auto const category = check.string(q, "category");
        auto const prompt = check.string(q, "prompt_template");
        if (id)
            question.id = *id;
        question.circuit_class = klass.value_or("unspecified");
        if (prompt)
            question.prompt_template = *prompt;
        if (category)
        {
            if (auto c = category_from_name(*category))
                question.category = *c;
            else
                check.fail("category", "must be parameter_tuning or topology_adaption");
        }
        bool const has_placeholder = prompt && prompt->find(placeholder) != std::string::npos;

        if (question.category == QuestionCategory::ParameterTuning)
        {
            if (!q.contains("target"))
                check.fail("target", "required for parameter_tuning");
            else if (!q.at("target").is_object())
                check.fail("target", "must be an object with value and unit");
            else
            {
                Checker sub { problems, where + ".target" };
                auto const value = sub.number(q.at("target"), "value");
                auto const unit = sub.string(q.at("target"), "unit");
                if (value && *value == 0.0)
                    sub.fail("value", "must be non-zero");
                if (value && unit)
                    question.target = PhysicalValue { *value, *unit };
            }
            if (auto tol = check.number(q, "tolerance_pct", false))
            {
                if (!(*tol > 0.0))
                    check.fail("tolerance_pct", "must be positive");
                question.tolerance_pct = *tol;
            }
            if (prompt && !has_placeholder)
                check.fail("prompt_template", "parameter_tuning prompts need a {target} placeholder");
        }
        else
        {
            if (q.contains("target"))
                check.fail("target", "not allowed for topology_adaption");
            if (q.contains("tolerance_pct"))
                check.fail("tolerance_pct", "not allowed for topology_adaption");
            if (has_placeholder)
                check.fail("prompt_template", "topology_adaption prompts have no target to fill in");
        }

        if (!q.contains("verification") || !q.at("verification").is_object())
            check.fail("verification", "required object");
        else
        {
            auto const& v = q.at("verification");
            Checker sub { problems, where + ".verification" };
            auto const tool = sub.string(v, "tool");
            if (tool)
                question.verification.tool = *tool;
            if (question.category == QuestionCategory::ParameterTuning)
            {
                if (tool)
                {
                    try
                    {
                        question.verification.kind = measurement_kind_from_name(*tool);
                    }
                    catch (Error const&)
                    {
                        sub.fail("tool", fmt::format("unknown measurement '{}'", *tool));
                    }
                }
                if (auto signal = sub.string(v, "signal"))
                    question.verification.signal = *signal;
            }
            else
            {
                if (tool && *tool != "pin_connected_via")
                    sub.fail("tool", "topology_adaption supports pin_connected_via only");
                TopologyPredicate p;
                auto const pin = sub.string(v, "pin_node");
                auto const target = sub.string(v, "target_node");
                auto const kind = sub.string(v, "kind");
                auto const value = sub.number(v, "value");
                if (kind)
                {
                    p.kind = kind_from_name(*kind);
                    if (kind->size() != 1 || kind_unit(p.kind).empty())
                        sub.fail("kind", "must be one of R, L, C, V, I");
                }
                if (value && !(*value > 0.0))
                    sub.fail("value", "must be positive");
                if (pin && target && value)
                {
                    p.pin_node = *pin;
                    p.target_node = *target;
                    p.value = *value;
                    question.verification.topology = p;
                }
            }
        }

        if (circuit)
        {
            std::filesystem::path path(*circuit);
            if (path.is_relative())
                path = base_dir / path;
            question.circuit = path.lexically_normal();
            if (!std::filesystem::exists(question.circuit))
                missing.push_back(fmt::format("{}: circuit '{}' not found", where, question.circuit.string()));
            else
            {
                try
                {
                    question.deck = parse_netlist(read_text(question.circuit));
                }
                catch (Error const& e)
                {
                    check.fail("circuit", fmt::format("'{}' does not parse: {}", question.circuit.string(), e.what()));
                }
            }
        }
        if (problems.size() != before)
            return std::nullopt;
        return question;
    }
} // namespace

std::vector<BenchmarkQuestion> parse_questions(std::string_view json_text, std::filesystem::path const& base_dir)
{
    json doc;
    try
    {
        doc = json::parse(json_text);
    }
    catch (json::parse_error const& e)
    {
        throw Error(Errc::SchemaViolation, fmt::format("not valid JSON: {}", e.what()));
    }
    if (!doc.is_object())
        throw Error(Errc::SchemaViolation, "top level must be an object");
    if (doc.value("schema", std::string {}) != questions_schema_id)
        throw Error(Errc::SchemaViolation, fmt::format("schema: expected \"{}\"", questions_schema_id));
    if (!doc.contains("questions") || !doc.at("questions").is_array() || doc.at("questions").empty())
        throw Error(Errc::SchemaViolation, "questions: must be a non-empty array");

    std::vector<std::string> problems, missing;
    std::vector<BenchmarkQuestion> out;
    std::set<std::string> ids;
    auto const& list = doc.at("questions");
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        auto const where = fmt::format("questions[{}]", i);
        if (auto q = parse_question(list[i], where, problems, base_dir, missing))
        {
            if (!ids.insert(q->id).second)
                problems.push_back(fmt::format("{}.id: duplicate id '{}'", where, q->id));
            out.push_back(std::move(*q));
        }
    }
    if (!problems.empty())
        throw Error(Errc::SchemaViolation, fmt::format("{}", fmt::join(problems, "; ")));
    if (!missing.empty())
        throw Error(Errc::MissingFixture, fmt::format("{}", fmt::join(missing, "; ")));
    return out;
}

std::vector<BenchmarkQuestion> load_questions(std::filesystem::path const& file)
{
    if (!std::filesystem::exists(file))
        throw Error(Errc::MissingFixture, fmt::format("question file '{}' not found", file.string()));
    return parse_questions(read_text(file), file.parent_path());
}

std::string format_si(double value, std::string_view unit)
{
    static constexpr std::pair<double, char const*> prefixes[] {
        { 1e12, "T" }, { 1e9, "G" }, { 1e6, "M" }, { 1e3, "k" }, { 1.0, "" },
        { 1e-3, "m" }, { 1e-6, "µ" }, { 1e-9, "n" }, { 1e-12, "p" }, { 1e-15, "f" },
    };
    auto const magnitude = std::abs(value);
    if (magnitude == 0.0 || !std::isfinite(value))
        return fmt::format("{:g} {}", value, unit);
    for (auto const& [scale, prefix]: prefixes)
        if (magnitude >= scale * (1.0 - 1e-12))
            return fmt::format("{:.6g} {}{}", value / scale, prefix, unit);
    return fmt::format("{:.6g} f{}", value / 1e-15, unit);
}

std::string render_prompt(BenchmarkQuestion const& question)
{
    auto text = question.prompt_template;
    if (question.target)
        if (auto const pos = text.find(placeholder); pos != std::string::npos)
            text.replace(pos, placeholder.size(), format_si(question.target->magnitude, question.target->unit));
    return fmt::format("{}\n\nNetlist:\n```spice\n{}```\n", text, serialize_netlist(question.deck));
}

double absolute_percentage_error(double target, double measured)
{
    if (target == 0.0)
        throw Error(Errc::InvalidArgument, "APE is undefined for a zero target");
    return 100.0 * std::abs(target - measured) / std::abs(target);
}

bool within_tolerance(double target, double measured, double tolerance_pct)
{
    return std::abs(measured - target) <= tolerance_pct / 100.0 * std::abs(target);
}

EvalResult evaluate_answer(BenchmarkQuestion const& question, std::optional<Netlist> const& answer, SimulatorOptions const& simulator)
{
    EvalResult result;
    result.question_id = question.id;
    if (!answer)
    {
        result.failure_reason = "no parseable netlist in the answer";
        return result;
    }

    if (question.category == QuestionCategory::TopologyAdaption)
    {
        auto const& p = *question.verification.topology;
        try
        {
            result.solved = pin_connected_via(*answer, p.pin_node, p.target_node, p.kind, p.value);
            if (!result.solved)
                result.failure_reason = fmt::format("no {}{} bridge between {} and {}", kind_letter(p.kind), format_quantity(p.value),
                                                    p.pin_node, p.target_node);
        }
        catch (Error const& e)
        {
            result.failure_reason = e.what();
        }
        return result;
    }

    try
    {
        auto const& v = question.verification;
        auto const dataset = simulate(*answer, simulator, v.kind == MeasurementKind::SettleTime);
        result.measured = read_feature(dataset, v.signal, v.kind);
    }
    catch (std::exception const& e)
    {
        result.failure_reason = fmt::format("{}: {}", errc_name(Errc::SimulationFailed), e.what());
        return result;
    }
    auto const target = question.target->magnitude;
    result.ape = absolute_percentage_error(target, result.measured->value);
    result.solved = within_tolerance(target, result.measured->value, question.tolerance_pct);
    if (!result.solved)
        result.failure_reason = fmt::format("measured {} outside ±{}% of {}", format_si(result.measured->value, result.measured->unit),
                                            question.tolerance_pct, format_si(target, question.target->unit));
    return result;
}

double median(std::vector<double> values)
{
    if (values.empty())
        throw Error(Errc::InvalidArgument, "median of an empty set");
    std::sort(values.begin(), values.end());
    auto const n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::pair<double, double> t_confidence_interval(std::vector<double> const& samples, double alpha)
{
    if (samples.size() < 2)
        throw Error(Errc::InvalidArgument, "a confidence interval needs at least two samples");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
    auto const n = static_cast<double>(samples.size());
    auto const mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (auto x: samples)
        ss += (x - mean) * (x - mean);
    auto const sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    auto const half = boost::math::quantile(boost::math::complement(dist, alpha / 2.0)) * sd / std::sqrt(n);
    return { mean - half, mean + half };
}

void aggregate(Report& report)
{
    report.run_solve_rates.clear();
    report.by_category.clear();
    report.by_class.clear();
    report.solve_rate_ci.reset();
    report.median_ape.reset();

    std::map<std::string, Breakdown> categories, classes;
    std::vector<double> apes;
    std::size_t solved_total = 0, total = 0;
    for (auto const& run: report.runs)
    {
        std::size_t solved = 0;
        for (std::size_t i = 0; i < run.size(); ++i)
        {
            auto const& info = report.questions[i];
            auto const& r = run[i];
            auto& cat = categories[std::string(category_name(info.category))];
            auto& cls = classes[info.circuit_class];
            cat.total++, cls.total++;
            if (r.solved)
                ++solved, cat.solved++, cls.solved++;
            if (info.category == QuestionCategory::ParameterTuning && r.ape)
                apes.push_back(*r.ape);
        }
        report.run_solve_rates.push_back(run.empty() ? 0.0 : 100.0 * static_cast<double>(solved) / static_cast<double>(run.size()));
        solved_total += solved;
        total += run.size();
    }
    report.solve_rate = total ? 100.0 * static_cast<double>(solved_total) / static_cast<double>(total) : 0.0;
    if (report.run_solve_rates.size() >= 2)
        report.solve_rate_ci = t_confidence_interval(report.run_solve_rates);
    if (!apes.empty())
        report.median_ape = median(apes);
    for (auto& [key, b]: categories)
        report.by_category.push_back({ key, b.solved, b.total });
    for (auto& [key, b]: classes)
        report.by_class.push_back({ key, b.solved, b.total });
}

Report run_benchmark(std::vector<BenchmarkQuestion> questions, AgentFactory const& factory, BenchmarkConfig const& config)
{
    if (config.n_runs < 1)
        throw Error(Errc::ConfigError, "n_runs must be at least 1");
    if (questions.empty())
        throw Error(Errc::ConfigError, "no questions to run");
    config.session.validate();
    std::sort(questions.begin(), questions.end(), [](auto const& a, auto const& b) { return a.id < b.id; });

    Report report;
    for (auto const& q: questions)
        report.questions.push_back({ q.id, q.category, q.circuit_class });

    auto const jobs = questions.size();
    for (std::size_t run = 0; run < config.n_runs; ++run)
    {
        std::vector<EvalResult> results(jobs);
        std::atomic<std::size_t> next { 0 };
        auto worker = [&]() {
            for (auto i = next++; i < jobs; i = next++)
            {
                auto const& q = questions[i];
                auto client = factory(q, run);
                auto const outcome = run_session(render_prompt(q), q.deck, config.session, *client);
                auto result = evaluate_answer(q, outcome.final_netlist, config.session.simulator);
                if (!outcome.final_netlist)
                    result.failure_reason = fmt::format("session ended with {}{}", termination_name(outcome.termination),
                                                        outcome.diagnostics.empty() ? "" : ": " + outcome.diagnostics);
                result.termination = termination_name(outcome.termination);
                result.iterations_used = outcome.iterations_used;
                if (config.transcript_dir)
                {
                    auto const dir = *config.transcript_dir / fmt::format("run{}", run);
                    std::filesystem::create_directories(dir);
                    std::ofstream(dir / (q.id + ".json")) << outcome_to_json(outcome).dump(2) << '\n';
                }
                results[i] = std::move(result);
            }
        };
        auto const n_workers = std::clamp<std::size_t>(config.workers, 1, jobs);
        if (n_workers == 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < n_workers; ++w)
                pool.emplace_back(worker);
        }
        report.runs.push_back(std::move(results));
    }
    aggregate(report);
    return report;
}

// ---------------------------------------------------------------------------

namespace
{
    std::string csv_field(std::string_view s)
    {
        if (s.find_first_of(",\"\n\r") == std::string_view::npos)
            return std::string(s);
        std::string out = "\"";
        for (auto c: s)
        {
            if (c == '"')
                out += '"';
            out += c;
        }
        return out + "\"";
    }

    std::vector<std::vector<std::string>> parse_csv(std::string_view text)
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> row;
        std::string field;
        bool quoted = false, any = false;
        for (std::size_t i = 0; i < text.size(); ++i)
        {
            auto const c = text[i];
            if (quoted)
            {
                if (c == '"' && i + 1 < text.size() && text[i + 1] == '"')
                    field += '"', ++i;
                else if (c == '"')
                    quoted = false;
                else
                    field += c;
                continue;
            }
            if (c == '"')
                quoted = true, any = true;
            else if (c == ',')
                row.push_back(std::move(field)), field.clear(), any = true;
            else if (c == '\n')
            {
                if (any || !field.empty())
                    row.push_back(std::move(field)), rows.push_back(std::move(row));
                row.clear(), field.clear(), any = false;
            }
            else if (c != '\r')
                field += c, any = true;
        }
        if (any || !field.empty())
            row.push_back(std::move(field)), rows.push_back(std::move(row));
        return rows;
    }

    std::string ci_text(Report const& r)
    {
        return r.solve_rate_ci ? fmt::format("({:.1f}, {:.1f})", r.solve_rate_ci->first, r.solve_rate_ci->second) : "n/a";
    }
} // namespace

std::string report_table(Report const& report)
{
    std::string out;
    out += fmt::format("{:<28} {:<18} {:<16} {:>8} {:>10}\n", "question", "category", "class", "solved", "median_ape");
    for (std::size_t i = 0; i < report.questions.size(); ++i)
    {
        auto const& q = report.questions[i];
        std::size_t solved = 0;
        std::vector<double> apes;
        for (auto const& run: report.runs)
        {
            solved += run[i].solved ? 1 : 0;
            if (run[i].ape)
                apes.push_back(*run[i].ape);
        }
        out += fmt::format("{:<28} {:<18} {:<16} {:>8} {:>10}\n", q.id, category_name(q.category), q.circuit_class,
                           fmt::format("{}/{}", solved, report.n_runs()), apes.empty() ? "-" : fmt::format("{:.2f}%", median(apes)));
    }
    out += "\n";
    for (auto const& b: report.by_category)
        out += fmt::format("category {:<20} {:>5.1f}% ({}/{})\n", b.key, b.solve_rate(), b.solved, b.total);
    for (auto const& b: report.by_class)
        out += fmt::format("class    {:<20} {:>5.1f}% ({}/{})\n", b.key, b.solve_rate(), b.solved, b.total);
    out += fmt::format("runs: {}\n", report.n_runs());
    out += fmt::format("solve_rate: {:.1f}\n", report.solve_rate);
    out += fmt::format("solve_rate_ci95: {}\n", ci_text(report));
    out += fmt::format("median_ape: {}\n", report.median_ape ? fmt::format("{:.2f}", *report.median_ape) : "n/a");
    return out;
}

std::string report_csv(Report const& report)
{
    std::string out = "run,question_id,category,circuit_class,solved,measured,unit,ape_pct,termination,iterations,failure_reason\n";
    for (std::size_t r = 0; r < report.runs.size(); ++r)
        for (std::size_t i = 0; i < report.questions.size(); ++i)
        {
            auto const& q = report.questions[i];
            auto const& e = report.runs[r][i];
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r, csv_field(q.id), category_name(q.category), csv_field(q.circuit_class),
                               e.solved ? 1 : 0, e.measured ? fmt::format("{:.17g}", e.measured->value) : "",
                               e.measured ? csv_field(e.measured->unit) : "", e.ape ? fmt::format("{:.17g}", *e.ape) : "",
                               e.termination, e.iterations_used, csv_field(e.failure_reason.value_or("")));
        }
    return out;
}

json report_summary(Report const& report)
{
    json j { { "n_runs", report.n_runs() },
             { "n_questions", report.questions.size() },
             { "solve_rate", report.solve_rate },
             { "run_solve_rates", report.run_solve_rates } };
    j["solve_rate_ci95"] = report.solve_rate_ci ? json::array({ report.solve_rate_ci->first, report.solve_rate_ci->second }) : json(nullptr);
    j["median_ape"] = report.median_ape ? json(*report.median_ape) : json(nullptr);
    auto breakdown = [](std::vector<Breakdown> const& list) {
        json out = json::object();
        for (auto const& b: list)
            out[b.key] = { { "solved", b.solved }, { "total", b.total }, { "solve_rate", b.solve_rate() } };
        return out;
    };
    j["by_category"] = breakdown(report.by_category);
    j["by_class"] = breakdown(report.by_class);
    return j;
}

Report report_from_csv(std::string_view csv)
{
    auto rows = parse_csv(csv);
    if (rows.empty() || rows.front().size() != 11 || rows.front()[0] != "run")
        throw Error(Errc::SchemaViolation, "not a benchmark CSV (header mismatch)");
    Report report;
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 1; k < rows.size(); ++k)
    {
        auto const& row = rows[k];
        if (row.size() != 11)
            throw Error(Errc::SchemaViolation, fmt::format("CSV row {}: expected 11 fields, got {}", k + 1, row.size()));
        std::size_t run = 0;
        try
        {
            run = std::stoul(row[0]);
        }
        catch (std::exception const&)
        {
            throw Error(Errc::SchemaViolation, fmt::format("CSV row {}: bad run index '{}'", k + 1, row[0]));
        }
        auto const category = category_from_name(row[2]);
        if (!category)
            throw Error(Errc::SchemaViolation, fmt::format("CSV row {}: bad category '{}'", k + 1, row[2]));
        auto [it, inserted] = index.try_emplace(row[1], report.questions.size());
        if (inserted)
            report.questions.push_back({ row[1], *category, row[3] });
        if (report.runs.size() <= run)
            report.runs.resize(run + 1);
        EvalResult e;
        e.question_id = row[1];
        e.solved = row[4] == "1";
        if (!row[5].empty())
        {
            Measurement m;
            m.value = std::stod(row[5]);
            m.unit = row[6];
            e.measured = m;
        }
        if (!row[7].empty())
            e.ape = std::stod(row[7]);
        e.termination = row[8];
        e.iterations_used = row[9].empty() ? 0 : std::stoul(row[9]);
        if (!row[10].empty())
            e.failure_reason = row[10];
        auto& results = report.runs[run];
        if (results.size() <= it->second)
            results.resize(it->second + 1);
        results[it->second] = std::move(e);
    }
    for (auto const& run: report.runs)
        if (run.size() != report.questions.size())
            throw Error(Errc::SchemaViolation, "CSV runs do not cover the same questions");
    aggregate(report);
    return report;
}

} // namespace spiceagent
