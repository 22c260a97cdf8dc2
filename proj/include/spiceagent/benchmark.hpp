// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/agent.hpp>
#include <spiceagent/measure.hpp>
#include <spiceagent/netlist.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spiceagent
{

inline constexpr std::string_view questions_schema_id = "spiceagent.questions/1";

enum class QuestionCategory
{
    ParameterTuning,
    TopologyAdaption,
};

std::string_view category_name(QuestionCategory category) noexcept;

struct TopologyPredicate
{
    std::string pin_node;
    std::string target_node;
    ComponentKind kind = ComponentKind::Resistor;
    double value = 0.0;
};

struct Verification
{
    std::string tool; ///< measurement kind name, or "pin_connected_via"
    std::string signal;
    MeasurementKind kind = MeasurementKind::Mean;
    std::optional<TopologyPredicate> topology;
};

struct BenchmarkQuestion
{
    std::string id;
    std::filesystem::path circuit;
    Netlist deck;
    std::string circuit_class;
    QuestionCategory category = QuestionCategory::ParameterTuning;
    std::string prompt_template;
    std::optional<PhysicalValue> target;
    double tolerance_pct = 5.0;
    Verification verification;
};

/// Throws SchemaViolation (all field-level problems in one message) or MissingFixture.
/// Relative circuit paths resolve against the question file's directory.
std::vector<BenchmarkQuestion> load_questions(std::filesystem::path const& file);
std::vector<BenchmarkQuestion> parse_questions(std::string_view json_text, std::filesystem::path const& base_dir);

/// "0.1" + "A" -> "100 mA".
std::string format_si(double value, std::string_view unit);

std::string render_prompt(BenchmarkQuestion const& question);

/// 100 * |A - F| / |A|.
double absolute_percentage_error(double target, double measured);
bool within_tolerance(double target, double measured, double tolerance_pct);

struct EvalResult
{
    std::string question_id;
    bool solved = false;
    std::optional<Measurement> measured;
    std::optional<double> ape;
    std::optional<std::string> failure_reason;
    // Session bookkeeping, filled by run_benchmark.
    std::string termination;
    std::size_t iterations_used = 0;
};

/// `answer` absent = the agent produced no parseable netlist.
EvalResult evaluate_answer(BenchmarkQuestion const& question, std::optional<Netlist> const& answer, SimulatorOptions const& simulator);

struct Breakdown
{
    std::string key;
    std::size_t solved = 0;
    std::size_t total = 0;
    double solve_rate() const noexcept { return total ? 100.0 * static_cast<double>(solved) / static_cast<double>(total) : 0.0; }
};

struct QuestionInfo
{
    std::string id;
    QuestionCategory category = QuestionCategory::ParameterTuning;
    std::string circuit_class;
};

struct Report
{
    std::vector<QuestionInfo> questions;      ///< sorted by id
    std::vector<std::vector<EvalResult>> runs; ///< runs[r][q] aligned with `questions`
    std::vector<double> run_solve_rates;
    double solve_rate = 0.0;
    std::optional<std::pair<double, double>> solve_rate_ci; ///< n_runs >= 2
    std::optional<double> median_ape;
    std::vector<Breakdown> by_category;
    std::vector<Breakdown> by_class;

    std::size_t n_runs() const noexcept { return runs.size(); }
};

/// Recomputes every aggregate from `questions` and `runs`.
void aggregate(Report& report);

/// Two-sided Student-t interval at level 1 - alpha. Requires at least two samples.
std::pair<double, double> t_confidence_interval(std::vector<double> const& samples, double alpha = 0.05);

double median(std::vector<double> values);

/// Builds a fresh client for one session. `run` is the 0-based run index.
using AgentFactory = std::function<std::unique_ptr<LlmClient>(BenchmarkQuestion const& question, std::size_t run)>;

struct BenchmarkConfig
{
    SessionConfig session;
    std::size_t n_runs = 1;
    std::size_t workers = 1;
    /// When set, each session's transcript is written to <dir>/run<r>/<id>.json.
    std::optional<std::filesystem::path> transcript_dir;
};

Report run_benchmark(std::vector<BenchmarkQuestion> questions, AgentFactory const& factory, BenchmarkConfig const& config);

std::string report_table(Report const& report);
/// Columns: run,question_id,category,circuit_class,solved,measured,unit,ape_pct,termination,iterations,failure_reason
std::string report_csv(Report const& report);
nlohmann::json report_summary(Report const& report);
/// Inverse of report_csv; aggregates are recomputed.
Report report_from_csv(std::string_view csv);

} // namespace spiceagent
