// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <spiceagent/agent.hpp>
#include <spiceagent/benchmark.hpp>
#include <spiceagent/dataset.hpp>
#include <spiceagent/measure.hpp>
#include <spiceagent/policies.hpp>
#include <spiceagent/rag.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace spiceagent::cli
{

using nlohmann::json;

ExitCode exit_code_for(Errc code) noexcept
{
    switch (code)
    {
        case Errc::TraceTooShort:
        case Errc::EmptyWindow:
        case Errc::NoPeak:
        case Errc::NeverSettles:
        case Errc::AmbiguousSteadyState:
        case Errc::UnknownSignal: return MeasureError;
        case Errc::EngineNotFound:
        case Errc::EngineTimeout:
        case Errc::EngineFailure:
        case Errc::RawMissing:
        case Errc::PatternMismatch:
        case Errc::StepTooCoarse:
        case Errc::SimulationFailed: return EngineError;
        case Errc::EndpointError:
        case Errc::EmbeddingEndpointError: return EndpointError;
        default: return InputError;
    }
}

SimulatorOptions CliConfig::simulator() const
{
    SimulatorOptions options;
    options.kind = engine;
    if (!engine_command.empty())
    {
        EngineConfig ext;
        ext.command_template = engine_command;
        ext.timeout = std::chrono::duration<double>(engine_timeout_s);
        ext.validate();
        options.external = ext;
    }
    return options;
}

namespace
{
    char const* env(char const* name)
    {
        auto const* v = std::getenv(name);
        return v && *v ? v : nullptr;
    }

    std::string read_file(std::filesystem::path const& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(Errc::InvalidArgument, fmt::format("cannot read '{}'", path.string()));
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    void write_file(std::filesystem::path const& path, std::string_view content)
    {
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error(Errc::InvalidArgument, fmt::format("cannot write '{}'", path.string()));
        out << content;
    }

    /// Flag values; unset optionals leave the config untouched.
    struct Flags
    {
        std::string config_path;
        std::optional<std::string> engine, engine_command, llm_url, llm_model, embedding_url, retrieval;
        std::optional<double> engine_timeout;
    };

    CliConfig resolve_config(Flags const& flags)
    {
        CliConfig config;
        if (!flags.config_path.empty())
            config = load_config_file(flags.config_path);
        else if (auto path = default_config_path(); path && std::filesystem::exists(*path))
            config = load_config_file(*path);

        if (flags.engine)
            config.engine = engine_kind_from_name(*flags.engine);
        if (flags.engine_command)
            config.engine_command = *flags.engine_command;
        if (flags.engine_timeout)
            config.engine_timeout_s = *flags.engine_timeout;
        if (flags.llm_url)
            config.llm_base_url = *flags.llm_url;
        if (flags.llm_model)
            config.llm_model = *flags.llm_model;
        if (flags.embedding_url)
            config.embedding_base_url = *flags.embedding_url;
        if (flags.retrieval)
            config.retrieval_backend = *flags.retrieval;

        apply_environment(config);
        return config;
    }

    std::shared_ptr<RetrievalIndex const> load_datasheet(std::filesystem::path const& path, CliConfig const& config,
                                                          std::unique_ptr<EmbeddingClient>& embedder)
    {
        RetrievalConfig rc;
        if (config.retrieval_backend == "embedding")
        {
            rc.backend = RetrievalBackend::Embedding;
            auto const url = config.embedding_base_url.empty() ? config.llm_base_url : config.embedding_base_url;
            if (url.empty())
                throw Error(Errc::ConfigError, "embedding retrieval needs SPICEAGENT_EMBEDDING_BASE_URL or SPICEAGENT_LLM_BASE_URL");
            embedder = std::make_unique<HttpEmbeddingClient>(url, config.embedding_api_key, config.embedding_model);
        }
        else if (config.retrieval_backend != "lexical")
            throw Error(Errc::ConfigError, fmt::format("unknown retrieval backend '{}' (lexical|embedding)", config.retrieval_backend));
        auto chunks = chunk_document(read_file(path), rc, path.filename().string());
        return std::make_shared<RetrievalIndex const>(index(std::move(chunks), rc, embedder.get()));
    }

    std::unique_ptr<LlmClient> live_client(CliConfig const& config)
    {
        if (config.llm_base_url.empty())
            throw Error(Errc::ConfigError, "no LLM endpoint: set SPICEAGENT_LLM_BASE_URL (and SPICEAGENT_LLM_API_KEY)");
        HttpClientConfig hc;
        hc.base_url = config.llm_base_url;
        hc.api_key = config.llm_api_key;
        hc.model = config.llm_model;
        return std::make_unique<HttpChatClient>(hc);
    }

    json card_json(Card const& card)
    {
        return std::visit(
            [](auto const& c) -> json {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, Component>)
                {
                    json j { { "type", "component" }, { "name", c.name }, { "kind", std::string(1, kind_letter(c.kind)) }, { "nodes", c.nodes }, { "value", c.value } };
                    if (auto s = c.scalar())
                        j["scalar"] = { { "magnitude", s->magnitude }, { "unit", s->unit } };
                    return j;
                }
                else if constexpr (std::is_same_v<T, Directive>)
                    return { { "type", "directive" }, { "keyword", c.keyword }, { "args", c.args } };
                else
                    return { { "type", "comment" }, { "text", c.text } };
            },
            card);
    }

    bool is_raw_file(std::filesystem::path const& path)
    {
        auto ext = to_lower(path.extension().string());
        return ext == ".raw";
    }
} // namespace

CliConfig load_config_file(std::filesystem::path const& path)
{
    json j;
    try
    {
        j = json::parse(read_file(path));
    }
    catch (json::parse_error const& e)
    {
        throw Error(Errc::ConfigError, fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    if (!j.is_object())
        throw Error(Errc::ConfigError, fmt::format("config '{}' must be a JSON object", path.string()));

    CliConfig config;
    try
    {
        for (auto const& [key, value]: j.items())
        {
            if (key == "engine")
                config.engine = engine_kind_from_name(value.get<std::string>());
            else if (key == "engine_command")
                config.engine_command = value.get<std::string>();
            else if (key == "engine_timeout_s")
                config.engine_timeout_s = value.get<double>();
            else if (key == "llm_base_url")
                config.llm_base_url = value.get<std::string>();
            else if (key == "llm_model")
                config.llm_model = value.get<std::string>();
            else if (key == "embedding_base_url")
                config.embedding_base_url = value.get<std::string>();
            else if (key == "embedding_model")
                config.embedding_model = value.get<std::string>();
            else if (key == "retrieval")
                config.retrieval_backend = value.get<std::string>();
            else if (key == "max_iterations")
                config.max_iterations = value.get<std::size_t>();
            else if (key == "temperature")
                config.temperature = value.get<double>();
            else if (key == "top_p")
                config.top_p = value.get<double>();
            else if (key == "output_dir")
                config.output_dir = value.get<std::string>();
            else if (key.find("key") != std::string::npos || key.find("token") != std::string::npos)
                throw Error(Errc::ConfigError, fmt::format("config key '{}': credentials are read from the environment only", key));
            else
                throw Error(Errc::ConfigError, fmt::format("config key '{}' is not recognised", key));
        }
    }
    catch (json::exception const& e)
    {
        throw Error(Errc::ConfigError, fmt::format("config '{}': {}", path.string(), e.what()));
    }
    return config;
}

void apply_environment(CliConfig& config)
{
    if (auto v = env("SPICEAGENT_ENGINE"))
        config.engine = engine_kind_from_name(v);
    if (auto v = env("SPICEAGENT_ENGINE_CMD"))
        config.engine_command = v;
    if (auto v = env("SPICEAGENT_LLM_BASE_URL"))
        config.llm_base_url = v;
    if (auto v = env("SPICEAGENT_LLM_MODEL"))
        config.llm_model = v;
    if (auto v = env("SPICEAGENT_LLM_API_KEY"))
        config.llm_api_key = v;
    if (auto v = env("SPICEAGENT_EMBEDDING_BASE_URL"))
        config.embedding_base_url = v;
    if (auto v = env("SPICEAGENT_EMBEDDING_MODEL"))
        config.embedding_model = v;
    if (auto v = env("SPICEAGENT_EMBEDDING_API_KEY"))
        config.embedding_api_key = v;
    else
        config.embedding_api_key = config.llm_api_key;
    if (auto v = env("SPICEAGENT_OUTPUT_DIR"))
        config.output_dir = v;
}

std::optional<std::filesystem::path> default_config_path()
{
    if (auto v = env("SPICEAGENT_CONFIG"))
        return std::filesystem::path(v);
    if (auto v = env("XDG_CONFIG_HOME"))
        return std::filesystem::path(v) / "spiceagent" / "config.json";
    if (auto v = env("HOME"))
        return std::filesystem::path(v) / ".config" / "spiceagent" / "config.json";
    return std::nullopt;
}

int run(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app { "LLM agent harness for switched-mode power-supply SPICE netlists", "spiceagent" };
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("Exit codes: 0 ok, 1 internal error, 2 bad input/schema/config, 3 measurement failed,\n"
               "4 iteration cap reached, 5 simulator failed, 6 LLM/embedding endpoint failed.\n"
               "Credentials come from SPICEAGENT_LLM_API_KEY / SPICEAGENT_EMBEDDING_API_KEY only.");

    Flags flags;
    app.add_option("--config", flags.config_path, "JSON config file (default: $SPICEAGENT_CONFIG or ~/.config/spiceagent/config.json)");
    app.add_option("--engine", flags.engine, "Simulator: auto, reference or external");
    app.add_option("--engine-cmd", flags.engine_command, "External simulator command with {netlist_path} and optionally {raw_path}");
    app.add_option("--engine-timeout", flags.engine_timeout, "External simulator timeout in seconds");
    app.add_option("--llm-url", flags.llm_url, "Chat-completions base URL");
    app.add_option("--llm-model", flags.llm_model, "Chat model name");
    app.add_option("--embedding-url", flags.embedding_url, "Embeddings base URL (defaults to the LLM URL)");
    app.add_option("--retrieval", flags.retrieval, "Datasheet retrieval backend: lexical or embedding");

    // parse
    auto* parse_cmd = app.add_subcommand("parse", "Parse a deck and print it normalized");
    std::filesystem::path parse_deck;
    bool parse_json = false;
    parse_cmd->add_option("deck", parse_deck, "Netlist file")->required();
    parse_cmd->add_flag("--json", parse_json, "Print a structured card listing instead");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a deck and write a raw file");
    std::filesystem::path sim_deck, sim_output;
    bool sim_startup = false, sim_ascii = false;
    sim_cmd->add_option("deck", sim_deck, "Netlist file")->required();
    sim_cmd->add_option("-o,--output", sim_output, "Raw file to write (default: <output_dir>/<deck>.raw)");
    sim_cmd->add_flag("--startup", sim_startup, "Record from t = 0 (for settle-time readings)");
    sim_cmd->add_flag("--ascii", sim_ascii, "Write an ASCII raw file");

    // measure
    auto* measure_cmd = app.add_subcommand("measure", "Read one feature from a raw file or a simulated deck");
    std::filesystem::path measure_input;
    std::string measure_signal, measure_kind;
    measure_cmd->add_option("input", measure_input, "Raw file (.raw) or netlist")->required();
    measure_cmd->add_option("-s,--signal", measure_signal, "Trace name, e.g. V(out) or I(L1)")->required();
    measure_cmd->add_option("-k,--kind", measure_kind, "mean, ripple, switching_frequency or settle_time")->required();

    // ask
    auto* ask_cmd = app.add_subcommand("ask", "Run one agent session on a deck");
    std::filesystem::path ask_deck, ask_prompt_file, ask_rag, ask_script, ask_out;
    std::string ask_prompt;
    std::optional<std::size_t> ask_max_iter;
    std::optional<double> ask_temperature, ask_top_p;
    std::size_t ask_rag_k = 4;
    bool ask_no_tools = false;
    ask_cmd->add_option("deck", ask_deck, "Netlist file")->required();
    auto* prompt_opt = ask_cmd->add_option("-p,--prompt", ask_prompt, "Task text");
    auto* prompt_file_opt = ask_cmd->add_option("--prompt-file", ask_prompt_file, "File with the task text");
    prompt_opt->excludes(prompt_file_opt);
    ask_cmd->add_option("--rag", ask_rag, "Datasheet text file to attach");
    ask_cmd->add_option("--rag-k", ask_rag_k, "Default passages per datasheet search");
    ask_cmd->add_option("--max-iter", ask_max_iter, "Tool iterations before giving up (default 8)");
    ask_cmd->add_option("--scripted", ask_script, "Replay assistant turns from a JSON script instead of calling an endpoint");
    ask_cmd->add_flag("--no-tools", ask_no_tools, "Single turn without tools");
    ask_cmd->add_option("--temperature", ask_temperature, "Sampling temperature (default 1)");
    ask_cmd->add_option("--top-p", ask_top_p, "Nucleus sampling (default 1)");
    ask_cmd->add_option("-o,--out-dir", ask_out, "Where to write final.cir and transcript.json");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark on a question file");
    std::filesystem::path bench_questions, bench_script, bench_rag, bench_out;
    std::size_t bench_runs = 1, bench_workers = 1;
    std::string bench_agent = "oracle";
    std::optional<std::size_t> bench_max_iter;
    bool bench_no_tools = false;
    bench_cmd->add_option("questions", bench_questions, "Question file (spiceagent.questions/1)")->required();
    bench_cmd->add_option("--runs", bench_runs, "Repetitions of the whole set")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--workers", bench_workers, "Concurrent sessions")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--agent", bench_agent, "oracle, noop, greedy, scripted or live")
        ->check(CLI::IsMember({ "oracle", "noop", "greedy", "scripted", "live" }));
    bench_cmd->add_option("--script", bench_script, "Script replayed for every question (--agent scripted)");
    bench_cmd->add_option("--rag", bench_rag, "Datasheet text file attached to every session");
    bench_cmd->add_option("--max-iter", bench_max_iter, "Tool iterations per session (default 8)");
    bench_cmd->add_flag("--no-tools", bench_no_tools, "Single-turn sessions without tools");
    bench_cmd->add_option("-o,--out-dir", bench_out, "Where to write report.txt, results.csv, summary.json and transcripts/");

    // report
    auto* report_cmd = app.add_subcommand("report", "Re-aggregate a results CSV written by bench");
    std::filesystem::path report_csv_path;
    bool report_json = false;
    report_cmd->add_option("csv", report_csv_path, "results.csv")->required();
    report_cmd->add_flag("--json", report_json, "Print the summary as JSON");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        auto const code = app.exit(e, out, err);
        return code == 0 ? Ok : InputError;
    }

    try
    {
        auto const config = resolve_config(flags);

        if (*parse_cmd)
        {
            auto const deck = parse_netlist(read_file(parse_deck));
            if (parse_json)
            {
                auto cards = json::array();
                for (auto const& card: deck.cards())
                    cards.push_back(card_json(card));
                out << json { { "end", deck.end_present() }, { "cards", cards } }.dump(2) << '\n';
            }
            else
                out << serialize_netlist(deck);
            return Ok;
        }

        if (*sim_cmd)
        {
            auto const deck = parse_netlist(read_file(sim_deck));
            auto const ds = simulate(deck, config.simulator(), sim_startup);
            auto const path = sim_output.empty() ? config.output_dir / (sim_deck.stem().string() + ".raw") : sim_output;
            write_file(path, write_raw(ds, sim_ascii ? RawEncoding::Ascii : RawEncoding::Binary, sim_deck.filename().string()));
            out << fmt::format("wrote {} ({} points)\n", path.string(), ds.n_points());
            for (auto const& v: ds.variables())
                out << fmt::format("  {} [{}]\n", v.name, quantity_name(v.quantity));
            return Ok;
        }

        if (*measure_cmd)
        {
            auto const kind = measurement_kind_from_name(measure_kind);
            Dataset ds = is_raw_file(measure_input)
                             ? parse_raw(read_file(measure_input))
                             : simulate(parse_netlist(read_file(measure_input)), config.simulator(), kind == MeasurementKind::SettleTime);
            auto const m = read_feature(ds, measure_signal, kind);
            out << m.render() << '\n';
            if (!m.diagnostics.empty())
                err << "note: " << m.diagnostics << '\n';
            return Ok;
        }

        if (*ask_cmd)
        {
            auto const deck = parse_netlist(read_file(ask_deck));
            std::string prompt = ask_prompt_file.empty() ? ask_prompt : read_file(ask_prompt_file);
            if (prompt.empty())
                throw Error(Errc::InvalidArgument, "give the task with --prompt or --prompt-file");
            prompt += fmt::format("\n\nNetlist:\n```spice\n{}```\n", serialize_netlist(deck));

            SessionConfig session;
            session.max_iterations = ask_max_iter.value_or(config.max_iterations);
            session.sampling = { ask_temperature.value_or(config.temperature), ask_top_p.value_or(config.top_p) };
            session.simulator = config.simulator();
            session.tools_enabled = !ask_no_tools;
            session.datasheet_k = ask_rag_k;
            std::unique_ptr<EmbeddingClient> embedder;
            if (!ask_rag.empty())
                session.datasheet = load_datasheet(ask_rag, config, embedder);

            std::unique_ptr<LlmClient> client;
            if (!ask_script.empty())
                client = std::make_unique<ScriptedClient>(ScriptedClient::from_file(ask_script));
            else
                client = live_client(config);

            auto const outcome = run_session(prompt, deck, session, *client);
            auto const dir = ask_out.empty() ? config.output_dir : ask_out;
            write_file(dir / "transcript.json", outcome_to_json(outcome).dump(2) + "\n");
            out << fmt::format("termination: {}\niterations: {}\n", termination_name(outcome.termination), outcome.iterations_used);
            out << fmt::format("transcript: {}\n", (dir / "transcript.json").string());
            switch (outcome.termination)
            {
                case Termination::FinalAnswer:
                    write_file(dir / "final.cir", serialize_netlist(*outcome.final_netlist));
                    out << fmt::format("final netlist: {}\n", (dir / "final.cir").string());
                    return Ok;
                case Termination::IterationCap:
                    if (outcome.last_candidate)
                    {
                        write_file(dir / "last_candidate.cir", serialize_netlist(*outcome.last_candidate));
                        out << fmt::format("last candidate (not a final answer): {}\n", (dir / "last_candidate.cir").string());
                    }
                    err << outcome.diagnostics << '\n';
                    return IterationCap;
                case Termination::Error:
                    err << "error: " << outcome.diagnostics << '\n';
                    return outcome.error ? exit_code_for(*outcome.error) : Internal;
            }
            return Internal;
        }

        if (*bench_cmd)
        {
            auto questions = load_questions(bench_questions);
            BenchmarkConfig bc;
            bc.n_runs = bench_runs;
            bc.workers = bench_workers;
            bc.session.max_iterations = bench_max_iter.value_or(config.max_iterations);
            bc.session.sampling = { config.temperature, config.top_p };
            bc.session.simulator = config.simulator();
            bc.session.tools_enabled = !bench_no_tools;
            std::unique_ptr<EmbeddingClient> embedder;
            if (!bench_rag.empty())
                bc.session.datasheet = load_datasheet(bench_rag, config, embedder);
            auto const dir = bench_out.empty() ? config.output_dir : bench_out;
            bc.transcript_dir = dir / "transcripts";

            AgentFactory factory;
            if (bench_agent == "oracle")
                factory = [](BenchmarkQuestion const& q, std::size_t) { return make_oracle_agent(q); };
            else if (bench_agent == "noop")
                factory = [](BenchmarkQuestion const&, std::size_t) { return make_noop_agent(); };
            else if (bench_agent == "greedy")
                factory = [](BenchmarkQuestion const& q, std::size_t) { return make_greedy_bisection_agent(q); };
            else if (bench_agent == "scripted")
            {
                if (bench_script.empty())
                    throw Error(Errc::ConfigError, "--agent scripted needs --script");
                auto const script = ScriptedClient::from_file(bench_script);
                factory = [script](BenchmarkQuestion const&, std::size_t) -> std::unique_ptr<LlmClient> {
                    return std::make_unique<ScriptedClient>(script);
                };
            }
            else
            {
                live_client(config); // fail fast on missing endpoint
                factory = [config](BenchmarkQuestion const&, std::size_t) { return live_client(config); };
            }

            auto const report = run_benchmark(std::move(questions), factory, bc);
            auto const table = report_table(report);
            write_file(dir / "report.txt", table);
            write_file(dir / "results.csv", report_csv(report));
            write_file(dir / "summary.json", report_summary(report).dump(2) + "\n");
            out << table;
            return Ok;
        }

        if (*report_cmd)
        {
            auto const report = report_from_csv(read_file(report_csv_path));
            out << (report_json ? report_summary(report).dump(2) + "\n" : report_table(report));
            return Ok;
        }
    }
    catch (Error const& e)
    {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    catch (std::exception const& e)
    {
        err << "internal error: " << e.what() << '\n';
        return Internal;
    }
    return Internal;
}

} // namespace spiceagent::cli
