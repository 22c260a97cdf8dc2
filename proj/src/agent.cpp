// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/agent.hpp>
#include <spiceagent/measure.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace spiceagent
{

using nlohmann::json;

void SessionConfig::validate() const
{
    if (max_iterations < 1)
        throw Error(Errc::ConfigError, "max_iterations must be at least 1");
    if (datasheet_k < 1)
        throw Error(Errc::ConfigError, "datasheet_k must be at least 1");
    if (datasheet && datasheet_k > datasheet->config().max_chunks)
        throw Error(Errc::ConfigError,
                    fmt::format("datasheet_k = {} exceeds the index limit of {} chunks", datasheet_k, datasheet->config().max_chunks));
}

std::string_view termination_name(Termination termination) noexcept
{
    switch (termination)
    {
        case Termination::FinalAnswer: return "final_answer";
        case Termination::IterationCap: return "iteration_cap";
        case Termination::Error: return "error";
    }
    return "error";
}

json outcome_to_json(SessionOutcome const& outcome)
{
    json j { { "termination", termination_name(outcome.termination) },
             { "iterations_used", outcome.iterations_used },
             { "transcript", transcript_to_json(outcome.transcript) } };
    j["final_netlist"] = outcome.final_netlist ? json(serialize_netlist(*outcome.final_netlist)) : json(nullptr);
    j["last_candidate"] = outcome.last_candidate ? json(serialize_netlist(*outcome.last_candidate)) : json(nullptr);
    if (outcome.error)
        j["error"] = errc_name(*outcome.error);
    if (!outcome.diagnostics.empty())
        j["diagnostics"] = outcome.diagnostics;
    return j;
}

std::string build_system_prompt(SessionConfig const& config)
{
    std::string prompt =
        "You are an experienced power electronics engineer who adapts SPICE netlists of switched-mode power supplies.\n"
        "Always include the complete adapted netlist in your response, inside a ```spice fenced block that ends with .end.\n"
        "Think step by step.\n";
    if (config.tools_enabled)
    {
        prompt +=
            "Tools:\n"
            "- submit_netlist(netlist): stores a candidate netlist. Later simulations use the latest candidate; before the first "
            "submission they use the netlist from the task.\n"
            "- simulate_and_read(signal, kind): simulates the current candidate and returns one measurement line. signal is a "
            "trace name such as V(out) or I(L1); kind is mean, ripple, switching_frequency or settle_time.\n";
        if (config.datasheet)
            prompt +=
                "- search_datasheet(query, k): returns the datasheet passages most relevant to the query.\n"
                "You are an assistant that has access to the datasheet of the controller used in the circuit. Look up pin "
                "functions, formulas and limits there when the task needs them.\n";
        prompt +=
            "Verify a candidate by simulation before answering. The final answer is a reply without tool calls that contains "
            "the adapted netlist.\n";
    }
    else
        prompt += "No tools are available. Answer directly with the adapted netlist.\n";
    if (!config.system_instructions.empty())
        prompt += config.system_instructions + "\n";
    return prompt;
}

std::vector<ToolSpec> default_toolset(bool datasheet_attached)
{
    std::vector<ToolSpec> tools {
        { "submit_netlist",
          "Store a candidate SPICE netlist. It replaces the current candidate if it parses.",
          { { "netlist", "string", "Complete netlist text, ending with .end", true, {} } } },
        { "simulate_and_read",
          "Simulate the current candidate netlist and extract one feature from a trace.",
          { { "signal", "string", "Trace name, e.g. V(out) or I(L1)", true, {} },
            { "kind", "string", "Feature to extract", true, { "mean", "ripple", "switching_frequency", "settle_time" } } } },
    };
    if (datasheet_attached)
        tools.push_back({ "search_datasheet",
                          "Retrieve the datasheet passages most relevant to a query.",
                          { { "query", "string", "What to look for", true, {} },
                            { "k", "integer", "Number of passages (default 4)", false, {} } } });
    return tools;
}

// ---------------------------------------------------------------------------

namespace
{
    struct BadArguments: std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    std::string string_arg(json const& args, char const* name)
    {
        if (!args.contains(name))
            throw BadArguments(fmt::format("missing required argument '{}'", name));
        if (!args.at(name).is_string())
            throw BadArguments(fmt::format("argument '{}' must be a string", name));
        return args.at(name).get<std::string>();
    }

    std::string one_line(std::string text)
    {
        std::replace(text.begin(), text.end(), '\n', ' ');
        return text;
    }
} // namespace

Toolbox::Toolbox(Netlist initial, SessionConfig const& config):
    _candidate(std::move(initial)), _config(config), _specs(default_toolset(config.datasheet != nullptr))
{
}

ToolResult Toolbox::execute(ToolCall const& call)
{
    ToolResult result { call.id, {}, true };
    json args;
    try
    {
        args = call.arguments.empty() ? json::object() : json::parse(call.arguments);
        if (!args.is_object())
            throw BadArguments("arguments must be a JSON object");
    }
    catch (std::exception const& e)
    {
        result.success = false;
        result.content = one_line(fmt::format("error: {}: {}", errc_name(Errc::MalformedToolArguments), e.what()));
        return result;
    }

    try
    {
        if (call.name == "submit_netlist")
            result.content = submit_netlist(args);
        else if (call.name == "simulate_and_read")
            result.content = simulate_and_read(args);
        else if (call.name == "search_datasheet" && _config.datasheet)
            result.content = search_datasheet(args);
        else
        {
            result.success = false;
            result.content = fmt::format("error: unknown tool '{}'", call.name);
        }
    }
    catch (BadArguments const& e)
    {
        result.success = false;
        result.content = fmt::format("error: {}: {}", errc_name(Errc::MalformedToolArguments), e.what());
    }
    catch (Error const& e)
    {
        result.success = false;
        result.content = one_line(fmt::format("error: {}", e.what()));
    }
    catch (std::exception const& e)
    {
        result.success = false;
        result.content = one_line(fmt::format("error: {}", e.what()));
    }
    return result;
}

std::string Toolbox::submit_netlist(json const& args)
{
    auto const text = string_arg(args, "netlist");
    // Models often wrap the argument in a fence; accept either form.
    auto deck = extract_netlist_from_response(text);
    if (!deck)
        deck = parse_netlist(text);
    if (deck->components().empty())
        throw Error(Errc::EmptyDeck, "netlist has no components");
    _candidate = std::move(*deck);
    return fmt::format("netlist accepted: {} components", _candidate.components().size());
}

std::string Toolbox::simulate_and_read(json const& args)
{
    auto const signal = string_arg(args, "signal");
    MeasurementKind kind;
    try
    {
        kind = measurement_kind_from_name(string_arg(args, "kind"));
    }
    catch (Error const& e)
    {
        throw BadArguments(e.what());
    }
    auto const dataset = simulate(_candidate, _config.simulator, kind == MeasurementKind::SettleTime);
    auto const m = read_feature(dataset, signal, kind);
    auto line = m.render();
    if (!m.diagnostics.empty())
        line += "; note: " + one_line(m.diagnostics);
    return line;
}

std::string Toolbox::search_datasheet(json const& args)
{
    auto const query = string_arg(args, "query");
    auto k = _config.datasheet_k;
    if (args.contains("k"))
    {
        if (!args.at("k").is_number_integer() || args.at("k").get<long long>() < 1)
            throw BadArguments("argument 'k' must be a positive integer");
        k = std::min<std::size_t>(args.at("k").get<std::size_t>(), _config.datasheet->config().max_chunks);
    }
    std::string out;
    for (auto const& hit: retrieve(query, *_config.datasheet, k))
        out += fmt::format("[passage {} score {:.3f}]\n{}\n", hit.chunk.ordinal, hit.score, hit.chunk.text);
    return out.empty() ? "no passages" : out;
}

// ---------------------------------------------------------------------------

namespace
{
    std::string trim(std::string_view s)
    {
        auto const b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos)
            return {};
        auto const e = s.find_last_not_of(" \t\r");
        return std::string(s.substr(b, e - b + 1));
    }

    std::optional<Netlist> parse_candidate(std::string_view text)
    {
        try
        {
            auto deck = parse_netlist(text);
            if (deck.components().empty())
                return std::nullopt;
            return deck;
        }
        catch (Error const&)
        {
            return std::nullopt;
        }
    }

    bool card_like(std::string const& line)
    {
        if (line.empty())
            return true;
        auto const c = line.front();
        if (c == '*' || c == '+')
            return true;
        if (c == '.')
            return line.size() > 1 && std::isalpha(static_cast<unsigned char>(line[1]));
        // Sentences end in punctuation; cards do not.
        if (std::string_view(".:?!").find(line.back()) != std::string_view::npos)
            return false;
        try
        {
            auto const comp = Component::parse(line);
            switch (comp.kind)
            {
                case ComponentKind::Opaque: return false;
                case ComponentKind::Resistor:
                case ComponentKind::Inductor:
                case ComponentKind::Capacitor: return comp.scalar().has_value();
                default: return true;
            }
        }
        catch (Error const&)
        {
            return false;
        }
    }
} // namespace

std::optional<Netlist> extract_netlist_from_response(std::string_view text)
{
    static std::regex const fence(R"(```[ \t]*(spice|netlist|cir|net|sp)[ \t]*\r?\n([\s\S]*?)```)", std::regex::icase);
    std::string const s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), fence); it != std::sregex_iterator(); ++it)
        if (auto deck = parse_candidate((*it)[2].str()))
            return deck;

    std::vector<std::string> lines;
    {
        std::istringstream in(s);
        std::string line;
        while (std::getline(in, line))
            lines.push_back(trim(line));
    }
    std::optional<Netlist> best;
    std::size_t best_cards = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        auto const lower = to_lower(lines[i]);
        if (lower == ".end")
        {
            std::string block;
            for (auto j = start; j <= i; ++j)
                block += lines[j] + "\n";
            if (auto deck = parse_candidate(block); deck && deck->cards().size() > best_cards)
            {
                best_cards = deck->cards().size();
                best = std::move(deck);
            }
            start = i + 1;
        }
        else if (!card_like(lines[i]))
            start = i + 1;
    }
    return best;
}

// ---------------------------------------------------------------------------

SessionOutcome run_session(std::string const& task_prompt, Netlist const& initial, SessionConfig const& config, LlmClient& client)
{
    config.validate();
    SessionOutcome outcome;
    outcome.transcript.push_back(ChatMessage::system(build_system_prompt(config)));
    outcome.transcript.push_back(ChatMessage::user(task_prompt));

    Toolbox toolbox(initial, config);
    std::vector<ToolSpec> const no_tools;
    auto const& tools = config.tools_enabled ? toolbox.specs() : no_tools;

    for (;;)
    {
        AssistantReply reply;
        try
        {
            reply = client.complete(outcome.transcript, tools, config.sampling);
        }
        catch (Error const& e)
        {
            outcome.termination = Termination::Error;
            outcome.error = e.code();
            outcome.diagnostics = e.what();
            return outcome;
        }
        if (!config.tools_enabled)
            reply.tool_calls.clear();

        auto const answer = extract_netlist_from_response(reply.content);
        if (answer)
            outcome.last_candidate = answer;
        outcome.transcript.push_back(ChatMessage::assistant(reply.content, reply.tool_calls));

        if (!reply.has_tool_calls() && answer)
        {
            outcome.termination = Termination::FinalAnswer;
            outcome.final_netlist = answer;
            return outcome;
        }
        if (!config.tools_enabled || outcome.iterations_used >= config.max_iterations)
        {
            outcome.termination = Termination::IterationCap;
            outcome.diagnostics = outcome.last_candidate
                                      ? fmt::format("stopped after {} iterations; last candidate kept for reference", outcome.iterations_used)
                                      : fmt::format("stopped after {} iterations without a candidate netlist", outcome.iterations_used);
            // Unanswered tool calls would leave the transcript malformed.
            for (auto const& call: reply.tool_calls)
                outcome.transcript.push_back(ChatMessage::tool({ call.id, "error: iteration limit reached, call not executed", false }));
            return outcome;
        }

        ++outcome.iterations_used;
        if (reply.has_tool_calls())
        {
            for (auto const& call: reply.tool_calls)
            {
                auto const result = toolbox.execute(call);
                if (result.success && call.name == "submit_netlist")
                    outcome.last_candidate = toolbox.candidate();
                outcome.transcript.push_back(ChatMessage::tool(result));
            }
        }
        else
            outcome.transcript.push_back(ChatMessage::user(
                "No netlist was found in your reply. Either call a tool or give the final answer with the complete netlist in a "
                "```spice fenced block."));
    }
}

} // namespace spiceagent
