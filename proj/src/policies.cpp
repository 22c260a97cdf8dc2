// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/agent.hpp>
#include <spiceagent/policies.hpp>

#include <fmt/format.h>

#include <cmath>
#include <sstream>

namespace spiceagent
{

using nlohmann::json;

namespace
{
    bool is_current_signal(std::string_view signal) { return !signal.empty() && (signal.front() == 'I' || signal.front() == 'i'); }

    /// Rewrites on-time and period (arguments 6 and 7) of a PULSE(...) value.
    std::string rescale_pulse(std::string const& value, double period)
    {
        auto const open = value.find('(');
        auto const close = value.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw Error(Errc::PatternMismatch, fmt::format("'{}' is not a PULSE waveform", value));
        auto inner = value.substr(open + 1, close - open - 1);
        for (auto& c: inner)
            if (c == ',')
                c = ' ';
        std::istringstream in(inner);
        std::vector<std::string> args;
        for (std::string a; in >> a;)
            args.push_back(a);
        auto const ton = args.size() >= 7 ? parse_quantity(args[5]) : std::nullopt;
        auto const per = args.size() >= 7 ? parse_quantity(args[6]) : std::nullopt;
        if (!ton || !per || !(*per > 0.0))
            throw Error(Errc::PatternMismatch, fmt::format("PULSE '{}' has no usable on-time/period", value));
        args[5] = format_quantity(*ton * period / *per);
        args[6] = format_quantity(period);
        return fmt::format("{}({})", value.substr(0, open), fmt::join(args, " "));
    }

    std::string fenced(Netlist const& deck) { return fmt::format("```spice\n{}```", serialize_netlist(deck)); }

    ToolCall make_call(std::string id, std::string name, json const& args) { return { std::move(id), std::move(name), args.dump() }; }

    std::optional<Netlist> deck_in_prompt(std::vector<ChatMessage> const& messages)
    {
        for (auto const& m: messages)
            if (m.role == Role::User)
                if (auto deck = extract_netlist_from_response(m.content))
                    return deck;
        return std::nullopt;
    }

    class FixedReplyClient final: public LlmClient
    {
      public:
        explicit FixedReplyClient(std::string content): _content(std::move(content)) { }
        AssistantReply complete(std::vector<ChatMessage> const&, std::vector<ToolSpec> const&, SamplingParams const&) override
        {
            return { _content, {} };
        }

      private:
        std::string _content;
    };

    class NoOpClient final: public LlmClient
    {
      public:
        AssistantReply complete(std::vector<ChatMessage> const& messages, std::vector<ToolSpec> const&, SamplingParams const&) override
        {
            if (auto deck = deck_in_prompt(messages))
                return { "The netlist already meets the request.\n" + fenced(*deck), {} };
            return { "There is no netlist to work on.", {} };
        }
    };

    class GreedyBisectionClient final: public LlmClient
    {
      public:
        explicit GreedyBisectionClient(BenchmarkQuestion question): _q(std::move(question))
        {
            if (_q.category != QuestionCategory::ParameterTuning)
                return;
            try
            {
                _circuit = detect_buck_pattern(_q.deck);
                _choice = knob_for(_q, *_circuit);
            }
            catch (Error const&)
            {
                _choice.reset();
                return;
            }
            _x = _choice->current;
            _lo = std::log(_x / 8.0);
            _hi = std::log(_x * 8.0);
            _deck = _q.deck;
        }

        AssistantReply complete(std::vector<ChatMessage> const& messages, std::vector<ToolSpec> const&, SamplingParams const&) override
        {
            if (!_choice)
                return final_answer(_q.deck, "No single component to tune; returning the netlist unchanged.");

            // The read is always the last call of a turn, so its result closes the transcript.
            if (messages.empty() || messages.back().role != Role::Tool)
            {
                if (_started)
                    return final_answer(_deck, "Stopping here.");
                _started = true;
                return { "Measuring the current design first.", { read_call() } };
            }

            auto const measured = parse_reading(messages.back().content);
            if (!measured)
                return final_answer(_deck, "The simulation failed; returning the last candidate.");
            auto const target = _q.target->magnitude;
            if (within_tolerance(target, *measured, 0.98 * _q.tolerance_pct))
                return final_answer(_deck, fmt::format("Measured {:.6g}, within tolerance of {:.6g}.", *measured, target));

            bool const too_low = *measured < target;
            if (too_low == (_choice->sign > 0))
                _lo = std::log(_x);
            else
                _hi = std::log(_x);
            _x = std::exp(0.5 * (_lo + _hi));
            _deck = apply_knob(_q.deck, *_circuit, _choice->knob, _x);
            return { fmt::format("Measured {:.6g}, target {:.6g}; trying {}.", *measured, target, format_quantity(_x)),
                     { make_call(next_id(), "submit_netlist", { { "netlist", serialize_netlist(_deck) } }), read_call() } };
        }

      private:
        static std::optional<double> parse_reading(std::string const& line)
        {
            std::istringstream in(line);
            std::string kind, value;
            if (!(in >> kind >> value) || kind == "error:")
                return std::nullopt;
            try
            {
                return std::stod(value);
            }
            catch (std::exception const&)
            {
                return std::nullopt;
            }
        }

        AssistantReply final_answer(Netlist const& deck, std::string const& note) const { return { note + "\n" + fenced(deck), {} }; }

        ToolCall read_call()
        {
            return make_call(next_id(), "simulate_and_read",
                             { { "signal", _q.verification.signal }, { "kind", measurement_kind_name(_q.verification.kind) } });
        }

        std::string next_id() { return fmt::format("call_{}", ++_calls); }

        BenchmarkQuestion _q;
        std::optional<BuckCircuit> _circuit;
        std::optional<KnobChoice> _choice;
        Netlist _deck;
        double _x = 0.0, _lo = 0.0, _hi = 0.0;
        bool _started = false;
        std::size_t _calls = 0;
    };
} // namespace

KnobChoice knob_for(BenchmarkQuestion const& question, BuckCircuit const& circuit)
{
    if (question.category != QuestionCategory::ParameterTuning)
        throw Error(Errc::InvalidArgument, "topology questions have no knob");
    auto const& p = circuit.params;
    switch (question.verification.kind)
    {
        case MeasurementKind::Mean:
            if (circuit.pulse_at_switch_node)
                throw Error(Errc::PatternMismatch, "supply is the pulse source; no DC supply to tune");
            return { Knob::InputVoltage, p.v_in, +1 };
        case MeasurementKind::Ripple:
            if (is_current_signal(question.verification.signal))
                return { Knob::Inductance, p.inductance, -1 };
            return { Knob::Capacitance, p.capacitance, -1 };
        case MeasurementKind::SwitchingFrequency: return { Knob::SwitchPeriod, p.period(), -1 };
        case MeasurementKind::SettleTime: break;
    }
    throw Error(Errc::InvalidArgument, "settle time has no single-knob policy");
}

Netlist apply_knob(Netlist const& deck, BuckCircuit const& circuit, Knob knob, double value)
{
    switch (knob)
    {
        case Knob::InputVoltage: return set_component_value(deck, circuit.input_source, { value, "V" });
        case Knob::Inductance: return set_component_value(deck, circuit.inductor, { value, "H" });
        case Knob::Capacitance: return set_component_value(deck, circuit.capacitor, { value, "F" });
        case Knob::SwitchPeriod:
        {
            auto pulse = *deck.find(circuit.pulse_source);
            pulse.value = rescale_pulse(pulse.value, value);
            return replace_component(deck, pulse);
        }
    }
    throw Error(Errc::InvalidArgument, "unknown knob");
}

std::optional<Netlist> oracle_answer(BenchmarkQuestion const& question)
{
    if (question.category == QuestionCategory::TopologyAdaption)
    {
        auto const& t = *question.verification.topology;
        std::string name = fmt::format("{}_added", kind_letter(t.kind));
        for (int i = 2; question.deck.find(name); ++i)
            name = fmt::format("{}_added{}", kind_letter(t.kind), i);
        return add_component(question.deck, { name, t.kind, { t.pin_node, t.target_node }, format_quantity(t.value) });
    }

    try
    {
        auto const circuit = detect_buck_pattern(question.deck);
        auto const choice = knob_for(question, circuit);
        auto const& p = circuit.params;
        auto const target = question.target->magnitude;
        auto const v_out = p.duty * p.v_in;
        double value = 0.0;
        switch (choice.knob)
        {
            case Knob::InputVoltage: value = target / p.duty; break;
            case Knob::Inductance: value = v_out * (1.0 - p.duty) / (target * p.f_switch); break;
            case Knob::Capacitance:
            {
                auto const ripple_current = v_out * (1.0 - p.duty) / (p.inductance * p.f_switch);
                value = ripple_current / (8.0 * p.f_switch * target);
                break;
            }
            case Knob::SwitchPeriod: value = 1.0 / target; break;
        }
        return apply_knob(question.deck, circuit, choice.knob, value);
    }
    catch (Error const&)
    {
        return std::nullopt;
    }
}

std::unique_ptr<LlmClient> make_oracle_agent(BenchmarkQuestion const& question)
{
    if (auto deck = oracle_answer(question))
        return std::make_unique<FixedReplyClient>("Applying the design equations.\n" + fenced(*deck));
    return std::make_unique<FixedReplyClient>("I cannot derive a closed-form answer for this task.");
}

std::unique_ptr<LlmClient> make_noop_agent() { return std::make_unique<NoOpClient>(); }

std::unique_ptr<LlmClient> make_greedy_bisection_agent(BenchmarkQuestion const& question)
{
    return std::make_unique<GreedyBisectionClient>(question);
}

} // namespace spiceagent
