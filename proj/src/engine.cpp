// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/engine.hpp>
#include <spiceagent/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include <csignal>
#include <fcntl.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

namespace spiceagent
{

void TransientSpec::validate() const
{
    if (!(t_stop > 0.0))
        throw Error(Errc::InvalidArgument, "transient stop time must be positive");
    if (!(t_start_record < t_stop))
        throw Error(Errc::InvalidArgument, "recording must start before the stop time");
    if (t_step_hint < 0.0)
        throw Error(Errc::InvalidArgument, "step hint must not be negative");
}

void BuckParams::validate() const
{
    if (!(v_in > 0 && inductance > 0 && capacitance > 0 && load > 0 && f_switch > 0))
        throw Error(Errc::InvalidArgument, "buck parameters must be positive");
    if (!(esr >= 0))
        throw Error(Errc::InvalidArgument, "esr must not be negative");
    if (!(duty > 0 && duty < 1))
        throw Error(Errc::InvalidArgument, fmt::format("duty {} outside (0, 1)", duty));
}

void EngineConfig::validate() const
{
    if (command_template.find("{netlist_path}") == std::string::npos)
        throw Error(Errc::ConfigError, "engine command template must contain {netlist_path}");
    if (timeout.count() <= 0)
        throw Error(Errc::ConfigError, "engine timeout must be positive");
}

std::optional<TransientSpec> transient_from_netlist(Netlist const& netlist)
{
    auto const tran = netlist.directives("tran");
    if (tran.empty())
        return std::nullopt;

    std::vector<double> values;
    std::istringstream in(tran.front().args);
    std::string token;
    while (in >> token)
    {
        auto const v = parse_quantity(token);
        if (!v)
            break; // trailing keywords such as "uic" or "startup"
        values.push_back(*v);
    }
    TransientSpec spec;
    if (values.size() == 1)
        spec.t_stop = values[0];
    else if (values.size() >= 2)
    {
        spec.t_step_hint = values[0];
        spec.t_stop = values[1];
        if (values.size() >= 3)
            spec.t_start_record = values[2];
    }
    else
        return std::nullopt;
    return spec;
}

// ---------------------------------------------------------------------------
// Pattern detection

namespace
{
    bool is_ground(std::string_view node) { return node == "0"; }

    struct Pulse
    {
        double low = 0, high = 0, delay = 0, rise = 0, fall = 0, on_time = 0, period = 0;
    };

    std::optional<Pulse> parse_pulse(std::string const& value)
    {
        auto const lower = to_lower(value);
        if (!lower.starts_with("pulse"))
            return std::nullopt;
        auto const open = value.find('(');
        auto const close = value.rfind(')');
        std::string inner = open == std::string::npos ? value.substr(5) : value.substr(open + 1, close == std::string::npos ? std::string::npos : close - open - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        std::istringstream in(inner);
        std::vector<double> args;
        std::string token;
        while (in >> token)
        {
            auto const v = parse_quantity(token);
            if (!v)
                return std::nullopt;
            args.push_back(*v);
        }
        if (args.size() < 7)
            return std::nullopt;
        return Pulse { args[0], args[1], args[2], args[3], args[4], args[5], args[6] };
    }

    [[noreturn]] void mismatch(std::string const& why)
    {
        throw Error(Errc::PatternMismatch, "not a canonical ideal buck: " + why);
    }

    bool has_nodes(Component const& c, std::string_view a, std::string_view b)
    {
        return c.nodes.size() >= 2
               && ((iequals(c.nodes[0], a) && iequals(c.nodes[1], b)) || (iequals(c.nodes[0], b) && iequals(c.nodes[1], a)));
    }

    double duty_of(Pulse const& p)
    {
        if (!(p.period > 0))
            mismatch("pulse period must be positive");
        auto const d = p.on_time / p.period;
        return p.high >= p.low ? d : 1.0 - d;
    }
} // namespace

BuckCircuit detect_buck_pattern(Netlist const& netlist)
{
    std::vector<Component> resistors, inductors, capacitors, dc_sources, pulse_sources, switches, diodes;
    for (auto const& c: netlist.components())
    {
        switch (c.kind)
        {
            case ComponentKind::Resistor: resistors.push_back(c); break;
            case ComponentKind::Inductor: inductors.push_back(c); break;
            case ComponentKind::Capacitor: capacitors.push_back(c); break;
            case ComponentKind::Diode: diodes.push_back(c); break;
            case ComponentKind::Switch: switches.push_back(c); break;
            case ComponentKind::VoltageSource:
                if (c.scalar())
                    dc_sources.push_back(c);
                else if (parse_pulse(c.value))
                    pulse_sources.push_back(c);
                else
                    mismatch(fmt::format("source '{}' is neither DC nor PULSE", c.name));
                break;
            default: mismatch(fmt::format("component '{}' has no place in an ideal buck", c.name));
        }
    }

    if (inductors.size() != 1)
        mismatch("expected exactly one inductor");
    if (capacitors.size() != 1)
        mismatch("expected exactly one capacitor");
    if (diodes.size() > 1 || switches.size() > 1 || pulse_sources.size() != 1)
        mismatch("expected one pulse source, at most one switch and at most one diode");

    BuckCircuit circuit;
    auto const& inductor = inductors.front();
    auto const& cap = capacitors.front();
    circuit.inductor = inductor.name;
    circuit.capacitor = cap.name;

    // Output = inductor terminal that the capacitor ties to ground.
    std::string out, sw;
    for (int i = 0; i < 2; ++i)
    {
        if (has_nodes(cap, inductor.nodes[i], "0") && !is_ground(inductor.nodes[i]))
        {
            out = inductor.nodes[i];
            sw = inductor.nodes[1 - i];
        }
    }
    if (out.empty())
        mismatch("capacitor does not filter an inductor terminal to ground");
    circuit.output_node = out;
    circuit.switch_node = sw;

    auto const c_value = cap.scalar();
    if (!c_value)
        mismatch("capacitor value is not a plain number");
    circuit.params.capacitance = c_value->magnitude;
    {
        std::istringstream in(cap.value);
        std::string token;
        while (in >> token)
            if (auto const eq = token.find('='); eq != std::string::npos && iequals(token.substr(0, eq), "rser"))
                if (auto const v = parse_quantity(token.substr(eq + 1)))
                    circuit.params.esr = *v;
    }

    double conductance = 0.0;
    for (auto const& r: resistors)
    {
        auto const v = r.scalar();
        if (!has_nodes(r, out, "0") || !v || !(v->magnitude > 0))
            mismatch(fmt::format("resistor '{}' is not a load across the output", r.name));
        conductance += 1.0 / v->magnitude;
    }
    if (conductance == 0.0)
        mismatch("no load resistor across the output");
    circuit.params.load = 1.0 / conductance;

    auto const l_value = inductor.scalar();
    if (!l_value)
        mismatch("inductor value is not a plain number");
    circuit.params.inductance = l_value->magnitude;

    auto const& pulse_source = pulse_sources.front();
    auto const pulse = *parse_pulse(pulse_source.value);
    circuit.pulse_source = pulse_source.name;

    if (switches.empty())
    {
        // Pulse source drives the switching node directly.
        if (!dc_sources.empty())
            mismatch("DC source present without a switch");
        if (!(iequals(pulse_source.nodes[0], sw) && is_ground(pulse_source.nodes[1])))
            mismatch("pulse source does not drive the switching node");
        circuit.pulse_at_switch_node = true;
        circuit.params.v_in = std::max(pulse.high, pulse.low);
        circuit.params.duty = duty_of(pulse);
        circuit.switch_element = pulse_source.name;
        circuit.input_node = sw;
        circuit.input_source = pulse_source.name;
    }
    else
    {
        auto const& sw_el = switches.front();
        std::string in;
        if (iequals(sw_el.nodes[0], sw))
            in = sw_el.nodes[1];
        else if (iequals(sw_el.nodes[1], sw))
            in = sw_el.nodes[0];
        else
            mismatch("switch does not connect to the switching node");
        if (dc_sources.size() != 1)
            mismatch("expected exactly one DC input source");
        auto const& supply = dc_sources.front();
        if (!(iequals(supply.nodes[0], in) && is_ground(supply.nodes[1])))
            mismatch("DC source does not feed the switch");
        if (!has_nodes(pulse_source, sw_el.nodes[2], sw_el.nodes[3]))
            mismatch("pulse source does not drive the switch control");
        if (diodes.empty() || !(is_ground(diodes.front().nodes[0]) && iequals(diodes.front().nodes[1], sw)))
            mismatch("freewheeling diode from ground to the switching node is missing");

        circuit.input_node = in;
        circuit.input_source = supply.name;
        circuit.switch_element = sw_el.name;
        circuit.params.v_in = supply.scalar()->magnitude;
        auto duty = duty_of(pulse);
        // Control polarity: a source wired reversed across the control pins inverts the pulse.
        if (!iequals(pulse_source.nodes[0], sw_el.nodes[2]))
            duty = 1.0 - duty;
        circuit.params.duty = duty;
    }
    circuit.params.f_switch = 1.0 / pulse.period;

    try
    {
        circuit.params.validate();
    }
    catch (Error const& e)
    {
        mismatch(e.what());
    }
    return circuit;
}

// ---------------------------------------------------------------------------
// Reference integrator

namespace
{
    constexpr int default_steps_per_period = 400;
    constexpr int startup_steps_per_period = 50;
    constexpr int min_steps_per_period = 50;
    constexpr double max_horizon_periods = 20000.0;

    double slowest_time_constant(BuckParams const& p)
    {
        auto const a = 1.0 / (p.load * p.capacitance);
        auto const b = 1.0 / (p.inductance * p.capacitance);
        auto const disc = a * a - 4.0 * b;
        if (disc < 0)
            return 2.0 / a;
        return 2.0 / (a - std::sqrt(disc));
    }

    enum class Mode
    {
        On,
        Off,  // diode conducting
        Idle, // inductor current clamped at zero
    };

    struct State
    {
        double il = 0.0;
        double vc = 0.0;
    };

    class BuckModel
    {
      public:
        explicit BuckModel(BuckParams const& p):
            _p(p), _k(p.load / (p.load + p.esr))
        {
        }

        double vout(State const& s) const { return _k * (s.vc + _p.esr * s.il); }

        // Trapezoidal step of dx/dt = A x + b over h.
        State step(State const& s, double h, Mode mode) const
        {
            auto const& p = _p;
            if (mode == Mode::Idle)
            {
                auto const a = -_k / (p.load * p.capacitance);
                auto const vc = s.vc * (1.0 + 0.5 * h * a) / (1.0 - 0.5 * h * a);
                return { 0.0, vc };
            }
            double const a11 = -_k * p.esr / p.inductance;
            double const a12 = -_k / p.inductance;
            double const a21 = (1.0 - _k * p.esr / p.load) / p.capacitance;
            double const a22 = -_k / (p.load * p.capacitance);
            double const b1 = mode == Mode::On ? p.v_in / p.inductance : 0.0;

            auto const hh = 0.5 * h;
            // rhs = (I + h/2 A) x + h b
            double const r1 = s.il + hh * (a11 * s.il + a12 * s.vc) + h * b1;
            double const r2 = s.vc + hh * (a21 * s.il + a22 * s.vc);
            // (I - h/2 A) x' = rhs
            double const m11 = 1.0 - hh * a11, m12 = -hh * a12;
            double const m21 = -hh * a21, m22 = 1.0 - hh * a22;
            double const det = m11 * m22 - m12 * m21;
            return { (r1 * m22 - m12 * r2) / det, (m11 * r2 - m21 * r1) / det };
        }

      private:
        BuckParams _p;
        double _k;
    };
} // namespace

TransientSpec default_transient(BuckParams const& params, bool with_startup)
{
    params.validate();
    auto const period = params.period();
    auto const tau = slowest_time_constant(params);
    auto const settle_multiple = with_startup ? 10.0 : 15.0;
    auto periods = std::ceil(std::max(400.0, settle_multiple * tau / period) - 1e-9);
    periods = std::min(periods, max_horizon_periods);

    TransientSpec spec;
    spec.t_stop = periods * period;
    if (with_startup)
    {
        spec.t_step_hint = period / startup_steps_per_period;
        spec.t_start_record = 0.0;
    }
    else
    {
        spec.t_step_hint = period / default_steps_per_period;
        auto const tail_periods = std::min(std::floor(0.25 * periods), 100.0);
        spec.t_start_record = (periods - tail_periods) * period;
    }
    return spec;
}

Dataset run_reference_buck(BuckParams const& params, TransientSpec const& spec)
{
    BuckCircuit circuit;
    circuit.params = params;
    return run_reference_buck(circuit, spec);
}

Dataset run_reference_buck(BuckCircuit const& circuit, TransientSpec const& spec)
{
    auto const& p = circuit.params;
    p.validate();
    spec.validate();

    auto const period = p.period();
    int steps = default_steps_per_period;
    if (spec.t_step_hint > 0)
        steps = static_cast<int>(std::lround(period / spec.t_step_hint));
    if (steps < min_steps_per_period)
        throw Error(Errc::StepTooCoarse, fmt::format("{} steps per switching period, at least {} needed", steps, min_steps_per_period));

    auto const h = period / steps;
    auto const t_on = p.duty * period;

    // Step boundaries within one period, with the turn-off instant inserted.
    std::vector<double> bounds;
    bounds.reserve(static_cast<std::size_t>(steps) + 2);
    for (int i = 0; i <= steps; ++i)
        bounds.push_back(i * h);
    bounds.back() = period;
    bounds.push_back(t_on);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end(), [h](double a, double b) { return b - a < 1e-9 * h; }), bounds.end());

    BuckModel const model(p);
    State s;

    std::array<std::vector<double>, 6> cols;
    auto const estimate = static_cast<std::size_t>((spec.t_stop - spec.t_start_record) / h) + 16;
    for (auto& c: cols)
        c.reserve(estimate);

    auto record = [&](double t, State const& st, Mode mode) {
        if (t < spec.t_start_record)
            return;
        auto const vo = model.vout(st);
        double const vsw = mode == Mode::On ? p.v_in : (mode == Mode::Off ? 0.0 : vo);
        cols[0].push_back(t);
        cols[1].push_back(vo);
        cols[2].push_back(vsw);
        cols[3].push_back(p.v_in);
        cols[4].push_back(st.il);
        cols[5].push_back(mode == Mode::On ? st.il : 0.0);
    };

    record(0.0, s, Mode::Off);
    auto const total_periods = static_cast<long>(std::ceil(spec.t_stop / period - 1e-9));
    for (long n = 0; n < total_periods; ++n)
    {
        auto const t0 = static_cast<double>(n) * period;
        for (std::size_t i = 1; i < bounds.size(); ++i)
        {
            auto a = bounds[i - 1];
            auto b = bounds[i];
            if (t0 + a >= spec.t_stop)
                break;
            if (t0 + b > spec.t_stop)
                b = spec.t_stop - t0;
            auto const dt = b - a;
            if (dt <= 0)
                continue;

            Mode mode = a < t_on - 1e-9 * h ? Mode::On : Mode::Off;
            if (mode == Mode::Off && s.il <= 0.0)
                mode = Mode::Idle;

            auto next = model.step(s, dt, mode);
            if (mode == Mode::Off && next.il < 0.0)
            {
                // Diode turns off inside this step: advance to the zero crossing, then idle.
                auto const theta = s.il / (s.il - next.il);
                auto mid = model.step(s, theta * dt, Mode::Off);
                mid.il = 0.0;
                next = model.step(mid, (1.0 - theta) * dt, Mode::Idle);
                mode = Mode::Idle;
            }
            s = next;
            record(t0 + b, s, mode);
        }
    }

    auto const v = [](std::string_view node) { return fmt::format("V({})", to_lower(node)); };
    auto const i = [](std::string_view element) { return fmt::format("I({})", element); };
    std::vector<Variable> vars {
        { "time", Quantity::Time },
        { v(circuit.output_node), Quantity::Voltage },
        { v(circuit.switch_node), Quantity::Voltage },
        { v(circuit.input_node), Quantity::Voltage },
        { i(circuit.inductor), Quantity::Current },
        { i(circuit.switch_element), Quantity::Current },
    };
    std::vector<std::vector<double>> columns(std::make_move_iterator(cols.begin()), std::make_move_iterator(cols.end()));
    if (circuit.pulse_at_switch_node)
    {
        // Input and switching node coincide; keep a single column.
        vars.erase(vars.begin() + 3);
        columns.erase(columns.begin() + 3);
    }
    return Dataset(std::move(vars), std::move(columns));
}

// ---------------------------------------------------------------------------
// External engine

namespace
{
    std::string shell_quote(std::string const& s)
    {
        std::string out = "'";
        for (char c: s)
        {
            if (c == '\'')
                out += "'\\''";
            else
                out += c;
        }
        return out + "'";
    }

    void replace_all(std::string& text, std::string_view what, std::string const& with)
    {
        for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + with.size()))
            text.replace(pos, what.size(), with);
    }

    std::string read_file(std::filesystem::path const& path)
    {
        std::ifstream in(path, std::ios::binary);
        return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
    }

    bool resolvable(std::string const& program)
    {
        if (program.find('/') != std::string::npos)
            return ::access(program.c_str(), X_OK) == 0;
        char const* path = std::getenv("PATH");
        if (!path)
            return false;
        std::istringstream dirs(path);
        std::string dir;
        while (std::getline(dirs, dir, ':'))
        {
            auto const candidate = (dir.empty() ? std::string(".") : dir) + "/" + program;
            if (::access(candidate.c_str(), X_OK) == 0)
                return true;
        }
        return false;
    }

    class TempDir
    {
      public:
        TempDir(std::filesystem::path const& parent, bool keep): _keep(keep)
        {
            auto const base = parent.empty() ? std::filesystem::temp_directory_path() : parent;
            std::filesystem::create_directories(base);
            auto pattern = (base / "spiceagent-XXXXXX").string();
            if (!::mkdtemp(pattern.data()))
                throw Error(Errc::EngineFailure, "cannot create a temporary working directory");
            _path = pattern;
        }
        ~TempDir()
        {
            if (!_keep)
            {
                std::error_code ec;
                std::filesystem::remove_all(_path, ec);
            }
        }
        TempDir(TempDir const&) = delete;
        TempDir& operator=(TempDir const&) = delete;

        std::filesystem::path const& path() const { return _path; }

      private:
        std::filesystem::path _path;
        bool _keep;
    };

    std::string deck_for_engine(Netlist const& netlist, TransientSpec const& spec)
    {
        std::string text;
        // SPICE3-style engines read the first line as the title.
        if (netlist.cards().empty() || !std::holds_alternative<Comment>(netlist.cards().front()))
            text += "* spiceagent deck\n";
        std::vector<Card> cards = netlist.cards();
        if (netlist.directives("tran").empty())
        {
            auto const step = spec.t_step_hint > 0 ? spec.t_step_hint : spec.t_stop / 10000.0;
            cards.emplace_back(Directive { "tran",
                                           fmt::format("{} {} {}", format_quantity(step), format_quantity(spec.t_stop), format_quantity(spec.t_start_record)) });
        }
        return text + serialize_netlist(Netlist(std::move(cards), true));
    }
} // namespace

Dataset run_external(Netlist const& netlist, TransientSpec const& spec, EngineConfig const& config)
{
    config.validate();
    spec.validate();

    std::istringstream words(config.command_template);
    std::string program;
    words >> program;
    if (program.empty() || !resolvable(program))
        throw Error(Errc::EngineNotFound, fmt::format("simulator executable '{}' not found", program));

    TempDir dir(config.working_dir, config.keep_artifacts);
    auto const deck_path = dir.path() / "circuit.cir";
    auto const raw_path = dir.path() / "circuit.raw";
    auto const out_path = dir.path() / "engine.stdout";
    auto const err_path = dir.path() / "engine.stderr";
    {
        std::ofstream deck(deck_path, std::ios::binary);
        deck << deck_for_engine(netlist, spec);
    }

    auto command = config.command_template;
    replace_all(command, "{netlist_path}", shell_quote(deck_path.string()));
    replace_all(command, "{raw_path}", shell_quote(raw_path.string()));

    pid_t const pid = ::fork();
    if (pid < 0)
        throw Error(Errc::EngineFailure, "fork failed");
    if (pid == 0)
    {
        ::setpgid(0, 0);
        if (::chdir(dir.path().c_str()) != 0)
            ::_exit(126);
        int const out_fd = ::open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        int const err_fd = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        int const null_fd = ::open("/dev/null", O_RDONLY);
        if (out_fd < 0 || err_fd < 0 || null_fd < 0)
            ::_exit(126);
        ::dup2(null_fd, STDIN_FILENO);
        ::dup2(out_fd, STDOUT_FILENO);
        ::dup2(err_fd, STDERR_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);

    auto const deadline = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(config.timeout);
    int status = 0;
    for (;;)
    {
        auto const r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid)
            break;
        if (r < 0 && errno != EINTR)
            throw Error(Errc::EngineFailure, "waitpid failed");
        if (std::chrono::steady_clock::now() >= deadline)
        {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            throw Error(Errc::EngineTimeout, fmt::format("simulator killed after {:.3g} s", config.timeout.count()));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

    auto const diagnostics = read_file(err_path);
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
        throw Error(Errc::EngineNotFound, fmt::format("simulator could not be started: {}", diagnostics));
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    {
        auto log = read_file(dir.path() / "circuit.log");
        throw Error(Errc::EngineFailure,
                    fmt::format("simulator exited with status {}: {}{}", WIFEXITED(status) ? WEXITSTATUS(status) : -1, diagnostics, log));
    }
    if (!std::filesystem::exists(raw_path))
        throw Error(Errc::RawMissing, fmt::format("simulator produced no raw file; stderr: {}", diagnostics));
    return parse_raw(read_file(raw_path));
}

std::string_view engine_kind_name(EngineKind kind) noexcept
{
    switch (kind)
    {
        case EngineKind::Reference: return "reference";
        case EngineKind::External: return "external";
        case EngineKind::Auto: return "auto";
    }
    return "auto";
}

EngineKind engine_kind_from_name(std::string_view name)
{
    if (iequals(name, "reference"))
        return EngineKind::Reference;
    if (iequals(name, "external"))
        return EngineKind::External;
    if (iequals(name, "auto"))
        return EngineKind::Auto;
    throw Error(Errc::ConfigError, fmt::format("unknown engine '{}' (reference|external|auto)", name));
}

Dataset simulate(Netlist const& netlist, SimulatorOptions const& options, bool with_startup)
{
    auto external = [&]() {
        if (!options.external)
            throw Error(Errc::ConfigError, "no external simulator configured");
        auto spec = transient_from_netlist(netlist).value_or(TransientSpec { 1e-3, 0.0, 0.0 });
        if (with_startup)
            spec.t_start_record = 0.0;
        return run_external(netlist, spec, *options.external);
    };

    switch (options.kind)
    {
        case EngineKind::External: return external();
        case EngineKind::Reference: {
            auto const circuit = detect_buck_pattern(netlist);
            return run_reference_buck(circuit, default_transient(circuit.params, with_startup));
        }
        case EngineKind::Auto: break;
    }

    std::optional<BuckCircuit> circuit;
    try
    {
        circuit = detect_buck_pattern(netlist);
    }
    catch (Error const& e)
    {
        if (e.code() != Errc::PatternMismatch || !options.external)
            throw;
    }
    if (circuit)
        return run_reference_buck(*circuit, default_transient(circuit->params, with_startup));
    return external();
}

} // namespace spiceagent
