// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/dataset.hpp>
#include <spiceagent/error.hpp>
#include <spiceagent/netlist.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <optional>

static_assert(std::endian::native == std::endian::little, "raw payload handling assumes a little-endian host");

namespace spiceagent
{

std::string_view quantity_name(Quantity q) noexcept
{
    switch (q)
    {
        case Quantity::Time: return "time";
        case Quantity::Voltage: return "voltage";
        case Quantity::Current: return "device_current";
        case Quantity::Other: return "other";
    }
    return "other";
}

Quantity quantity_from_type(std::string_view type) noexcept
{
    auto const t = to_lower(type);
    if (t == "time")
        return Quantity::Time;
    if (t == "voltage")
        return Quantity::Voltage;
    if (t.find("current") != std::string::npos)
        return Quantity::Current;
    return Quantity::Other;
}

std::string_view quantity_unit(Quantity q) noexcept
{
    switch (q)
    {
        case Quantity::Time: return "s";
        case Quantity::Voltage: return "V";
        case Quantity::Current: return "A";
        case Quantity::Other: return "";
    }
    return "";
}

Dataset::Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> columns):
    _variables(std::move(variables)), _columns(std::move(columns))
{
    if (_variables.empty() || _variables.size() != _columns.size())
        throw Error(Errc::InvalidArgument, "dataset needs one column per variable and at least a time column");
    auto const n = _columns.front().size();
    for (auto const& column: _columns)
        if (column.size() != n)
            throw Error(Errc::InvalidArgument, "dataset columns have different lengths");
    auto const& t = _columns.front();
    for (std::size_t i = 1; i < n; ++i)
        if (!(t[i] > t[i - 1]))
            throw Error(Errc::NonMonotonicTime, fmt::format("time not strictly increasing at point {}", i));
}

std::size_t Dataset::find(std::string_view name) const noexcept
{
    for (std::size_t i = 0; i < _variables.size(); ++i)
        if (iequals(_variables[i].name, name))
            return i;
    return npos;
}

namespace
{
    struct Header
    {
        std::vector<std::pair<std::string, std::string>> fields;
        std::vector<Variable> variables;
        std::size_t n_vars = 0;
        std::size_t n_points = 0;
        std::string flags;
        bool binary = false;
        std::size_t payload_offset = 0;
    };

    bool looks_utf16(std::span<std::uint8_t const> bytes)
    {
        return bytes.size() >= 4 && bytes[0] != 0 && bytes[1] == 0 && bytes[3] == 0;
    }

    // Decodes the header up to and including the "Binary:\n"/"Values:\n" marker.
    // Returns the decoded text and the byte offset where the payload begins.
    std::pair<std::string, std::size_t> read_header_text(std::span<std::uint8_t const> bytes)
    {
        bool const wide = looks_utf16(bytes);
        std::size_t const stride = wide ? 2 : 1;
        std::string text;
        std::string line;
        for (std::size_t i = 0; i + stride <= bytes.size(); i += stride)
        {
            char const c = static_cast<char>(bytes[i]);
            text += c;
            if (c != '\n')
            {
                line += c;
                continue;
            }
            auto const trimmed = to_lower(line.substr(0, line.find_last_not_of(" \t\r") + 1));
            line.clear();
            if (trimmed == "binary:" || trimmed == "values:")
                return { text, i + stride };
        }
        throw Error(Errc::HeaderMalformed, "no 'Binary:' or 'Values:' marker found");
    }

    std::string trim_copy(std::string_view s)
    {
        auto const b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos)
            return {};
        auto const e = s.find_last_not_of(" \t\r");
        return std::string(s.substr(b, e - b + 1));
    }

    std::size_t parse_count(std::string const& value, std::string_view field)
    {
        std::size_t out = 0;
        auto const v = trim_copy(value);
        auto const [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc {} || ptr != v.data() + v.size())
            throw Error(Errc::HeaderMalformed, fmt::format("field '{}' is not a count: '{}'", field, value));
        return out;
    }

    Header parse_header(std::span<std::uint8_t const> bytes)
    {
        auto [text, offset] = read_header_text(bytes);
        Header h;
        h.payload_offset = offset;

        std::vector<std::string> lines;
        std::size_t pos = 0;
        while (pos < text.size())
        {
            auto nl = text.find('\n', pos);
            if (nl == std::string::npos)
                nl = text.size();
            lines.push_back(text.substr(pos, nl - pos));
            pos = nl + 1;
        }

        bool in_variables = false;
        for (auto const& raw_line: lines)
        {
            auto const line = trim_copy(raw_line);
            if (line.empty())
                continue;
            auto const lower = to_lower(line);
            if (lower == "binary:" || lower == "values:")
            {
                h.binary = lower == "binary:";
                break;
            }
            auto const colon = line.find(':');
            bool const indented = raw_line.front() == '\t' || raw_line.front() == ' ';
            if (in_variables && (indented || colon == std::string::npos))
            {
                // "<index> <name> <type> [...]"
                std::vector<std::string> tokens;
                std::size_t i = 0;
                while (i < line.size())
                {
                    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
                        ++i;
                    auto const start = i;
                    while (i < line.size() && line[i] != ' ' && line[i] != '\t')
                        ++i;
                    if (i > start)
                        tokens.push_back(line.substr(start, i - start));
                }
                if (tokens.size() < 3)
                    throw Error(Errc::HeaderMalformed, fmt::format("bad variable line '{}'", line));
                h.variables.push_back({ tokens[1], quantity_from_type(tokens[2]) });
                continue;
            }
            if (colon == std::string::npos)
                throw Error(Errc::HeaderMalformed, fmt::format("unexpected header line '{}'", line));
            in_variables = false;
            auto key = to_lower(trim_copy(line.substr(0, colon)));
            auto value = trim_copy(line.substr(colon + 1));
            if (key == "variables")
                in_variables = true;
            h.fields.emplace_back(key, value);
        }

        auto field = [&](std::string_view key) -> std::optional<std::string> {
            for (auto const& [k, v]: h.fields)
                if (k == key)
                    return v;
            return std::nullopt;
        };
        for (auto key: { "title", "plotname", "flags", "no. variables", "no. points", "variables" })
            if (!field(key))
                throw Error(Errc::HeaderMalformed, fmt::format("missing header field '{}'", key));

        h.flags = to_lower(*field("flags"));
        if (h.flags.find("complex") != std::string::npos)
            throw Error(Errc::HeaderMalformed, "complex-valued raw files are not supported");
        h.n_vars = parse_count(*field("no. variables"), "No. Variables");
        h.n_points = parse_count(*field("no. points"), "No. Points");
        if (h.n_vars == 0 || h.variables.size() != h.n_vars)
            throw Error(Errc::HeaderMalformed,
                        fmt::format("declared {} variables, listed {}", h.n_vars, h.variables.size()));
        return h;
    }

    template <typename T>
    T load(std::uint8_t const* p)
    {
        T value;
        std::memcpy(&value, p, sizeof(T));
        return value;
    }

    void check_time(std::vector<double> const& t)
    {
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1]))
                throw Error(Errc::NonMonotonicTime, fmt::format("time not strictly increasing at point {}", i));
    }

    Dataset read_binary(Header const& h, std::span<std::uint8_t const> payload)
    {
        auto const n = h.n_points;
        auto const nv = h.n_vars;
        std::size_t const all_double = n * nv * 8;
        std::size_t const mixed = n * (8 + (nv - 1) * 4);

        // Size arithmetic first; the "double" flag only breaks the tie when both layouts agree.
        bool doubles = false;
        if (payload.size() == all_double && payload.size() == mixed)
            doubles = true;
        else if (payload.size() == all_double)
            doubles = true;
        else if (payload.size() == mixed)
            doubles = false;
        else
            throw Error(Errc::PayloadSizeMismatch,
                        fmt::format("{} points x {} variables needs {} or {} bytes, found {}", n, nv, mixed, all_double, payload.size()));

        std::vector<std::vector<double>> columns(nv, std::vector<double>(n));
        auto const* p = payload.data();
        for (std::size_t i = 0; i < n; ++i)
        {
            // LTspice flags some time points by negating them.
            columns[0][i] = std::abs(load<double>(p));
            p += 8;
            for (std::size_t v = 1; v < nv; ++v)
            {
                if (doubles)
                {
                    columns[v][i] = load<double>(p);
                    p += 8;
                }
                else
                {
                    columns[v][i] = static_cast<double>(load<float>(p));
                    p += 4;
                }
            }
        }
        check_time(columns[0]);
        return Dataset(h.variables, std::move(columns));
    }

    Dataset read_ascii(Header const& h, std::span<std::uint8_t const> payload, bool wide)
    {
        std::string text;
        text.reserve(payload.size());
        std::size_t const stride = wide ? 2 : 1;
        for (std::size_t i = 0; i < payload.size(); i += stride)
            text += static_cast<char>(payload[i]);

        auto const n = h.n_points;
        auto const nv = h.n_vars;
        std::vector<std::vector<double>> columns(nv, std::vector<double>(n));

        char const* p = text.data();
        char const* end = text.data() + text.size();
        auto next_token = [&]() -> std::string_view {
            while (p < end && std::isspace(static_cast<unsigned char>(*p)))
                ++p;
            auto const* start = p;
            while (p < end && !std::isspace(static_cast<unsigned char>(*p)))
                ++p;
            return { start, static_cast<std::size_t>(p - start) };
        };
        auto number = [&](std::string_view token, std::size_t point) {
            double value = 0.0;
            auto const [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (token.empty() || ec != std::errc {} || ptr != token.data() + token.size())
                throw Error(Errc::PayloadSizeMismatch, fmt::format("bad or missing value at point {}", point));
            return value;
        };

        for (std::size_t i = 0; i < n; ++i)
        {
            (void) number(next_token(), i); // point index
            for (std::size_t v = 0; v < nv; ++v)
                columns[v][i] = number(next_token(), i);
            columns[0][i] = std::abs(columns[0][i]);
        }
        if (!next_token().empty())
            throw Error(Errc::PayloadSizeMismatch, "trailing data after declared points");
        check_time(columns[0]);
        return Dataset(h.variables, std::move(columns));
    }

    void append_header_line(std::string& out, std::string_view line) { (out += line) += '\n'; }
} // namespace

Dataset parse_raw(std::span<std::uint8_t const> bytes)
{
    if (bytes.empty())
        throw Error(Errc::HeaderMalformed, "empty raw file");
    auto const header = parse_header(bytes);
    auto const payload = bytes.subspan(header.payload_offset);
    if (header.binary)
        return read_binary(header, payload);
    return read_ascii(header, payload, looks_utf16(bytes));
}

Dataset parse_raw(std::string_view bytes)
{
    return parse_raw(std::span<std::uint8_t const>(reinterpret_cast<std::uint8_t const*>(bytes.data()), bytes.size()));
}

std::string write_raw(Dataset const& dataset, RawEncoding encoding, std::string_view title)
{
    auto const& vars = dataset.variables();
    auto const n = dataset.n_points();

    std::string out;
    append_header_line(out, fmt::format("Title: {}", title));
    append_header_line(out, "Date: Thu Jan  1 00:00:00 1970");
    append_header_line(out, "Plotname: Transient Analysis");
    append_header_line(out, encoding == RawEncoding::BinaryDouble ? "Flags: real double" : "Flags: real forward");
    append_header_line(out, fmt::format("No. Variables: {}", vars.size()));
    append_header_line(out, fmt::format("No. Points: {}", n));
    append_header_line(out, "Offset: 0.0000000000000000e+000");
    append_header_line(out, "Command: spiceagent");
    append_header_line(out, "Variables:");
    for (std::size_t i = 0; i < vars.size(); ++i)
        append_header_line(out, fmt::format("\t{}\t{}\t{}", i, vars[i].name, quantity_name(vars[i].quantity)));

    if (encoding == RawEncoding::Ascii)
    {
        append_header_line(out, "Values:");
        for (std::size_t i = 0; i < n; ++i)
        {
            out += fmt::format("{}\t{:.17g}\n", i, dataset.time()[i]);
            for (std::size_t v = 1; v < vars.size(); ++v)
                out += fmt::format("\t{:.17g}\n", dataset.column(v)[i]);
        }
        return out;
    }

    append_header_line(out, "Binary:");
    bool const doubles = encoding == RawEncoding::BinaryDouble;
    out.reserve(out.size() + n * (8 + (vars.size() - 1) * (doubles ? 8 : 4)));
    auto put = [&out](auto value) {
        char buffer[sizeof(value)];
        std::memcpy(buffer, &value, sizeof(value));
        out.append(buffer, sizeof(value));
    };
    for (std::size_t i = 0; i < n; ++i)
    {
        put(dataset.time()[i]);
        for (std::size_t v = 1; v < vars.size(); ++v)
        {
            if (doubles)
                put(dataset.column(v)[i]);
            else
                put(static_cast<float>(dataset.column(v)[i]));
        }
    }
    return out;
}

} // namespace spiceagent
