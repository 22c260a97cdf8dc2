// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/error.hpp>
#include <spiceagent/netlist.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace spiceagent
{

bool iequals(std::string_view a, std::string_view b) noexcept
{
    return a.size() == b.size()
           && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
                  return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
              });
}

std::string to_lower(std::string_view text)
{
    std::string out(text);
    for (auto& c: out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

namespace
{
    bool is_space(char c) noexcept
    {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
    }

    std::vector<std::string> split_ws(std::string_view text)
    {
        std::vector<std::string> tokens;
        std::size_t i = 0;
        while (i < text.size())
        {
            while (i < text.size() && is_space(text[i]))
                ++i;
            auto const start = i;
            while (i < text.size() && !is_space(text[i]))
                ++i;
            if (i > start)
                tokens.emplace_back(text.substr(start, i - start));
        }
        return tokens;
    }

    std::string join(std::vector<std::string> const& tokens, std::size_t from, std::size_t to)
    {
        std::string out;
        for (auto i = from; i < to && i < tokens.size(); ++i)
        {
            if (!out.empty())
                out += ' ';
            out += tokens[i];
        }
        return out;
    }

    std::string_view trim(std::string_view text)
    {
        while (!text.empty() && is_space(text.front()))
            text.remove_prefix(1);
        while (!text.empty() && is_space(text.back()))
            text.remove_suffix(1);
        return text;
    }

    struct Suffix
    {
        std::string_view text;
        double factor;
    };

    // Render order, largest first. "meg" must be tested before "m" when parsing.
    constexpr std::array<Suffix, 10> render_suffixes {{
        { "t", 1e12 },
        { "g", 1e9 },
        { "meg", 1e6 },
        { "k", 1e3 },
        { "", 1.0 },
        { "m", 1e-3 },
        { "u", 1e-6 },
        { "n", 1e-9 },
        { "p", 1e-12 },
        { "f", 1e-15 },
    }};

    std::size_t required_nodes(ComponentKind kind) noexcept
    {
        switch (kind)
        {
            case ComponentKind::Switch:
            case ComponentKind::Mosfet: return 4;
            case ComponentKind::Bjt: return 3;
            case ComponentKind::Opaque: return 0;
            default: return 2;
        }
    }

    std::string scope_key(std::string_view scope, std::string_view name)
    {
        return to_lower(scope) + "/" + to_lower(name);
    }

    // Walks cards and reports, for each card index, the enclosing .subckt name ("" at top level).
    std::vector<std::string> card_scopes(std::vector<Card> const& cards)
    {
        std::vector<std::string> scopes;
        scopes.reserve(cards.size());
        std::vector<std::string> stack;
        for (auto const& card: cards)
        {
            if (auto const* d = std::get_if<Directive>(&card))
            {
                if (d->keyword == "subckt")
                {
                    auto const args = split_ws(d->args);
                    scopes.push_back(stack.empty() ? std::string {} : stack.back());
                    stack.push_back(args.empty() ? std::string("?") : args.front());
                    continue;
                }
                if (d->keyword == "ends" && !stack.empty())
                {
                    stack.pop_back();
                    scopes.push_back(stack.empty() ? std::string {} : stack.back());
                    continue;
                }
            }
            scopes.push_back(stack.empty() ? std::string {} : stack.back());
        }
        return scopes;
    }

    std::optional<std::size_t> locate(Netlist const& netlist, std::string_view name)
    {
        auto const& cards = netlist.cards();
        auto const scopes = card_scopes(cards);
        for (std::size_t i = 0; i < cards.size(); ++i)
        {
            auto const* c = std::get_if<Component>(&cards[i]);
            if (c && scopes[i].empty() && iequals(c->name, name))
                return i;
        }
        return std::nullopt;
    }

    // Index of the token carrying the scalar value inside Component::value, if any.
    std::optional<std::size_t> scalar_token(Component const& c, std::vector<std::string> const& tokens)
    {
        switch (c.kind)
        {
            case ComponentKind::Resistor:
            case ComponentKind::Inductor:
            case ComponentKind::Capacitor:
                if (!tokens.empty() && parse_quantity(tokens[0]))
                    return 0;
                return std::nullopt;
            case ComponentKind::VoltageSource:
            case ComponentKind::CurrentSource:
                if (!tokens.empty() && iequals(tokens[0], "dc"))
                {
                    if (tokens.size() > 1 && parse_quantity(tokens[1]))
                        return 1;
                    return std::nullopt;
                }
                if (!tokens.empty() && parse_quantity(tokens[0]))
                    return 0;
                return std::nullopt;
            default: return std::nullopt;
        }
    }

    struct UnionFind
    {
        std::map<std::string, std::string> parent;

        std::string find(std::string const& x)
        {
            auto it = parent.find(x);
            if (it == parent.end())
            {
                parent[x] = x;
                return x;
            }
            if (it->second == x)
                return x;
            auto root = find(it->second);
            parent[x] = root;
            return root;
        }

        void unite(std::string const& a, std::string const& b) { parent[find(a)] = find(b); }
    };
} // namespace

std::optional<double> parse_quantity(std::string_view text)
{
    text = trim(text);
    if (text.empty())
        return std::nullopt;
    if (text.front() == '+')
        text.remove_prefix(1);

    double mantissa = 0.0;
    auto const* first = text.data();
    auto const* last = text.data() + text.size();
    auto const [ptr, ec] = std::from_chars(first, last, mantissa, std::chars_format::general);
    if (ec != std::errc {})
        return std::nullopt;

    auto const rest = to_lower(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
    if (rest.empty())
        return mantissa;
    if (rest.starts_with("meg"))
        return mantissa * 1e6;
    if (rest.starts_with("mil"))
        return mantissa * 25.4e-6;
    if (rest.starts_with("\xc2\xb5")) // UTF-8 micro sign
        return mantissa * 1e-6;
    switch (rest.front())
    {
        case 'f': return mantissa * 1e-15;
        case 'p': return mantissa * 1e-12;
        case 'n': return mantissa * 1e-9;
        case 'u': return mantissa * 1e-6;
        case 'm': return mantissa * 1e-3;
        case 'k': return mantissa * 1e3;
        case 'g': return mantissa * 1e9;
        case 't': return mantissa * 1e12;
        default: break;
    }
    // Anything else is a unit name ("12V", "6ohm"); SPICE ignores it.
    if (std::isalpha(static_cast<unsigned char>(rest.front())))
        return mantissa;
    return std::nullopt;
}

std::string format_quantity(double value)
{
    if (value == 0.0)
        return "0";
    if (!std::isfinite(value))
        return fmt::format("{}", value);
    if (value < 0.0)
        return "-" + format_quantity(-value);

    if (value < 1e-15)
        return fmt::format("{:.15g}", value);
    for (auto const& suffix: render_suffixes)
        if (value >= suffix.factor * (1.0 - 1e-12))
            return fmt::format("{:.15g}{}", value / suffix.factor, suffix.text);
    return fmt::format("{:.15g}", value);
}

ComponentKind kind_from_name(std::string_view name) noexcept
{
    if (name.empty())
        return ComponentKind::Opaque;
    switch (std::toupper(static_cast<unsigned char>(name.front())))
    {
        case 'R': return ComponentKind::Resistor;
        case 'L': return ComponentKind::Inductor;
        case 'C': return ComponentKind::Capacitor;
        case 'V': return ComponentKind::VoltageSource;
        case 'I': return ComponentKind::CurrentSource;
        case 'D': return ComponentKind::Diode;
        case 'S': return ComponentKind::Switch;
        case 'X': return ComponentKind::Subcircuit;
        case 'M': return ComponentKind::Mosfet;
        case 'Q': return ComponentKind::Bjt;
        default: return ComponentKind::Opaque;
    }
}

char kind_letter(ComponentKind kind) noexcept
{
    switch (kind)
    {
        case ComponentKind::Resistor: return 'R';
        case ComponentKind::Inductor: return 'L';
        case ComponentKind::Capacitor: return 'C';
        case ComponentKind::VoltageSource: return 'V';
        case ComponentKind::CurrentSource: return 'I';
        case ComponentKind::Diode: return 'D';
        case ComponentKind::Switch: return 'S';
        case ComponentKind::Subcircuit: return 'X';
        case ComponentKind::Mosfet: return 'M';
        case ComponentKind::Bjt: return 'Q';
        case ComponentKind::Opaque: return '?';
    }
    return '?';
}

std::string_view kind_unit(ComponentKind kind) noexcept
{
    switch (kind)
    {
        case ComponentKind::Resistor: return "ohm";
        case ComponentKind::Inductor: return "H";
        case ComponentKind::Capacitor: return "F";
        case ComponentKind::VoltageSource: return "V";
        case ComponentKind::CurrentSource: return "A";
        default: return "";
    }
}

std::string Component::subckt() const
{
    if (kind != ComponentKind::Subcircuit)
        return {};
    auto const tokens = split_ws(value);
    return tokens.empty() ? std::string {} : tokens.front();
}

std::optional<PhysicalValue> Component::scalar() const
{
    auto const tokens = split_ws(value);
    auto const index = scalar_token(*this, tokens);
    if (!index)
        return std::nullopt;
    return PhysicalValue { *parse_quantity(tokens[*index]), std::string(kind_unit(kind)) };
}

std::string Component::to_line() const
{
    std::string line = name;
    for (auto const& node: nodes)
        line += ' ' + node;
    if (!value.empty())
        line += ' ' + value;
    return line;
}

Component Component::parse(std::string_view line, int line_no)
{
    auto const tokens = split_ws(line);
    if (tokens.empty())
        throw Error(Errc::MalformedCard, "empty component card", line_no);

    Component c;
    c.name = tokens.front();
    c.kind = kind_from_name(c.name);

    if (c.kind == ComponentKind::Opaque)
    {
        c.value = join(tokens, 1, tokens.size());
        return c;
    }

    if (c.kind == ComponentKind::Subcircuit)
    {
        auto end = tokens.size();
        for (std::size_t i = 1; i < tokens.size(); ++i)
        {
            if (tokens[i].find('=') != std::string::npos || iequals(tokens[i], "params:"))
            {
                end = i;
                break;
            }
        }
        // pins..., subckt name, params...
        if (end < 4)
            throw Error(Errc::MalformedCard, fmt::format("subcircuit instance '{}' needs at least 2 pins and a subcircuit name", c.name), line_no);
        c.nodes.assign(tokens.begin() + 1, tokens.begin() + static_cast<std::ptrdiff_t>(end - 1));
        c.value = join(tokens, end - 1, tokens.size());
        return c;
    }

    auto const needed = required_nodes(c.kind);
    if (tokens.size() - 1 < needed)
        throw Error(Errc::MalformedCard,
                    fmt::format("component '{}' needs {} nodes, found {}", c.name, needed, tokens.size() - 1),
                    line_no);
    c.nodes.assign(tokens.begin() + 1, tokens.begin() + static_cast<std::ptrdiff_t>(1 + needed));
    c.value = join(tokens, 1 + needed, tokens.size());
    return c;
}

std::string card_to_line(Card const& card)
{
    struct Visitor
    {
        std::string operator()(Component const& c) const { return c.to_line(); }
        std::string operator()(Directive const& d) const
        {
            return d.args.empty() ? "." + d.keyword : fmt::format(".{} {}", d.keyword, d.args);
        }
        std::string operator()(Comment const& c) const { return "*" + c.text; }
    };
    return std::visit(Visitor {}, card);
}

Netlist::Netlist(std::vector<Card> cards, bool end_present): _cards(std::move(cards)), _end_present(end_present)
{
    auto const scopes = card_scopes(_cards);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < _cards.size(); ++i)
    {
        if (auto const* c = std::get_if<Component>(&_cards[i]))
        {
            if (!seen.insert(scope_key(scopes[i], c->name)).second)
                throw Error(Errc::DuplicateName, fmt::format("component '{}' defined twice", c->name));
        }
    }
}

std::string Netlist::title() const
{
    if (!_cards.empty())
        if (auto const* c = std::get_if<Comment>(&_cards.front()))
            return std::string(trim(c->text));
    return {};
}

std::vector<Component> Netlist::components() const
{
    std::vector<Component> out;
    auto const scopes = card_scopes(_cards);
    for (std::size_t i = 0; i < _cards.size(); ++i)
        if (auto const* c = std::get_if<Component>(&_cards[i]); c && scopes[i].empty())
            out.push_back(*c);
    return out;
}

Component const* Netlist::find(std::string_view name) const
{
    auto const index = locate(*this, name);
    return index ? &std::get<Component>(_cards[*index]) : nullptr;
}

bool Netlist::has_node(std::string_view node) const
{
    for (auto const& c: components())
        for (auto const& n: c.nodes)
            if (iequals(n, node))
                return true;
    return false;
}

std::vector<std::string> Netlist::nodes() const
{
    std::vector<std::string> out;
    for (auto const& c: components())
        for (auto const& n: c.nodes)
            if (std::none_of(out.begin(), out.end(), [&](auto const& seen) { return iequals(seen, n); }))
                out.push_back(n);
    return out;
}

std::vector<Directive> Netlist::directives(std::string_view keyword) const
{
    std::vector<Directive> out;
    for (auto const& card: _cards)
        if (auto const* d = std::get_if<Directive>(&card); d && iequals(d->keyword, keyword))
            out.push_back(*d);
    return out;
}

Netlist parse_netlist(std::string_view text)
{
    struct Logical
    {
        std::string text;
        int line;
    };
    std::vector<Logical> lines;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto const nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        auto const line = trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '+')
        {
            if (lines.empty())
                throw Error(Errc::MalformedCard, "continuation line without a preceding card", line_no);
            lines.back().text += ' ';
            lines.back().text += trim(line.substr(1));
            continue;
        }
        lines.push_back({ std::string(line), line_no });
    }

    std::vector<Card> cards;
    bool end_present = false;
    std::set<std::string> seen;
    std::vector<std::string> scope;
    for (auto const& [line, number]: lines)
    {
        if (line.front() == '*')
        {
            cards.emplace_back(Comment { line.substr(1) });
            continue;
        }
        if (line.front() == '.')
        {
            auto const tokens = split_ws(line);
            auto keyword = to_lower(std::string_view(tokens.front()).substr(1));
            if (keyword == "end")
            {
                end_present = true;
                break;
            }
            if (keyword == "subckt")
                scope.push_back(tokens.size() > 1 ? tokens[1] : "?");
            else if (keyword == "ends" && !scope.empty())
                scope.pop_back();
            cards.emplace_back(Directive { std::move(keyword), join(tokens, 1, tokens.size()) });
            continue;
        }
        auto component = Component::parse(line, number);
        if (!seen.insert(scope_key(scope.empty() ? "" : scope.back(), component.name)).second)
            throw Error(Errc::DuplicateName, fmt::format("component '{}' defined twice", component.name), number);
        cards.emplace_back(std::move(component));
    }

    if (cards.empty())
        throw Error(Errc::EmptyDeck, "netlist contains no cards");
    return Netlist(std::move(cards), end_present);
}

std::string serialize_netlist(Netlist const& netlist)
{
    std::string out;
    for (auto const& card: netlist.cards())
    {
        out += card_to_line(card);
        out += '\n';
    }
    if (netlist.end_present())
        out += ".end\n";
    return out;
}

Netlist set_component_value(Netlist const& netlist, std::string_view name, PhysicalValue const& value)
{
    auto const index = locate(netlist, name);
    if (!index)
        throw Error(Errc::UnknownComponent, fmt::format("no component named '{}'", name));

    auto cards = netlist.cards();
    auto& component = std::get<Component>(cards[*index]);
    auto tokens = split_ws(component.value);
    auto const slot = scalar_token(component, tokens);
    if (!slot)
        throw Error(Errc::NonScalarComponent, fmt::format("component '{}' does not carry a scalar value", component.name));
    tokens[*slot] = format_quantity(value.magnitude);
    component.value = join(tokens, 0, tokens.size());
    return Netlist(std::move(cards), netlist.end_present());
}

Netlist rewire_pin(Netlist const& netlist, std::string_view name, std::size_t pin_index, std::string_view node)
{
    auto const index = locate(netlist, name);
    if (!index)
        throw Error(Errc::UnknownComponent, fmt::format("no component named '{}'", name));

    auto cards = netlist.cards();
    auto& component = std::get<Component>(cards[*index]);
    if (pin_index >= component.nodes.size())
        throw Error(Errc::PinIndexOutOfRange,
                    fmt::format("component '{}' has {} pins, index {} requested", component.name, component.nodes.size(), pin_index));
    if (node.empty() || std::any_of(node.begin(), node.end(), is_space))
        throw Error(Errc::InvalidArgument, fmt::format("invalid node name '{}'", node));
    component.nodes[pin_index] = std::string(node);
    return Netlist(std::move(cards), netlist.end_present());
}

Netlist add_component(Netlist const& netlist, Component component)
{
    if (locate(netlist, component.name))
        throw Error(Errc::DuplicateName, fmt::format("component '{}' already exists", component.name));
    auto cards = netlist.cards();
    cards.emplace_back(std::move(component));
    return Netlist(std::move(cards), netlist.end_present());
}

Netlist replace_component(Netlist const& netlist, Component component)
{
    auto const index = locate(netlist, component.name);
    if (!index)
        throw Error(Errc::UnknownComponent, fmt::format("no component named '{}'", component.name));
    auto cards = netlist.cards();
    cards[*index] = std::move(component);
    return Netlist(std::move(cards), netlist.end_present());
}

Netlist remove_component(Netlist const& netlist, std::string_view name)
{
    auto const index = locate(netlist, name);
    if (!index)
        throw Error(Errc::UnknownComponent, fmt::format("no component named '{}'", name));
    auto cards = netlist.cards();
    cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(*index));
    return Netlist(std::move(cards), netlist.end_present());
}

ConnectivityReport connectivity_query(Netlist const& netlist, std::string_view node_a, std::string_view node_b)
{
    for (auto node: { node_a, node_b })
        if (!netlist.has_node(node))
            throw Error(Errc::UnknownNode, fmt::format("node '{}' does not appear in the netlist", node));

    ConnectivityReport report;
    UnionFind sets;
    for (auto const& c: netlist.components())
    {
        for (std::size_t i = 1; i < c.nodes.size(); ++i)
            sets.unite(to_lower(c.nodes[0]), to_lower(c.nodes[i]));
        if (c.nodes.size() == 2
            && ((iequals(c.nodes[0], node_a) && iequals(c.nodes[1], node_b))
                || (iequals(c.nodes[0], node_b) && iequals(c.nodes[1], node_a))))
            report.direct_links.push_back(c);
    }
    report.connected = iequals(node_a, node_b) || sets.find(to_lower(node_a)) == sets.find(to_lower(node_b));
    return report;
}

bool pin_connected_via(Netlist const& netlist,
                       std::string_view pin_node,
                       std::string_view target_node,
                       ComponentKind kind,
                       double value,
                       double rel_tolerance)
{
    auto const report = connectivity_query(netlist, pin_node, target_node);
    return std::any_of(report.direct_links.begin(), report.direct_links.end(), [&](Component const& c) {
        if (c.kind != kind)
            return false;
        auto const v = c.scalar();
        return v && std::abs(v->magnitude - value) <= rel_tolerance * std::abs(value);
    });
}

} // namespace spiceagent
