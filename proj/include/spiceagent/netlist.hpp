// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spiceagent
{

/// Parses a SPICE number with an optional engineering suffix ("10k", "2.2u",
/// "1meg", "100nH"). Trailing unit letters after the suffix are ignored, as
/// SPICE does. Returns nullopt when the text does not start with a number.
std::optional<double> parse_quantity(std::string_view text);

/// Shortest suffix form: 1e4 -> "10k", 1.05e6 -> "1.05meg", 0.5 -> "500m".
std::string format_quantity(double value);

struct PhysicalValue
{
    double magnitude = 0.0;
    std::string unit;

    bool operator==(PhysicalValue const&) const = default;
};

enum class ComponentKind
{
    Resistor,
    Inductor,
    Capacitor,
    VoltageSource,
    CurrentSource,
    Diode,
    Switch,
    Subcircuit,
    Mosfet,
    Bjt,
    Opaque, ///< any other leading letter; tokens are kept verbatim in `value`
};

ComponentKind kind_from_name(std::string_view name) noexcept;
char kind_letter(ComponentKind kind) noexcept;
/// Unit symbol for kinds that carry a scalar value ("ohm", "H", "F", "V", "A"), empty otherwise.
std::string_view kind_unit(ComponentKind kind) noexcept;

struct Component
{
    std::string name;
    ComponentKind kind = ComponentKind::Opaque;
    /// Node list. For subcircuit instances this is the ordered pin list and
    /// the subcircuit name is the first token of `value`.
    std::vector<std::string> nodes;
    /// Everything after the nodes, whitespace-normalized.
    std::string value;

    bool operator==(Component const&) const = default;

    /// Subcircuit name for X cards, empty otherwise.
    std::string subckt() const;
    /// Scalar value for R/L/C and DC sources; nullopt for models, waveforms and expressions.
    std::optional<PhysicalValue> scalar() const;
    std::string to_line() const;

    /// Parses a single (already continuation-merged) component line.
    static Component parse(std::string_view line, int line_no = 0);
};

struct Directive
{
    std::string keyword; ///< lowercase, without the leading '.'
    std::string args;

    bool operator==(Directive const&) const = default;
};

struct Comment
{
    std::string text; ///< everything after the '*'

    bool operator==(Comment const&) const = default;
};

using Card = std::variant<Component, Directive, Comment>;

std::string card_to_line(Card const& card);

struct ConnectivityReport
{
    bool connected = false;                ///< some chain of components joins the nodes
    std::vector<Component> direct_links;   ///< components with both nodes among their terminals
};

/// Immutable, ordered model of a SPICE deck. Edits return new values.
///
/// Components inside .subckt/.ends blocks are scoped to that block: their names
/// only have to be unique within it, and name lookups address the top level.
class Netlist
{
  public:
    Netlist() = default;
    explicit Netlist(std::vector<Card> cards, bool end_present = true);

    std::vector<Card> const& cards() const noexcept { return _cards; }
    bool end_present() const noexcept { return _end_present; }
    /// Text of a leading comment card, if any.
    std::string title() const;

    /// Top-level components in deck order.
    std::vector<Component> components() const;
    Component const* find(std::string_view name) const;
    bool has_node(std::string_view node) const;
    /// Distinct top-level node names in first-appearance order.
    std::vector<std::string> nodes() const;
    std::vector<Directive> directives(std::string_view keyword) const;

    bool operator==(Netlist const&) const = default;

  private:
    std::vector<Card> _cards;
    bool _end_present = true;
};

Netlist parse_netlist(std::string_view text);
std::string serialize_netlist(Netlist const& netlist);

Netlist set_component_value(Netlist const& netlist, std::string_view name, PhysicalValue const& value);
Netlist rewire_pin(Netlist const& netlist, std::string_view name, std::size_t pin_index, std::string_view node);
Netlist add_component(Netlist const& netlist, Component component);
/// Replaces a component card wholesale (same name); used for waveform sources.
Netlist replace_component(Netlist const& netlist, Component component);
Netlist remove_component(Netlist const& netlist, std::string_view name);

ConnectivityReport connectivity_query(Netlist const& netlist, std::string_view node_a, std::string_view node_b);

/// True iff one two-terminal component of `kind` whose value lies within
/// `rel_tolerance` of `value` directly bridges the two nodes.
bool pin_connected_via(Netlist const& netlist,
                       std::string_view pin_node,
                       std::string_view target_node,
                       ComponentKind kind,
                       double value,
                       double rel_tolerance = 0.01);

bool iequals(std::string_view a, std::string_view b) noexcept;
std::string to_lower(std::string_view text);

} // namespace spiceagent
