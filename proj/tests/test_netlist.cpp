// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/error.hpp>
#include <spiceagent/netlist.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace spiceagent;

namespace
{
Errc code_of(auto&& fn)
{
    try
    {
        fn();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    ADD_FAILURE() << "no spiceagent::Error thrown";
    return Errc::InvalidArgument;
}
} // namespace

TEST(Quantity, EngineeringSuffixes)
{
    EXPECT_DOUBLE_EQ(*parse_quantity("10k"), 1e4);
    EXPECT_DOUBLE_EQ(*parse_quantity("2.2u"), 2.2e-6);
    EXPECT_DOUBLE_EQ(*parse_quantity("1meg"), 1e6);
    EXPECT_DOUBLE_EQ(*parse_quantity("1MEG"), 1e6);
    EXPECT_DOUBLE_EQ(*parse_quantity("3m"), 3e-3);
    EXPECT_DOUBLE_EQ(*parse_quantity("100nH"), 100e-9);
    EXPECT_DOUBLE_EQ(*parse_quantity("5p"), 5e-12);
    EXPECT_DOUBLE_EQ(*parse_quantity("7f"), 7e-15);
    EXPECT_DOUBLE_EQ(*parse_quantity("1g"), 1e9);
    EXPECT_DOUBLE_EQ(*parse_quantity("2t"), 2e12);
    EXPECT_DOUBLE_EQ(*parse_quantity("10mil"), 254e-6);
    EXPECT_DOUBLE_EQ(*parse_quantity("4.7\xc2\xb5"), 4.7e-6);
    EXPECT_DOUBLE_EQ(*parse_quantity("12V"), 12.0);
    EXPECT_DOUBLE_EQ(*parse_quantity("1e-3"), 1e-3);
    EXPECT_DOUBLE_EQ(*parse_quantity("-5"), -5.0);
    EXPECT_FALSE(parse_quantity("PULSE(0"));
    EXPECT_FALSE(parse_quantity(""));
    EXPECT_FALSE(parse_quantity("k10"));
}

TEST(Quantity, ShortestSuffixForm)
{
    EXPECT_EQ(format_quantity(1e4), "10k");
    EXPECT_EQ(format_quantity(1.05e6), "1.05meg");
    EXPECT_EQ(format_quantity(0.5), "500m");
    EXPECT_EQ(format_quantity(10e-6), "10u");
    EXPECT_EQ(format_quantity(12), "12");
    EXPECT_EQ(format_quantity(0), "0");
    EXPECT_EQ(format_quantity(-2.2e-9), "-2.2n");
    EXPECT_EQ(format_quantity(22.1e3), "22.1k");
}

TEST(Quantity, FormatParseRoundTripIsTight)
{
    oracle::Rng rng(7);
    for (int i = 0; i < 2000; ++i)
    {
        auto const x = rng.log_uniform(1e-14, 1e13) * (rng.coin() ? 1.0 : -1.0);
        auto const back = *parse_quantity(format_quantity(x));
        EXPECT_NEAR(back, x, std::abs(x) * 1e-13) << format_quantity(x);
    }
}

TEST(Parse, ReferenceFixture)
{
    auto const deck = parse_netlist(fixtures::read("circuits/buck_reference.cir"));
    EXPECT_TRUE(deck.end_present());
    EXPECT_EQ(deck.title(), "Ideal buck converter: 12 V in, 50 % duty, 500 kHz");
    auto const comps = deck.components();
    ASSERT_EQ(comps.size(), 7u);
    EXPECT_EQ(comps[0].name, "V1");
    EXPECT_EQ(comps[1].kind, ComponentKind::Switch);
    EXPECT_EQ(comps[1].nodes, (std::vector<std::string> { "IN", "SW", "CTRL", "0" }));
    EXPECT_EQ(comps[1].value, "SWMOD");
    EXPECT_DOUBLE_EQ(deck.find("l1")->scalar()->magnitude, 10e-6);
    EXPECT_EQ(deck.find("V1")->scalar()->unit, "V");
    EXPECT_FALSE(deck.find("VCTRL")->scalar());
    EXPECT_EQ(deck.directives("model").size(), 2u);
    EXPECT_EQ(deck.directives("TRAN").front().args, "0 2m 0 10n");
}

TEST(Parse, ContinuationAndEnd)
{
    auto const deck = parse_netlist("* t\nV1 a 0\n+ PULSE(0 1\n+ 0 1n 1n 1u 2u)\nR1 a 0 1k\n.END\nR2 a 0 2k\n");
    ASSERT_EQ(deck.components().size(), 2u);
    EXPECT_EQ(deck.find("V1")->value, "PULSE(0 1 0 1n 1n 1u 2u)");
    EXPECT_FALSE(deck.find("R2")); // after .end
}

TEST(Parse, NoImplicitTitleLine)
{
    auto const deck = parse_netlist("R1 a 0 1k\n");
    EXPECT_EQ(deck.components().size(), 1u);
    EXPECT_FALSE(deck.end_present());
    EXPECT_EQ(serialize_netlist(deck), "R1 a 0 1k\n");
}

TEST(Parse, Errors)
{
    EXPECT_EQ(code_of([] { parse_netlist("\n\n   \n"); }), Errc::EmptyDeck);
    EXPECT_EQ(code_of([] { parse_netlist(".end\n"); }), Errc::EmptyDeck);
    EXPECT_EQ(code_of([] { parse_netlist("R1 a 0 1k\nr1 b 0 2k\n"); }), Errc::DuplicateName);
    EXPECT_EQ(code_of([] { parse_netlist("R1 a\n"); }), Errc::MalformedCard);
    EXPECT_EQ(code_of([] { parse_netlist("+ 1k\n"); }), Errc::MalformedCard);
    EXPECT_EQ(code_of([] { parse_netlist("X1 a SUB\n"); }), Errc::MalformedCard);
    try
    {
        parse_netlist("* deck\nR1 a 0 1k\n\nS1 a b\n");
        FAIL();
    }
    catch (Error const& e)
    {
        EXPECT_EQ(e.line(), 4);
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
    }
}

TEST(Parse, SubcktScopesNames)
{
    auto const deck = parse_netlist(".subckt inner a b\nR1 a b 1k\n.ends\nR1 x 0 2k\nX1 x 0 inner\n.end\n");
    ASSERT_EQ(deck.components().size(), 2u);
    EXPECT_DOUBLE_EQ(deck.find("R1")->scalar()->magnitude, 2e3);
    EXPECT_EQ(deck.find("X1")->subckt(), "inner");
    EXPECT_EQ(code_of([] { parse_netlist(".subckt s a b\nR1 a b 1\nR1 a b 2\n.ends\n"); }), Errc::DuplicateName);
}

TEST(Parse, SubcircuitPinsAndParams)
{
    auto const c = Component::parse("XU1 FB1 IN 0 SW1 IN SW2 IN FB2 0 LTC3419 params: a=1 b=2");
    EXPECT_EQ(c.kind, ComponentKind::Subcircuit);
    EXPECT_EQ(c.nodes.size(), 9u);
    EXPECT_EQ(c.subckt(), "LTC3419");
    EXPECT_EQ(c.value, "LTC3419 params: a=1 b=2");
    auto const d = Component::parse("X2 a b c SUB gain=3");
    EXPECT_EQ(d.nodes, (std::vector<std::string> { "a", "b", "c" }));
    EXPECT_EQ(d.subckt(), "SUB");
}

TEST(Parse, OpaqueCardsPassThrough)
{
    auto const deck = parse_netlist("B1 out 0 V=V(in)*2\nE1 a 0 b 0 10\nR1 a 0 1k\n");
    auto const* b = deck.find("B1");
    ASSERT_TRUE(b);
    EXPECT_EQ(b->kind, ComponentKind::Opaque);
    EXPECT_TRUE(b->nodes.empty());
    EXPECT_EQ(b->to_line(), "B1 out 0 V=V(in)*2");
    EXPECT_EQ(serialize_netlist(deck), "B1 out 0 V=V(in)*2\nE1 a 0 b 0 10\nR1 a 0 1k\n");
}

TEST(Edit, SetValueKeepsOtherTokens)
{
    auto deck = parse_netlist("C1 out 0 100u Rser=10m\nV1 in 0 DC 12\nV2 a 0 PULSE(0 1 0 1n 1n 1u 2u)\n");
    deck = set_component_value(deck, "c1", { 220e-6, "F" });
    EXPECT_EQ(deck.find("C1")->value, "220u Rser=10m");
    deck = set_component_value(deck, "V1", { 24, "V" });
    EXPECT_EQ(deck.find("V1")->value, "DC 24");
    EXPECT_EQ(code_of([&] { set_component_value(deck, "V2", { 1, "V" }); }), Errc::NonScalarComponent);
    EXPECT_EQ(code_of([&] { set_component_value(deck, "R9", { 1, "ohm" }); }), Errc::UnknownComponent);
}

TEST(Edit, RewireAddReplaceRemove)
{
    auto deck = parse_netlist(fixtures::read("circuits/ltc7802_like.cir"));
    deck = remove_component(deck, "V_MODE");
    deck = add_component(deck, Component::parse("R_MODE MODE INTVCC 100k"));
    EXPECT_TRUE(pin_connected_via(deck, "MODE", "INTVCC", ComponentKind::Resistor, 1e5));
    EXPECT_EQ(code_of([&] { add_component(deck, Component::parse("r_mode a b 1")); }), Errc::DuplicateName);

    auto moved = rewire_pin(deck, "XU1", 3, "MODE2");
    EXPECT_EQ(moved.find("XU1")->nodes[3], "MODE2");
    EXPECT_EQ(code_of([&] { rewire_pin(deck, "R1", 2, "x"); }), Errc::PinIndexOutOfRange);

    auto const replaced = replace_component(deck, Component::parse("R1 OUT FB1 1050k"));
    EXPECT_DOUBLE_EQ(replaced.find("R1")->scalar()->magnitude, 1.05e6);
    // Edits are pure: the input deck is untouched.
    EXPECT_DOUBLE_EQ(deck.find("R1")->scalar()->magnitude, 470e3);
}

TEST(Connectivity, DirectAndTransitive)
{
    auto const deck = parse_netlist("R1 a b 1k\nR2 b c 1k\nR3 d e 1k\nC1 a c 1n\n");
    auto r = connectivity_query(deck, "A", "c");
    EXPECT_TRUE(r.connected);
    ASSERT_EQ(r.direct_links.size(), 1u);
    EXPECT_EQ(r.direct_links[0].name, "C1");
    EXPECT_FALSE(connectivity_query(deck, "a", "e").connected);
    EXPECT_EQ(code_of([&] { connectivity_query(deck, "a", "zz"); }), Errc::UnknownNode);
}

TEST(Connectivity, PinConnectedViaMatchesKindAndValue)
{
    auto const base = parse_netlist(fixtures::read("circuits/ltc7802_like.cir"));
    // Mode pin still grounded through the 0 V source.
    EXPECT_FALSE(pin_connected_via(base, "MODE", "INTVCC", ComponentKind::Resistor, 1e5));
    auto const ten_k = add_component(base, Component::parse("R9 MODE INTVCC 10k"));
    EXPECT_FALSE(pin_connected_via(ten_k, "MODE", "INTVCC", ComponentKind::Resistor, 1e5));
    auto const near = add_component(base, Component::parse("R9 INTVCC MODE 100.5k"));
    EXPECT_TRUE(pin_connected_via(near, "MODE", "INTVCC", ComponentKind::Resistor, 1e5));
    auto const far = add_component(base, Component::parse("R9 INTVCC MODE 102k"));
    EXPECT_FALSE(pin_connected_via(far, "MODE", "INTVCC", ComponentKind::Resistor, 1e5));
    auto const cap = add_component(base, Component::parse("C9 INTVCC MODE 100k"));
    EXPECT_FALSE(pin_connected_via(cap, "MODE", "INTVCC", ComponentKind::Resistor, 1e5));
}

TEST(RoundTrip, ShippedFixtures)
{
    for (auto const* name: { "circuits/buck_reference.cir", "circuits/buck_renamed.cir", "circuits/ltc7802_like.cir" })
    {
        auto const deck = parse_netlist(fixtures::read(name));
        auto const text = serialize_netlist(deck);
        EXPECT_EQ(parse_netlist(text), deck) << name;
        EXPECT_EQ(serialize_netlist(parse_netlist(text)), text) << name;
    }
}

TEST(RoundTrip, RandomDecks)
{
    oracle::Rng rng(2024);
    for (int i = 0; i < 300; ++i)
    {
        auto const deck = fixtures::random_deck(rng);
        auto const text = serialize_netlist(deck);
        ASSERT_EQ(parse_netlist(text), deck) << text;
    }
}
