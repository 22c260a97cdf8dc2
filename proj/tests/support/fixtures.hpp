// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spiceagent/dataset.hpp>
#include <spiceagent/netlist.hpp>

#include "oracles.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#ifndef SPICEAGENT_DATA_DIR
#error "SPICEAGENT_DATA_DIR must be defined by the build"
#endif

namespace fixtures
{

inline std::filesystem::path data_dir() { return SPICEAGENT_DATA_DIR; }

inline std::string read(std::filesystem::path const& relative)
{
    std::ifstream in(data_dir() / relative, std::ios::binary);
    if (!in)
        throw std::runtime_error("missing fixture " + relative.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Scratch directory removed on destruction.
struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        auto pattern = (std::filesystem::temp_directory_path() / "spiceagent-test-XXXXXX").string();
        if (!::mkdtemp(pattern.data()))
            throw std::runtime_error("mkdtemp failed");
        path = pattern;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(TempDir const&) = delete;
    TempDir& operator=(TempDir const&) = delete;
};

inline std::string random_value(oracle::Rng& rng) { return spiceagent::format_quantity(rng.log_uniform(1e-12, 1e7)); }

/// Random but well-formed deck: every kind of card, subcircuit blocks, opaque cards.
inline spiceagent::Netlist random_deck(oracle::Rng& rng)
{
    using namespace spiceagent;
    std::vector<Card> cards;
    std::set<std::string> names;
    auto unique_name = [&](char letter, std::set<std::string>& used) {
        for (;;)
        {
            auto name = std::string(1, letter) + rng.identifier();
            if (used.insert(to_lower(name)).second)
                return name;
        }
    };
    auto node = [&]() { return rng.index(5) == 0 ? std::string("0") : rng.identifier(4); };
    auto component = [&](std::set<std::string>& used) -> Component {
        static constexpr char letters[] = "RLCVIDSXMQBEG";
        auto const letter = letters[rng.index(sizeof(letters) - 1)];
        auto const name = unique_name(letter, used);
        std::string line = name;
        auto add_nodes = [&](std::size_t n) {
            for (std::size_t i = 0; i < n; ++i)
                line += " " + node();
        };
        switch (letter)
        {
            case 'R':
            case 'L':
            case 'C':
                add_nodes(2);
                line += " " + random_value(rng);
                if (rng.coin())
                    line += " Rser=" + random_value(rng);
                break;
            case 'V':
            case 'I':
                add_nodes(2);
                switch (rng.index(3))
                {
                    case 0: line += " DC " + random_value(rng); break;
                    case 1: line += " " + random_value(rng); break;
                    default: line += " PULSE(0 " + random_value(rng) + " 0 1n 1n " + random_value(rng) + " " + random_value(rng) + ")";
                }
                break;
            case 'D': add_nodes(2), line += " DMOD"; break;
            case 'S': add_nodes(4), line += " SWMOD"; break;
            case 'M': add_nodes(4), line += " NMOS W=" + random_value(rng); break;
            case 'Q': add_nodes(3), line += " NPN"; break;
            case 'X':
                add_nodes(2 + rng.index(6));
                line += " " + rng.identifier();
                if (rng.coin())
                    line += " params: k=" + random_value(rng);
                break;
            default:
                add_nodes(2);
                line += " V=" + rng.identifier() + "*" + random_value(rng);
        }
        return Component::parse(line);
    };

    if (rng.coin())
        cards.emplace_back(Comment { " " + rng.word() + " " + rng.word() });
    auto const n = 1 + rng.index(25);
    for (std::size_t i = 0; i < n; ++i)
    {
        switch (rng.index(10))
        {
            case 0: cards.emplace_back(Comment { rng.word() + " " + random_value(rng) }); break;
            case 1: cards.emplace_back(Directive { "model", rng.identifier() + " D(Is=" + random_value(rng) + ")" }); break;
            case 2: cards.emplace_back(Directive { "tran", random_value(rng) + " " + random_value(rng) }); break;
            case 3:
            {
                std::set<std::string> inner;
                auto const sub = rng.identifier();
                cards.emplace_back(Directive { "subckt", sub + " " + rng.identifier(3) + " " + rng.identifier(3) });
                for (std::size_t k = 0, m = 1 + rng.index(4); k < m; ++k)
                    cards.emplace_back(component(inner));
                cards.emplace_back(Directive { "ends", sub });
                break;
            }
            default: cards.emplace_back(component(names));
        }
    }
    return Netlist(std::move(cards), rng.coin());
}

inline spiceagent::Dataset random_dataset(oracle::Rng& rng)
{
    using namespace spiceagent;
    auto const n_vars = 1 + rng.index(6);
    auto const n_points = 2 + rng.index(300);
    std::vector<Variable> vars { { "time", Quantity::Time } };
    std::vector<std::vector<double>> columns(1 + n_vars);
    double t = rng.uniform(0.0, 1e-3);
    for (std::size_t i = 0; i < n_points; ++i)
    {
        columns[0].push_back(t);
        t += rng.log_uniform(1e-12, 1e-4);
    }
    for (std::size_t v = 1; v <= n_vars; ++v)
    {
        auto const current = rng.coin();
        vars.push_back({ (current ? "I(" : "V(") + rng.identifier() + std::to_string(v) + ")", current ? Quantity::Current : Quantity::Voltage });
        auto const scale = rng.log_uniform(1e-6, 1e3);
        for (std::size_t i = 0; i < n_points; ++i)
            columns[v].push_back(rng.uniform(-scale, scale));
    }
    return Dataset(std::move(vars), std::move(columns));
}

} // namespace fixtures
