// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spiceagent
{

enum class Quantity
{
    Time,
    Voltage,
    Current,
    Other,
};

std::string_view quantity_name(Quantity q) noexcept;
/// Maps raw-file type strings ("time", "voltage", "device_current", ...) to a Quantity.
Quantity quantity_from_type(std::string_view type) noexcept;
std::string_view quantity_unit(Quantity q) noexcept;

struct Variable
{
    std::string name;
    Quantity quantity = Quantity::Other;

    bool operator==(Variable const&) const = default;
};

/// Simulator output: named signals over a strictly increasing time axis.
/// Column 0 is always time.
class Dataset
{
  public:
    Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> columns);

    std::vector<Variable> const& variables() const noexcept { return _variables; }
    std::size_t n_points() const noexcept { return _columns.front().size(); }
    std::span<double const> time() const noexcept { return _columns.front(); }
    std::span<double const> column(std::size_t index) const { return _columns.at(index); }

    /// Case-insensitive lookup; returns npos when absent.
    std::size_t find(std::string_view name) const noexcept;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool operator==(Dataset const&) const = default;

  private:
    std::vector<Variable> _variables;
    std::vector<std::vector<double>> _columns;
};

enum class RawEncoding
{
    Binary, ///< time as float64, other columns as float32 (LTspice layout)
    BinaryDouble, ///< every column float64 (ngspice layout)
    Ascii,
};

/// Reads an LTspice/ngspice raw file. The header may be ASCII or UTF-16LE.
Dataset parse_raw(std::span<std::uint8_t const> bytes);
Dataset parse_raw(std::string_view bytes);

std::string write_raw(Dataset const& dataset, RawEncoding encoding = RawEncoding::Binary, std::string_view title = "spiceagent");

} // namespace spiceagent
