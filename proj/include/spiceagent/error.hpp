// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spiceagent
{

enum class Errc
{
    // netlist
    EmptyDeck,
    DuplicateName,
    MalformedCard,
    UnknownComponent,
    NonScalarComponent,
    PinIndexOutOfRange,
    UnknownNode,
    // engine
    EngineNotFound,
    EngineTimeout,
    EngineFailure,
    RawMissing,
    HeaderMalformed,
    PayloadSizeMismatch,
    NonMonotonicTime,
    PatternMismatch,
    StepTooCoarse,
    // measure
    TraceTooShort,
    EmptyWindow,
    NoPeak,
    NeverSettles,
    AmbiguousSteadyState,
    UnknownSignal,
    // agent
    EndpointError,
    MalformedToolArguments,
    // rag
    EmptyDocument,
    EmbeddingEndpointError,
    EmptyIndex,
    // benchmark
    SchemaViolation,
    MissingFixture,
    SimulationFailed,
    // general
    InvalidArgument,
    ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the library. The code is stable and is what callers
/// (tool executor, benchmark, CLI exit-code mapping) dispatch on.
class Error: public std::runtime_error
{
  public:
    Error(Errc code, std::string const& message, int line = 0);

    Errc code() const noexcept { return _code; }
    /// 1-based source line for parse errors, 0 when not applicable.
    int line() const noexcept { return _line; }

  private:
    Errc _code;
    int _line;
};

} // namespace spiceagent
