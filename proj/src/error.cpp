// SPDX-License-Identifier: Apache-2.0
#include <spiceagent/error.hpp>

#include <fmt/format.h>

namespace spiceagent
{

std::string_view errc_name(Errc code) noexcept
{
    switch (code)
    {
        case Errc::EmptyDeck: return "EmptyDeck";
        case Errc::DuplicateName: return "DuplicateName";
        case Errc::MalformedCard: return "MalformedCard";
        case Errc::UnknownComponent: return "UnknownComponent";
        case Errc::NonScalarComponent: return "NonScalarComponent";
        case Errc::PinIndexOutOfRange: return "PinIndexOutOfRange";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::EngineNotFound: return "EngineNotFound";
        case Errc::EngineTimeout: return "EngineTimeout";
        case Errc::EngineFailure: return "EngineFailure";
        case Errc::RawMissing: return "RawMissing";
        case Errc::HeaderMalformed: return "HeaderMalformed";
        case Errc::PayloadSizeMismatch: return "PayloadSizeMismatch";
        case Errc::NonMonotonicTime: return "NonMonotonicTime";
        case Errc::PatternMismatch: return "PatternMismatch";
        case Errc::StepTooCoarse: return "StepTooCoarse";
        case Errc::TraceTooShort: return "TraceTooShort";
        case Errc::EmptyWindow: return "EmptyWindow";
        case Errc::NoPeak: return "NoPeak";
        case Errc::NeverSettles: return "NeverSettles";
        case Errc::AmbiguousSteadyState: return "AmbiguousSteadyState";
        case Errc::UnknownSignal: return "UnknownSignal";
        case Errc::EndpointError: return "EndpointError";
        case Errc::MalformedToolArguments: return "MalformedToolArguments";
        case Errc::EmptyDocument: return "EmptyDocument";
        case Errc::EmbeddingEndpointError: return "EmbeddingEndpointError";
        case Errc::EmptyIndex: return "EmptyIndex";
        case Errc::SchemaViolation: return "SchemaViolation";
        case Errc::MissingFixture: return "MissingFixture";
        case Errc::SimulationFailed: return "SimulationFailed";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

namespace
{
    std::string compose(Errc code, std::string const& message, int line)
    {
        if (line > 0)
            return fmt::format("{} (line {}): {}", errc_name(code), line, message);
        return fmt::format("{}: {}", errc_name(code), message);
    }
} // namespace

Error::Error(Errc code, std::string const& message, int line):
    std::runtime_error(compose(code, message, line)), _code(code), _line(line)
{
}

} // namespace spiceagent
