#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolnet {

enum class ErrorCode {
    DuplicateToolId,
    ReservedToolId,
    EmptyToolSet,
    UnknownNode,
    EndHasNoSuccessors,
    InvalidParams,
    InvalidGraph,
    EmptyCorpus,
    UnknownToolInCorpus,
    NonPositiveAlpha,
    UnknownToolInReport,
    ScoreOutOfRange,
    DuplicateReportEntry,
    NoActiveTools,
    PolicyChoseUnavailableTool,
    InvalidSpec,
    SpecMismatch,
    ParseError,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateToolId: return "DuplicateToolId";
        case ErrorCode::ReservedToolId: return "ReservedToolId";
        case ErrorCode::EmptyToolSet: return "EmptyToolSet";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::EndHasNoSuccessors: return "EndHasNoSuccessors";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::InvalidGraph: return "InvalidGraph";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::UnknownToolInCorpus: return "UnknownToolInCorpus";
        case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
        case ErrorCode::UnknownToolInReport: return "UnknownToolInReport";
        case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
        case ErrorCode::DuplicateReportEntry: return "DuplicateReportEntry";
        case ErrorCode::NoActiveTools: return "NoActiveTools";
        case ErrorCode::PolicyChoseUnavailableTool: return "PolicyChoseUnavailableTool";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::SpecMismatch: return "SpecMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

// Every failure raised by the library. Io is the only code that maps to an
// environment problem; everything else is a validation failure of the input.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    bool is_io() const noexcept { return code_ == ErrorCode::Io; }

private:
    ErrorCode code_;
};

}  // namespace toolnet
