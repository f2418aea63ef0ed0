#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sleepscan {

enum class ErrorCode {
    MissingArtifact,
    VersionUnparseable,
    MapLengthMismatch,
    MalformedItem,
    NoAst,
    TruncatedPush,
    EntryNotFound,
    BackendUnavailable,
    UnlabeledContract,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Tool-level failure. Per-path conditions (stack underflow, bad jump) are not
/// errors; they end the path and are reported as diagnostics.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sleepscan
