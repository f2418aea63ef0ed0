#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace sleepscan {

/// Compiler version triple.
struct SemVer {
    int major = 0;
    int minor = 0;
    int patch = 0;

    friend auto operator<=>(const SemVer&, const SemVer&) = default;

    std::string str() const;

    /// Parses "0.8.17", "v0.8.17+commit.8df45f5f", "0.4.26-nightly..." (prefix triple only).
    static std::optional<SemVer> parse(std::string_view text);
};

/// Smallest version satisfying a `pragma solidity` constraint expression such as
/// "^0.4.24", ">=0.4.22 <0.6.0", "0.5.17" or "~0.8.0". Alternatives joined with
/// "||" resolve to the smallest minimum among them.
std::optional<SemVer> minimum_satisfying(std::string_view constraint);

/// First opcode-set change relevant here: PUSH0 is emitted from this version on.
inline constexpr SemVer kPush0Version{0, 8, 20};

}  // namespace sleepscan
