#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace sleepscan {

/// 256-bit EVM word. Little-endian 64-bit limbs; all arithmetic wraps mod 2^256.
class U256 {
public:
    constexpr U256() = default;
    constexpr U256(std::uint64_t v) : limbs_{v, 0, 0, 0} {}  // NOLINT(google-explicit-constructor)
    constexpr U256(std::uint64_t l0, std::uint64_t l1, std::uint64_t l2, std::uint64_t l3)
        : limbs_{l0, l1, l2, l3} {}

    static U256 max() { return U256(~0ULL, ~0ULL, ~0ULL, ~0ULL); }
    /// 2^bits - 1 (bits in [0, 256]).
    static U256 low_mask(unsigned bits);

    /// Big-endian bytes, at most 32 (shorter inputs are left-padded with zeros).
    static U256 from_be_bytes(std::span<const std::uint8_t> bytes);
    /// Hex text with optional 0x prefix; nullopt on bad digits or more than 64 digits.
    static std::optional<U256> from_hex(std::string_view hex);

    std::array<std::uint8_t, 32> to_be_bytes() const;
    /// Minimal hex with 0x prefix ("0x0" for zero).
    std::string to_hex() const;

    std::uint64_t limb(int i) const { return limbs_[static_cast<std::size_t>(i)]; }
    bool is_zero() const { return (limbs_[0] | limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    bool fits_u64() const { return (limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    std::uint64_t low64() const { return limbs_[0]; }
    /// Index of highest set bit plus one; 0 for zero.
    unsigned bit_length() const;
    bool bit(unsigned i) const { return ((limbs_[i / 64] >> (i % 64)) & 1U) != 0; }
    bool negative() const { return bit(255); }

    friend bool operator==(const U256&, const U256&) = default;
    friend std::strong_ordering operator<=>(const U256& a, const U256& b) {
        for (int i = 3; i >= 0; --i) {
            if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] <=> b.limbs_[i];
        }
        return std::strong_ordering::equal;
    }

    friend U256 operator+(const U256& a, const U256& b);
    friend U256 operator-(const U256& a, const U256& b);
    friend U256 operator*(const U256& a, const U256& b);
    friend U256 operator&(const U256& a, const U256& b);
    friend U256 operator|(const U256& a, const U256& b);
    friend U256 operator^(const U256& a, const U256& b);
    U256 operator~() const { return U256(~limbs_[0], ~limbs_[1], ~limbs_[2], ~limbs_[3]); }
    U256 operator<<(unsigned n) const;
    U256 operator>>(unsigned n) const;

    std::size_t hash() const;

private:
    std::array<std::uint64_t, 4> limbs_{};
};

/// EVM arithmetic semantics (division by zero yields zero, signed ops use two's complement).
namespace evm_arith {
U256 div(const U256& a, const U256& b);
U256 mod(const U256& a, const U256& b);
U256 sdiv(const U256& a, const U256& b);
U256 smod(const U256& a, const U256& b);
U256 addmod(const U256& a, const U256& b, const U256& n);
U256 mulmod(const U256& a, const U256& b, const U256& n);
U256 exp(const U256& base, const U256& exponent);
U256 signextend(const U256& byte_index, const U256& value);
U256 byte(const U256& index, const U256& value);
U256 shl(const U256& shift, const U256& value);
U256 shr(const U256& shift, const U256& value);
U256 sar(const U256& shift, const U256& value);
bool slt(const U256& a, const U256& b);
U256 negate(const U256& a);
}  // namespace evm_arith

}  // namespace sleepscan
