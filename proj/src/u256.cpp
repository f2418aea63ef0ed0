#include "sleepscan/u256.hpp"

#include <bit>
#include <functional>

namespace sleepscan {

namespace {

using u128 = unsigned __int128;

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Quotient and remainder by shift-subtract; b must be non-zero.
void divmod(const U256& a, const U256& b, U256& q, U256& r) {
    q = U256();
    r = U256();
    if (a < b) {
        r = a;
        return;
    }
    for (int i = static_cast<int>(a.bit_length()) - 1; i >= 0; --i) {
        r = r << 1;
        if (a.bit(static_cast<unsigned>(i))) r = r | U256(1);
        if (r >= b) {
            r = r - b;
            q = q | (U256(1) << static_cast<unsigned>(i));
        }
    }
}

// Remainder of a 512-bit value (8 little-endian limbs) modulo n (n != 0).
U256 mod512(const std::array<std::uint64_t, 8>& wide, const U256& n) {
    U256 r;
    for (int i = 511; i >= 0; --i) {
        const bool top = r.bit(255);
        r = r << 1;
        if (((wide[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1U) != 0) r = r | U256(1);
        // r may have overflowed 256 bits; in that case r + 2^256 >= n always holds.
        if (top || r >= n) r = r - n;
    }
    return r;
}

}  // namespace

U256 U256::low_mask(unsigned bits) {
    if (bits >= 256) return max();
    if (bits == 0) return U256();
    return (U256(1) << bits) - U256(1);
}

U256 U256::from_be_bytes(std::span<const std::uint8_t> bytes) {
    U256 out;
    const std::size_t n = bytes.size() > 32 ? 32 : bytes.size();
    const std::size_t skip = bytes.size() - n;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bitpos = (n - 1 - i) * 8;
        out.limbs_[bitpos / 64] |= static_cast<std::uint64_t>(bytes[skip + i]) << (bitpos % 64);
    }
    return out;
}

std::optional<U256> U256::from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.empty() || hex.size() > 64) return std::nullopt;
    U256 out;
    for (char c : hex) {
        const int d = hex_digit(c);
        if (d < 0) return std::nullopt;
        out = (out << 4) | U256(static_cast<std::uint64_t>(d));
    }
    return out;
}

std::array<std::uint8_t, 32> U256::to_be_bytes() const {
    std::array<std::uint8_t, 32> out{};
    for (std::size_t i = 0; i < 32; ++i) {
        const std::size_t bitpos = (31 - i) * 8;
        out[i] = static_cast<std::uint8_t>(limbs_[bitpos / 64] >> (bitpos % 64));
    }
    return out;
}

std::string U256::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    if (is_zero()) return "0x0";
    std::string out = "0x";
    bool leading = true;
    for (int i = 63; i >= 0; --i) {
        const unsigned nibble = static_cast<unsigned>(limbs_[static_cast<std::size_t>(i / 16)] >> ((i % 16) * 4)) & 0xFU;
        if (leading && nibble == 0) continue;
        leading = false;
        out.push_back(digits[nibble]);
    }
    return out;
}

unsigned U256::bit_length() const {
    for (int i = 3; i >= 0; --i) {
        if (limbs_[static_cast<std::size_t>(i)] != 0) {
            return static_cast<unsigned>(i * 64 + 64 - std::countl_zero(limbs_[static_cast<std::size_t>(i)]));
        }
    }
    return 0;
}

U256 operator+(const U256& a, const U256& b) {
    U256 out;
    u128 carry = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const u128 s = static_cast<u128>(a.limbs_[i]) + b.limbs_[i] + carry;
        out.limbs_[i] = static_cast<std::uint64_t>(s);
        carry = s >> 64;
    }
    return out;
}

U256 operator-(const U256& a, const U256& b) {
    U256 out;
    std::uint64_t borrow = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::uint64_t ai = a.limbs_[i];
        const std::uint64_t bi = b.limbs_[i];
        const std::uint64_t d = ai - bi - borrow;
        borrow = (ai < bi || (ai == bi && borrow != 0)) ? 1 : 0;
        out.limbs_[i] = d;
    }
    return out;
}

U256 operator*(const U256& a, const U256& b) {
    U256 out;
    for (std::size_t i = 0; i < 4; ++i) {
        u128 carry = 0;
        for (std::size_t j = 0; i + j < 4; ++j) {
            const u128 cur = static_cast<u128>(a.limbs_[i]) * b.limbs_[j] + out.limbs_[i + j] + carry;
            out.limbs_[i + j] = static_cast<std::uint64_t>(cur);
            carry = cur >> 64;
        }
    }
    return out;
}

U256 operator&(const U256& a, const U256& b) {
    return U256(a.limbs_[0] & b.limbs_[0], a.limbs_[1] & b.limbs_[1], a.limbs_[2] & b.limbs_[2], a.limbs_[3] & b.limbs_[3]);
}
U256 operator|(const U256& a, const U256& b) {
    return U256(a.limbs_[0] | b.limbs_[0], a.limbs_[1] | b.limbs_[1], a.limbs_[2] | b.limbs_[2], a.limbs_[3] | b.limbs_[3]);
}
U256 operator^(const U256& a, const U256& b) {
    return U256(a.limbs_[0] ^ b.limbs_[0], a.limbs_[1] ^ b.limbs_[1], a.limbs_[2] ^ b.limbs_[2], a.limbs_[3] ^ b.limbs_[3]);
}

U256 U256::operator<<(unsigned n) const {
    if (n >= 256) return U256();
    U256 out;
    const unsigned limb_shift = n / 64;
    const unsigned bit_shift = n % 64;
    for (unsigned i = 3 + 1; i-- > limb_shift;) {
        std::uint64_t v = limbs_[i - limb_shift] << bit_shift;
        if (bit_shift != 0 && i - limb_shift > 0) v |= limbs_[i - limb_shift - 1] >> (64 - bit_shift);
        out.limbs_[i] = v;
    }
    return out;
}

U256 U256::operator>>(unsigned n) const {
    if (n >= 256) return U256();
    U256 out;
    const unsigned limb_shift = n / 64;
    const unsigned bit_shift = n % 64;
    for (unsigned i = 0; i + limb_shift < 4; ++i) {
        std::uint64_t v = limbs_[i + limb_shift] >> bit_shift;
        if (bit_shift != 0 && i + limb_shift + 1 < 4) v |= limbs_[i + limb_shift + 1] << (64 - bit_shift);
        out.limbs_[i] = v;
    }
    return out;
}

std::size_t U256::hash() const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto l : limbs_) {
        h ^= std::hash<std::uint64_t>{}(l) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

namespace evm_arith {

U256 negate(const U256& a) { return U256() - a; }

bool slt(const U256& a, const U256& b) {
    const bool an = a.negative();
    const bool bn = b.negative();
    if (an != bn) return an;
    return a < b;
}

U256 div(const U256& a, const U256& b) {
    if (b.is_zero()) return U256();
    U256 q, r;
    divmod(a, b, q, r);
    return q;
}

U256 mod(const U256& a, const U256& b) {
    if (b.is_zero()) return U256();
    U256 q, r;
    divmod(a, b, q, r);
    return r;
}

U256 sdiv(const U256& a, const U256& b) {
    if (b.is_zero()) return U256();
    const bool an = a.negative();
    const bool bn = b.negative();
    const U256 q = div(an ? negate(a) : a, bn ? negate(b) : b);
    return an != bn ? negate(q) : q;
}

U256 smod(const U256& a, const U256& b) {
    if (b.is_zero()) return U256();
    const bool an = a.negative();
    const U256 r = mod(an ? negate(a) : a, b.negative() ? negate(b) : b);
    return an ? negate(r) : r;
}

U256 addmod(const U256& a, const U256& b, const U256& n) {
    if (n.is_zero()) return U256();
    std::array<std::uint64_t, 8> wide{};
    u128 carry = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const u128 s = static_cast<u128>(a.limb(static_cast<int>(i))) + b.limb(static_cast<int>(i)) + carry;
        wide[i] = static_cast<std::uint64_t>(s);
        carry = s >> 64;
    }
    wide[4] = static_cast<std::uint64_t>(carry);
    return mod512(wide, n);
}

U256 mulmod(const U256& a, const U256& b, const U256& n) {
    if (n.is_zero()) return U256();
    std::array<std::uint64_t, 8> wide{};
    for (std::size_t i = 0; i < 4; ++i) {
        u128 carry = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            const u128 cur = static_cast<u128>(a.limb(static_cast<int>(i))) * b.limb(static_cast<int>(j)) + wide[i + j] + carry;
            wide[i + j] = static_cast<std::uint64_t>(cur);
            carry = cur >> 64;
        }
        wide[i + 4] = static_cast<std::uint64_t>(carry);
    }
    return mod512(wide, n);
}

U256 exp(const U256& base, const U256& exponent) {
    U256 result(1);
    U256 b = base;
    const unsigned bits = exponent.bit_length();
    for (unsigned i = 0; i < bits; ++i) {
        if (exponent.bit(i)) result = result * b;
        b = b * b;
    }
    return result;
}

U256 signextend(const U256& byte_index, const U256& value) {
    if (!byte_index.fits_u64() || byte_index.low64() >= 31) return value;
    const unsigned sign_bit = static_cast<unsigned>(byte_index.low64()) * 8 + 7;
    const U256 mask = U256::low_mask(sign_bit + 1);
    return value.bit(sign_bit) ? (value | ~mask) : (value & mask);
}

U256 byte(const U256& index, const U256& value) {
    if (!index.fits_u64() || index.low64() >= 32) return U256();
    const unsigned shift = (31 - static_cast<unsigned>(index.low64())) * 8;
    return (value >> shift) & U256(0xFF);
}

U256 shl(const U256& shift, const U256& value) {
    if (!shift.fits_u64() || shift.low64() >= 256) return U256();
    return value << static_cast<unsigned>(shift.low64());
}

U256 shr(const U256& shift, const U256& value) {
    if (!shift.fits_u64() || shift.low64() >= 256) return U256();
    return value >> static_cast<unsigned>(shift.low64());
}

U256 sar(const U256& shift, const U256& value) {
    const bool neg = value.negative();
    if (!shift.fits_u64() || shift.low64() >= 256) return neg ? U256::max() : U256();
    const unsigned n = static_cast<unsigned>(shift.low64());
    U256 out = value >> n;
    if (neg && n > 0) out = out | ~(U256::max() >> n);
    return out;
}

}  // namespace evm_arith

}  // namespace sleepscan
