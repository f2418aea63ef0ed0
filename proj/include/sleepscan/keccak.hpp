#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "sleepscan/u256.hpp"

namespace sleepscan {

using Hash256 = std::array<std::uint8_t, 32>;

/// Keccak-f[1600] sponge with rate 136 bytes. `domain_pad` is the first padding
/// byte: 0x01 gives the original Keccak-256 used by the EVM, 0x06 gives FIPS-202 SHA3-256.
Hash256 keccak_sponge_256(std::span<const std::uint8_t> data, std::uint8_t domain_pad);

inline Hash256 keccak256(std::span<const std::uint8_t> data) { return keccak_sponge_256(data, 0x01); }

Hash256 keccak256(std::string_view text);

inline U256 keccak256_word(std::span<const std::uint8_t> data) {
    const Hash256 h = keccak256(data);
    return U256::from_be_bytes(h);
}

}  // namespace sleepscan
