#include <doctest.h>

#include "sleepscan/keccak.hpp"

using namespace sleepscan;

namespace {
std::string hex(const Hash256& h) { return U256::from_be_bytes(h).to_hex(); }
}

TEST_CASE("keccak256 known vectors") {
    CHECK(hex(keccak256(std::string_view(""))) == "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
    CHECK(hex(keccak256(std::string_view("Transfer(address,address,uint256)"))) ==
          "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef");
    CHECK(hex(keccak256(std::string_view("Approval(address,address,uint256)"))) ==
          "0x8c5be1e5ebec7d5bd14f71427d1e84f3dd0314c0f7b2291e5b200ac8c7c3b925");
}

TEST_CASE("sha3 padding gives fips-202 output") {
    const std::string_view abc = "abc";
    const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size());
    CHECK(hex(keccak_sponge_256(bytes, 0x06)) == "0x3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");
}

TEST_CASE("keccak256 across block boundary") {
    // 136 bytes is exactly one rate block; padding spills into a second block.
    std::string s(136, 'a');
    const auto h1 = keccak256(std::string_view(s));
    s.push_back('a');
    const auto h2 = keccak256(std::string_view(s));
    CHECK(h1 != h2);
}
