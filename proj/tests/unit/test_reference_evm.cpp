// Differential check of step() against a small concrete interpreter built on
// boost multiprecision, over random straight-line programs with constant inputs.
#include <doctest.h>

#include <openssl/evp.h>

#include <random>

#include "reference_evm.hpp"

using namespace sleepscan;
using namespace sleepscan::test;

TEST_CASE("step agrees with the reference interpreter on random programs") {
    Generator gen(20240601);
    int compared = 0;
    for (int n = 0; n < 1200; ++n) {
        const Bytes code = gen.program(10 + n % 50);
        Reference ref;
        ref.run(code);
        const auto sym = run_symbolic(code);
        REQUIRE(sym.size() == ref.stack.size());
        for (std::size_t i = 0; i < sym.size(); ++i) {
            const auto c = expr::as_const(sym[i]);
            REQUIRE_MESSAGE(c, "non-constant result in program " << n);
            CHECK_MESSAGE(from_u256(*c) == ref.stack[i], "program " << n << " slot " << i);
        }
        ++compared;
    }
    CHECK(compared >= 1000);
}

TEST_CASE("sponge with sha3 padding matches openssl sha3-256") {
    std::mt19937_64 rng(99);
    for (std::size_t len : {0, 1, 55, 135, 136, 137, 200, 272, 1000}) {
        Bytes data(len);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng());
        unsigned char out[32];
        unsigned int out_len = 0;
        REQUIRE(EVP_Digest(data.data(), data.size(), out, &out_len, EVP_sha3_256(), nullptr) == 1);
        REQUIRE(out_len == 32);
        const Hash256 ours = keccak_sponge_256(data, 0x06);
        CHECK(std::equal(ours.begin(), ours.end(), out));
    }
}
