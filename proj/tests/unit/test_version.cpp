#include <doctest.h>

#include "sleepscan/version.hpp"

using sleepscan::SemVer;
using sleepscan::minimum_satisfying;

TEST_CASE("semver parse") {
    CHECK(SemVer::parse("0.8.17+commit.8df45f5f") == SemVer{0, 8, 17});
    CHECK(SemVer::parse("v0.4.26-nightly.2018") == SemVer{0, 4, 26});
    CHECK_FALSE(SemVer::parse("0.8"));
    CHECK_FALSE(SemVer::parse("latest"));
    CHECK(SemVer{0, 8, 21}.str() == "0.8.21");
}

TEST_CASE("pragma minimum") {
    CHECK(minimum_satisfying("^0.4.24") == SemVer{0, 4, 24});
    CHECK(minimum_satisfying(">=0.4.22 <0.6.0") == SemVer{0, 4, 22});
    CHECK(minimum_satisfying("0.5.17") == SemVer{0, 5, 17});
    CHECK(minimum_satisfying("~0.8") == SemVer{0, 8, 0});
    CHECK(minimum_satisfying(">0.8.1") == SemVer{0, 8, 2});
    CHECK(minimum_satisfying("^0.8.0 || ^0.7.6") == SemVer{0, 7, 6});
    CHECK_FALSE(minimum_satisfying("banana"));
}
