#pragma once

#include <filesystem>
#include <string>

namespace sleepscan::test {

inline std::filesystem::path fixture_root() { return SLEEPSCAN_FIXTURES; }

inline std::filesystem::path artifact(const std::string& name) {
    return fixture_root() / "artifacts" / (name + ".json");
}

}  // namespace sleepscan::test
