#include "sleepscan/version.hpp"

#include <cctype>
#include <sstream>
#include <vector>

#include "sleepscan/error.hpp"

namespace sleepscan {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingArtifact: return "MissingArtifact";
        case ErrorCode::VersionUnparseable: return "VersionUnparseable";
        case ErrorCode::MapLengthMismatch: return "MapLengthMismatch";
        case ErrorCode::MalformedItem: return "MalformedItem";
        case ErrorCode::NoAst: return "NoAst";
        case ErrorCode::TruncatedPush: return "TruncatedPush";
        case ErrorCode::EntryNotFound: return "EntryNotFound";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::UnlabeledContract: return "UnlabeledContract";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string SemVer::str() const {
    return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
}

namespace {

// Reads up to three dot-separated numbers; missing or wildcard parts become 0.
std::optional<SemVer> parse_partial(std::string_view text, std::size_t& consumed) {
    std::size_t i = 0;
    while (i < text.size() && (text[i] == 'v' || text[i] == 'V')) ++i;
    int parts[3] = {0, 0, 0};
    int count = 0;
    while (count < 3) {
        if (i < text.size() && (text[i] == 'x' || text[i] == 'X' || text[i] == '*')) {
            ++i;
        } else {
            if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) break;
            int value = 0;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                value = value * 10 + (text[i] - '0');
                if (value > 100000) return std::nullopt;
                ++i;
            }
            parts[count] = value;
        }
        ++count;
        if (count < 3 && i < text.size() && text[i] == '.') {
            ++i;
        } else {
            break;
        }
    }
    if (count == 0) return std::nullopt;
    consumed = i;
    return SemVer{parts[0], parts[1], parts[2]};
}

}  // namespace

std::optional<SemVer> SemVer::parse(std::string_view text) {
    std::size_t used = 0;
    auto v = parse_partial(text, used);
    if (!v) return std::nullopt;
    // Require a full triple for artifact metadata.
    std::size_t dots = 0;
    for (std::size_t i = 0; i < used; ++i) dots += text[i] == '.' ? 1 : 0;
    if (dots < 2) return std::nullopt;
    return v;
}

std::optional<SemVer> minimum_satisfying(std::string_view constraint) {
    std::optional<SemVer> best;
    std::size_t start = 0;
    while (start <= constraint.size()) {
        std::size_t bar = constraint.find("||", start);
        const std::string_view alt = constraint.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);

        std::optional<SemVer> lower;
        std::optional<SemVer> upper;  // exclusive
        bool any = false;
        bool valid = true;
        std::size_t i = 0;
        while (i < alt.size()) {
            while (i < alt.size() && std::isspace(static_cast<unsigned char>(alt[i]))) ++i;
            if (i >= alt.size()) break;
            std::string op;
            while (i < alt.size() && (alt[i] == '^' || alt[i] == '~' || alt[i] == '>' || alt[i] == '<' || alt[i] == '=')) op.push_back(alt[i++]);
            while (i < alt.size() && std::isspace(static_cast<unsigned char>(alt[i]))) ++i;
            std::size_t used = 0;
            auto v = parse_partial(alt.substr(i), used);
            if (!v) {
                valid = false;
                break;
            }
            i += used;
            any = true;
            SemVer candidate = *v;
            if (op == ">") {
                candidate.patch += 1;
            } else if (op == "<" || op == "<=") {
                SemVer bound = *v;
                if (op == "<=") bound.patch += 1;
                if (!upper || bound < *upper) upper = bound;
                continue;
            }
            if (!lower || candidate > *lower) lower = candidate;
        }
        if (valid && any) {
            const SemVer min = lower.value_or(SemVer{0, 0, 0});
            if (!upper || min < *upper) {
                if (!best || min < *best) best = min;
            }
        }
        if (bar == std::string_view::npos) break;
        start = bar + 2;
    }
    return best;
}

}  // namespace sleepscan
