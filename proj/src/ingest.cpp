#include "sleepscan/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "sleepscan/error.hpp"

namespace sleepscan {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Spans and AST

std::optional<SrcSpan> SrcSpan::parse(std::string_view text) {
    std::int64_t parts[3] = {0, 0, -1};
    for (int i = 0; i < 3; ++i) {
        const auto colon = text.find(':');
        const std::string_view field = i < 2 ? text.substr(0, colon) : text;
        if (field.empty() || (i < 2 && colon == std::string_view::npos)) return std::nullopt;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size()) return std::nullopt;
        if (i < 2) text.remove_prefix(colon + 1);
    }
    return SrcSpan{parts[0], parts[1], static_cast<int>(parts[2])};
}

const std::string* AstNode::str(std::string_view key) const {
    const auto it = attributes.find(key);
    if (it == attributes.end()) return nullptr;
    return std::get_if<std::string>(&it->second);
}

std::optional<std::int64_t> AstNode::integer(std::string_view key) const {
    const auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    return std::nullopt;
}

std::optional<bool> AstNode::boolean(std::string_view key) const {
    const auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    if (const auto* v = std::get_if<bool>(&it->second)) return *v;
    return std::nullopt;
}

const std::vector<std::int64_t>* AstNode::int_list(std::string_view key) const {
    const auto it = attributes.find(key);
    if (it == attributes.end()) return nullptr;
    return std::get_if<std::vector<std::int64_t>>(&it->second);
}

const AstNode* AstNode::child(std::string_view role_name) const {
    for (const auto& c : children) {
        if (c.role == role_name) return &c;
    }
    return nullptr;
}

std::vector<const AstNode*> AstNode::children_with_role(std::string_view role_name) const {
    std::vector<const AstNode*> out;
    for (const auto& c : children) {
        if (c.role == role_name) out.push_back(&c);
    }
    return out;
}

namespace {

bool is_node(const json& j) { return j.is_object() && j.contains("nodeType"); }

void set_scalar(AstNode& node, const std::string& key, const json& v) {
    if (v.is_string()) {
        node.attributes[key] = v.get<std::string>();
    } else if (v.is_boolean()) {
        node.attributes[key] = v.get<bool>();
    } else if (v.is_number_integer()) {
        node.attributes[key] = v.get<std::int64_t>();
    }
}

AstNode convert_ast(const json& j, std::string role) {
    AstNode node;
    node.kind = j.at("nodeType").get<std::string>();
    node.role = std::move(role);
    if (j.contains("id") && j["id"].is_number_integer()) node.id = j["id"].get<std::int64_t>();
    if (j.contains("src") && j["src"].is_string()) {
        if (auto s = SrcSpan::parse(j["src"].get<std::string>())) node.span = *s;
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "nodeType" || key == "id" || key == "src") continue;
        if (is_node(v)) {
            node.children.push_back(convert_ast(v, key));
        } else if (v.is_array()) {
            std::vector<std::int64_t> ints;
            bool all_ints = !v.empty();
            for (const auto& e : v) {
                if (is_node(e)) {
                    node.children.push_back(convert_ast(e, key));
                    all_ints = false;
                } else if (e.is_number_integer()) {
                    ints.push_back(e.get<std::int64_t>());
                } else {
                    all_ints = false;
                }
            }
            if (all_ints) node.attributes[key] = std::move(ints);
        } else if (v.is_object()) {
            // typeDescriptions and similar plain records are flattened.
            for (const auto& [sub, sv] : v.items()) {
                if (key == "typeDescriptions") {
                    set_scalar(node, sub, sv);
                } else {
                    set_scalar(node, key + "." + sub, sv);
                }
            }
        } else {
            set_scalar(node, key, v);
        }
    }
    return node;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MissingArtifact, p.string() + " is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// CBOR metadata trailer

using CborMap = std::map<std::string, std::vector<std::uint8_t>>;

struct CborReader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    std::optional<std::uint64_t> length(std::uint8_t info) {
        if (info < 24) return info;
        const int n = info == 24 ? 1 : info == 25 ? 2 : info == 26 ? 4 : info == 27 ? 8 : 0;
        if (n == 0 || pos + static_cast<std::size_t>(n) > data.size()) return std::nullopt;
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 8) | data[pos++];
        return v;
    }

    std::optional<std::vector<std::uint8_t>> bytes(std::uint64_t n) {
        if (n > data.size() - pos) return std::nullopt;
        std::vector<std::uint8_t> out(data.begin() + static_cast<std::ptrdiff_t>(pos),
                                      data.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
        return out;
    }
};

std::optional<CborMap> parse_cbor_trailer(std::span<const std::uint8_t> data) {
    static const std::vector<std::string> known = {"ipfs", "bzzr0", "bzzr1", "solc", "experimental"};
    CborReader r{data};
    if (data.empty() || (data[0] >> 5) != 5) return std::nullopt;
    const std::uint8_t head = data[r.pos++];
    const auto count = r.length(head & 0x1f);
    if (!count || *count == 0 || *count > known.size()) return std::nullopt;
    CborMap out;
    for (std::uint64_t i = 0; i < *count; ++i) {
        if (r.pos >= data.size()) return std::nullopt;
        const std::uint8_t kh = data[r.pos++];
        if ((kh >> 5) != 3) return std::nullopt;
        const auto klen = r.length(kh & 0x1f);
        if (!klen) return std::nullopt;
        const auto kbytes = r.bytes(*klen);
        if (!kbytes) return std::nullopt;
        std::string key(kbytes->begin(), kbytes->end());
        if (std::find(known.begin(), known.end(), key) == known.end()) return std::nullopt;

        if (r.pos >= data.size()) return std::nullopt;
        const std::uint8_t vh = data[r.pos++];
        const std::uint8_t major = vh >> 5;
        if (major == 2 || major == 3) {
            const auto vlen = r.length(vh & 0x1f);
            if (!vlen) return std::nullopt;
            auto v = r.bytes(*vlen);
            if (!v) return std::nullopt;
            out[key] = std::move(*v);
        } else if (vh == 0xf4 || vh == 0xf5) {
            out[key] = {static_cast<std::uint8_t>(vh == 0xf5)};
        } else if (major == 0) {
            if (!r.length(vh & 0x1f)) return std::nullopt;
            out[key] = {};
        } else {
            return std::nullopt;
        }
    }
    if (r.pos != data.size()) return std::nullopt;
    return out;
}

std::optional<std::span<const std::uint8_t>> trailer_of(std::span<const std::uint8_t> code) {
    if (code.size() < 2) return std::nullopt;
    const std::size_t len = (static_cast<std::size_t>(code[code.size() - 2]) << 8) | code[code.size() - 1];
    if (len == 0 || len + 2 > code.size()) return std::nullopt;
    return code.subspan(code.size() - 2 - len, len);
}

JumpKind parse_jump(std::string_view f) {
    if (f == "i") return JumpKind::IntoFunction;
    if (f == "o") return JumpKind::ReturnFromFunction;
    if (f == "-") return JumpKind::Regular;
    throw Error(ErrorCode::MalformedItem, "bad jump field '" + std::string(f) + "'");
}

char jump_char(JumpKind k) {
    switch (k) {
        case JumpKind::IntoFunction: return 'i';
        case JumpKind::ReturnFromFunction: return 'o';
        case JumpKind::Regular: return '-';
    }
    return '-';
}

std::int64_t parse_int_field(std::string_view f) {
    std::int64_t v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw Error(ErrorCode::MalformedItem, "non-integer field '" + std::string(f) + "'");
    }
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Source maps

std::vector<SourceMapEntry> decode_source_map(std::string_view encoded) {
    std::vector<SourceMapEntry> out;
    if (encoded.empty()) return out;
    SourceMapEntry cur;
    std::size_t pos = 0;
    while (true) {
        const auto semi = encoded.find(';', pos);
        const std::string_view item = encoded.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos);
        std::size_t fpos = 0;
        for (int field = 0; fpos <= item.size() && !item.empty(); ++field) {
            const auto colon = item.find(':', fpos);
            const std::string_view f = item.substr(fpos, colon == std::string_view::npos ? std::string_view::npos : colon - fpos);
            if (!f.empty()) {
                switch (field) {
                    case 0: cur.start = parse_int_field(f); break;
                    case 1: cur.length = parse_int_field(f); break;
                    case 2: cur.file = static_cast<int>(parse_int_field(f)); break;
                    case 3: cur.jump = parse_jump(f); break;
                    default: parse_int_field(f); break;  // modifier depth, unused
                }
            }
            if (colon == std::string_view::npos) break;
            fpos = colon + 1;
        }
        out.push_back(cur);
        if (semi == std::string_view::npos) break;
        pos = semi + 1;
    }
    return out;
}

std::string encode_source_map(std::span<const SourceMapEntry> entries) {
    std::string out;
    SourceMapEntry prev;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (i > 0) out.push_back(';');
        std::string fields[4];
        if (e.start != prev.start) fields[0] = std::to_string(e.start);
        if (e.length != prev.length) fields[1] = std::to_string(e.length);
        if (e.file != prev.file) fields[2] = std::to_string(e.file);
        if (e.jump != prev.jump) fields[3] = std::string(1, jump_char(e.jump));
        int last = 3;
        while (last >= 0 && fields[last].empty()) --last;
        for (int f = 0; f <= last; ++f) {
            if (f > 0) out.push_back(':');
            out += fields[f];
        }
        prev = e;
    }
    // A lone empty item would decode to zero entries; spell out the first one.
    if (entries.size() == 1 && out.empty()) {
        out = std::to_string(entries[0].start) + ":" + std::to_string(entries[0].length) + ":" +
              std::to_string(entries[0].file) + ":" + jump_char(entries[0].jump);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bytecode

std::vector<std::uint8_t> strip_metadata(std::span<const std::uint8_t> bytecode) {
    const auto trailer = trailer_of(bytecode);
    if (!trailer || !parse_cbor_trailer(*trailer)) return {bytecode.begin(), bytecode.end()};
    return {bytecode.begin(), bytecode.end() - static_cast<std::ptrdiff_t>(trailer->size() + 2)};
}

std::optional<SemVer> trailer_compiler_version(std::span<const std::uint8_t> bytecode) {
    const auto trailer = trailer_of(bytecode);
    if (!trailer) return std::nullopt;
    const auto map = parse_cbor_trailer(*trailer);
    if (!map) return std::nullopt;
    const auto it = map->find("solc");
    if (it == map->end() || it->second.size() != 3) return std::nullopt;
    return SemVer{it->second[0], it->second[1], it->second[2]};
}

std::vector<std::uint8_t> parse_hex_bytes(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.remove_suffix(1);
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    auto digit = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < hex.size();) {
        if (hex[i] == '_' && i + 40 <= hex.size()) {
            // Unlinked library placeholder: 20 bytes.
            out.insert(out.end(), 20, 0);
            i += 40;
            continue;
        }
        if (i + 1 >= hex.size()) throw Error(ErrorCode::MissingArtifact, "odd-length hex bytecode");
        const int hi = digit(hex[i]);
        const int lo = digit(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::MissingArtifact, "non-hex character in bytecode");
        out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
        i += 2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Units

const SourceFile* CompilationUnit::source(int file_id) const {
    for (const auto& s : sources) {
        if (s.id == file_id) return &s;
    }
    return nullptr;
}

std::string_view CompilationUnit::snippet(const SrcSpan& span) const {
    const SourceFile* f = source(span.file);
    if (!f || span.start < 0 || span.length < 0 || static_cast<std::size_t>(span.end()) > f->text.size()) return {};
    return std::string_view(f->text).substr(static_cast<std::size_t>(span.start), static_cast<std::size_t>(span.length));
}

const AstNode* CompilationUnit::contract_node() const {
    const AstNode* found = nullptr;
    for (const auto& su : ast.children) {
        for (const auto& c : su.children) {
            if (c.kind == "ContractDefinition" && c.str("name") && *c.str("name") == contract_name) {
                if (!found) found = &c;
            }
        }
    }
    return found;
}

namespace {

struct Candidate {
    std::string file;
    std::string name;
    std::string bytecode_hex;
    std::string source_map;
    std::string metadata;
};

std::optional<SemVer> version_from_metadata(const std::string& metadata) {
    if (metadata.empty()) return std::nullopt;
    try {
        const json m = json::parse(metadata);
        if (m.contains("compiler") && m["compiler"].contains("version")) {
            return SemVer::parse(m["compiler"]["version"].get<std::string>());
        }
    } catch (const json::exception&) {
    }
    return std::nullopt;
}

std::optional<SemVer> version_from_pragmas(const std::vector<SourceFile>& sources) {
    static const std::regex pragma(R"(pragma\s+solidity\s+([^;]+);)");
    std::optional<SemVer> best;
    for (const auto& s : sources) {
        for (std::sregex_iterator it(s.text.begin(), s.text.end(), pragma), end; it != end; ++it) {
            if (auto v = minimum_satisfying((*it)[1].str())) {
                if (!best || *v > *best) best = v;
            }
        }
    }
    return best;
}

void collect_contracts(const AstNode& root, std::vector<const AstNode*>& out) {
    for (const auto& su : root.children) {
        for (const auto& c : su.children) {
            if (c.kind == "ContractDefinition") out.push_back(&c);
        }
    }
}

const AstNode* find_contract(const std::vector<const AstNode*>& defs, const std::string& name, int file) {
    for (const auto* d : defs) {
        if (d->str("name") && *d->str("name") == name && (file < 0 || d->span.file == file)) return d;
    }
    return nullptr;
}

// Most derived non-library contract with code; ties go to the largest bytecode.
const Candidate& choose_contract(const std::vector<Candidate>& cands, const AstNode& root,
                                 const std::map<std::string, int>& file_ids) {
    std::vector<const AstNode*> defs;
    collect_contracts(root, defs);
    std::vector<std::pair<const Candidate*, const AstNode*>> live;
    for (const auto& c : cands) {
        const auto fid = file_ids.find(c.file);
        const AstNode* def = find_contract(defs, c.name, fid == file_ids.end() ? -1 : fid->second);
        if (def && def->str("contractKind") && *def->str("contractKind") == "library") continue;
        live.emplace_back(&c, def);
    }
    if (live.empty()) return cands.front();
    std::vector<const Candidate*> top;
    for (const auto& [c, def] : live) {
        bool is_base = false;
        for (const auto& [other, odef] : live) {
            if (other == c || !odef || !def) continue;
            if (const auto* bases = odef->int_list("linearizedBaseContracts")) {
                if (std::find(bases->begin(), bases->end(), def->id) != bases->end()) is_base = true;
            }
        }
        if (!is_base) top.push_back(c);
    }
    if (top.empty()) top.push_back(live.front().first);
    return **std::max_element(top.begin(), top.end(), [](const Candidate* a, const Candidate* b) {
        return a->bytecode_hex.size() < b->bytecode_hex.size();
    });
}

struct RawUnit {
    std::string name;
    std::string bytecode_hex;
    std::string source_map;
    std::string metadata;
    AstNode root;
    std::vector<SourceFile> sources;
};

RawUnit load_standard_json(const fs::path& path, const std::optional<std::string>& contract) {
    const json j = read_json(path);
    RawUnit raw;
    raw.root.kind = "Root";
    std::map<std::string, int> file_ids;
    if (j.contains("sources") && j["sources"].is_object()) {
        for (const auto& [file, s] : j["sources"].items()) {
            SourceFile sf;
            sf.path = file;
            sf.id = s.value("id", static_cast<int>(raw.sources.size()));
            file_ids[file] = sf.id;
            if (s.contains("content") && s["content"].is_string()) {
                sf.text = s["content"].get<std::string>();
            } else {
                const fs::path guess = path.parent_path() / file;
                if (fs::exists(guess)) sf.text = read_file(guess);
            }
            const json* ast = nullptr;
            if (s.contains("ast") && is_node(s["ast"])) ast = &s["ast"];
            else if (s.contains("legacyAST") && is_node(s["legacyAST"])) ast = &s["legacyAST"];
            if (ast) raw.root.children.push_back(convert_ast(*ast, "sources"));
            raw.sources.push_back(std::move(sf));
        }
    }
    std::vector<Candidate> cands;
    if (j.contains("contracts") && j["contracts"].is_object()) {
        for (const auto& [file, byname] : j["contracts"].items()) {
            for (const auto& [name, c] : byname.items()) {
                Candidate cand{file, name, "", "", ""};
                if (c.contains("evm") && c["evm"].contains("deployedBytecode")) {
                    const auto& d = c["evm"]["deployedBytecode"];
                    cand.bytecode_hex = d.value("object", "");
                    cand.source_map = d.value("sourceMap", "");
                }
                if (c.contains("metadata") && c["metadata"].is_string()) cand.metadata = c["metadata"].get<std::string>();
                if (contract && name != *contract) continue;
                if (!cand.bytecode_hex.empty()) cands.push_back(std::move(cand));
            }
        }
    }
    if (cands.empty()) {
        throw Error(ErrorCode::MissingArtifact, path.string() + ": no runtime bytecode" +
                                                    (contract ? " for contract " + *contract : std::string()));
    }
    if (raw.root.children.empty()) throw Error(ErrorCode::MissingArtifact, path.string() + ": no AST");
    const Candidate& chosen = choose_contract(cands, raw.root, file_ids);
    raw.name = chosen.name;
    raw.bytecode_hex = chosen.bytecode_hex;
    raw.source_map = chosen.source_map;
    raw.metadata = chosen.metadata;
    return raw;
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    return s.substr(b);
}

RawUnit load_directory(const fs::path& dir, const std::optional<std::string>& contract) {
    RawUnit raw;
    raw.root.kind = "Root";
    std::string name;
    if (contract) {
        name = *contract;
    } else {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".bin-runtime") names.push_back(e.path().stem().string());
        }
        std::sort(names.begin(), names.end());
        if (names.empty()) throw Error(ErrorCode::MissingArtifact, dir.string() + ": no .bin-runtime file");
        name = names.front();
        // Several contracts: take the largest runtime code.
        std::size_t best = 0;
        for (const auto& n : names) {
            const auto sz = fs::file_size(dir / (n + ".bin-runtime"));
            if (sz > best) {
                best = sz;
                name = n;
            }
        }
    }
    const fs::path bin = dir / (name + ".bin-runtime");
    const fs::path map = dir / (name + ".srcmap-runtime");
    const fs::path ast = dir / (name + ".ast.json");
    const fs::path sol = dir / (name + ".sol");
    if (!fs::exists(bin)) throw Error(ErrorCode::MissingArtifact, bin.string() + " not found");
    if (!fs::exists(ast)) throw Error(ErrorCode::MissingArtifact, ast.string() + " not found");
    raw.name = name;
    raw.bytecode_hex = trim(read_file(bin));
    if (fs::exists(map)) raw.source_map = trim(read_file(map));

    const json j = read_json(ast);
    std::vector<const json*> units;
    if (is_node(j)) {
        units.push_back(&j);
    } else if (j.is_array()) {
        for (const auto& e : j) if (is_node(e)) units.push_back(&e);
    } else if (j.contains("sources")) {
        for (const auto& [file, s] : j["sources"].items()) {
            if (s.contains("ast") && is_node(s["ast"])) units.push_back(&s["ast"]);
        }
    }
    if (units.empty()) throw Error(ErrorCode::MissingArtifact, ast.string() + ": no SourceUnit");
    const std::string main_text = fs::exists(sol) ? read_file(sol) : std::string();
    for (const json* u : units) {
        AstNode node = convert_ast(*u, "sources");
        SourceFile sf;
        sf.id = node.span.file >= 0 ? node.span.file : static_cast<int>(raw.sources.size());
        sf.path = node.str("absolutePath") ? *node.str("absolutePath") : sol.filename().string();
        if (units.size() == 1) {
            sf.text = main_text;
        } else if (fs::exists(dir / sf.path)) {
            sf.text = read_file(dir / sf.path);
        } else if (fs::path(sf.path).filename() == sol.filename()) {
            sf.text = main_text;
        }
        raw.sources.push_back(std::move(sf));
        raw.root.children.push_back(std::move(node));
    }
    return raw;
}

}  // namespace

CompilationUnit load_compilation(const fs::path& artifact_path, const std::optional<std::string>& contract) {
    if (!fs::exists(artifact_path)) throw Error(ErrorCode::MissingArtifact, artifact_path.string() + " does not exist");
    RawUnit raw = fs::is_directory(artifact_path) ? load_directory(artifact_path, contract)
                                                  : load_standard_json(artifact_path, contract);

    CompilationUnit unit;
    unit.contract_name = raw.name;
    unit.sources = std::move(raw.sources);
    unit.ast = std::move(raw.root);

    const std::vector<std::uint8_t> full = parse_hex_bytes(raw.bytecode_hex);
    unit.runtime_bytecode = strip_metadata(full);
    if (unit.runtime_bytecode.empty()) {
        throw Error(ErrorCode::MissingArtifact, unit.contract_name + ": runtime bytecode is empty");
    }

    if (auto v = version_from_metadata(raw.metadata)) {
        unit.compiler_version = *v;
        unit.version_origin = "metadata";
    } else if (auto t = trailer_compiler_version(full)) {
        unit.compiler_version = *t;
        unit.version_origin = "cbor";
    } else if (auto p = version_from_pragmas(unit.sources)) {
        unit.compiler_version = *p;
        unit.version_origin = "pragma";
    } else {
        throw Error(ErrorCode::VersionUnparseable, unit.contract_name + ": no compiler version in metadata or pragma");
    }

    unit.instructions = disassemble(unit.runtime_bytecode, unit.compiler_version);
    unit.source_map = decode_source_map(raw.source_map);
    const std::size_t n_map = unit.source_map.size();
    const std::size_t n_ins = unit.instructions.size();
    const auto is_separator = [&](std::size_t i) {
        return unit.instructions[i].opcode == opcodes::INVALID || unit.instructions[i].opcode == opcodes::STOP;
    };
    if (n_map < n_ins && !raw.source_map.empty() && is_separator(n_map)) {
        // The separator before the data tail (INVALID, or STOP before 0.5) has no map items.
        unit.source_map.resize(n_ins, SourceMapEntry{0, 0, -1, JumpKind::Regular});
    } else if (raw.source_map.empty()) {
        unit.source_map.assign(n_ins, SourceMapEntry{0, 0, -1, JumpKind::Regular});
    } else if (n_map != n_ins) {
        throw Error(ErrorCode::MapLengthMismatch, unit.contract_name + ": source map has " + std::to_string(n_map) +
                                                      " entries for " + std::to_string(n_ins) + " instructions");
    }
    // Generated sources (utility Yul) and out-of-range spans count as generated code.
    for (auto& e : unit.source_map) {
        if (e.file < 0) continue;
        const SourceFile* f = unit.source(e.file);
        if (!f || e.start < 0 || e.length < 0 || static_cast<std::size_t>(e.start + e.length) > f->text.size()) e.file = -1;
    }
    return unit;
}

std::string disassembly_listing(const CompilationUnit& unit) {
    std::ostringstream out;
    for (std::size_t i = 0; i < unit.instructions.size(); ++i) {
        const auto& ins = unit.instructions[i];
        out << ins.pc << ": " << ins.mnemonic();
        if (ins.immediate_size > 0) out << ' ' << ins.push_value().to_hex();
        if (i < unit.source_map.size()) {
            std::string snip(unit.snippet(SrcSpan::of(unit.source_map[i])));
            if (const auto nl = snip.find('\n'); nl != std::string::npos) snip = snip.substr(0, nl) + " ...";
            if (snip.size() > 60) snip = snip.substr(0, 57) + "...";
            if (!snip.empty()) out << "  ; " << snip;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace sleepscan
