#include "sleepscan/ast_analysis.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "sleepscan/error.hpp"

namespace sleepscan {

std::string_view to_string(Visibility v) {
    switch (v) {
        case Visibility::External: return "external";
        case Visibility::Public: return "public";
        case Visibility::Internal: return "internal";
        case Visibility::Private: return "private";
    }
    return "?";
}

std::string FunctionInfo::signature() const {
    std::string s = name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) s += ",";
        s += params[i].second;
    }
    return s + ")";
}

std::uint32_t compute_selector(std::string_view signature, const HashOracle& oracle) {
    const Hash256 h = oracle(signature);
    return (static_cast<std::uint32_t>(h[0]) << 24) | (static_cast<std::uint32_t>(h[1]) << 16) |
           (static_cast<std::uint32_t>(h[2]) << 8) | h[3];
}

std::uint32_t compute_selector(std::string_view signature) {
    return compute_selector(signature, [](std::string_view s) { return keccak256(s); });
}

std::optional<std::string> canonical_abi_type(std::string_view t) {
    for (std::string_view suffix : {" storage pointer", " storage ref", " memory", " calldata", " storage"}) {
        if (t.ends_with(suffix)) {
            t.remove_suffix(suffix.size());
            break;
        }
    }
    std::string_view base = t;
    std::string_view dims;
    if (const auto br = t.find('['); br != std::string_view::npos && !t.starts_with("mapping")) {
        base = t.substr(0, br);
        dims = t.substr(br);
    }
    std::string out;
    if (base == "address payable" || base.starts_with("contract ") || base.starts_with("interface ")) {
        out = "address";
    } else if (base.starts_with("enum ")) {
        out = "uint8";
    } else if (base.starts_with("struct ") || base.starts_with("mapping") || base.starts_with("function") ||
               base.find(' ') != std::string_view::npos || base.empty()) {
        return std::nullopt;
    } else if (base == "uint") {
        out = "uint256";
    } else if (base == "int") {
        out = "int256";
    } else if (base == "byte") {
        out = "bytes1";
    } else {
        out = std::string(base);
    }
    return out + std::string(dims);
}

namespace {

struct Index {
    std::unordered_map<std::int64_t, const AstNode*> by_id;
    std::vector<const AstNode*> contracts;
    std::vector<std::int64_t> linearization;  // analyzed contract first

    explicit Index(const CompilationUnit& unit) {
        unit.ast.walk([&](const AstNode& n) {
            if (n.id >= 0) by_id.emplace(n.id, &n);
            if (n.kind == "ContractDefinition") contracts.push_back(&n);
        });
        if (const AstNode* c = unit.contract_node()) {
            if (const auto* lin = c->int_list("linearizedBaseContracts")) {
                linearization = *lin;
            } else {
                linearization = {c->id};
            }
        }
    }

    const AstNode* get(std::int64_t id) const {
        const auto it = by_id.find(id);
        return it == by_id.end() ? nullptr : it->second;
    }

    std::vector<const AstNode*> linearized_contracts() const {
        std::vector<const AstNode*> out;
        for (auto id : linearization) {
            if (const AstNode* c = get(id)) out.push_back(c);
        }
        return out;
    }
};

std::string name_of(const AstNode& n) {
    const std::string* s = n.str("name");
    return s ? *s : std::string();
}

std::string contract_name_of(const Index& idx, const AstNode& fn) {
    if (auto scope = fn.integer("scope")) {
        if (const AstNode* c = idx.get(*scope)) return name_of(*c);
    }
    return {};
}

std::vector<const AstNode*> param_decls(const AstNode& fn) {
    const AstNode* list = fn.child("parameters");
    if (!list) return {};
    return list->children_with_role("parameters");
}

bool is_constructor_like(const AstNode& fn) {
    if (const std::string* kind = fn.str("kind")) return *kind != "function";
    if (fn.boolean("isConstructor").value_or(false)) return true;
    return name_of(fn).empty();
}

Visibility visibility_of(const AstNode& fn) {
    const std::string* v = fn.str("visibility");
    if (!v) return Visibility::Public;
    if (*v == "external") return Visibility::External;
    if (*v == "internal") return Visibility::Internal;
    if (*v == "private") return Visibility::Private;
    return Visibility::Public;
}

std::optional<FunctionInfo> make_info(const Index& idx, const AstNode& fn) {
    FunctionInfo info;
    info.name = name_of(fn);
    info.src_span = fn.span;
    info.visibility = visibility_of(fn);
    info.contract = contract_name_of(idx, fn);
    info.ast_id = fn.id;
    bool canonical = true;
    for (const AstNode* p : param_decls(fn)) {
        const std::string* ts = p->str("typeString");
        auto abi = ts ? canonical_abi_type(*ts) : std::nullopt;
        if (!abi) canonical = false;
        info.params.emplace_back(name_of(*p), abi.value_or(ts ? *ts : std::string("?")));
    }
    if (info.visibility == Visibility::External || info.visibility == Visibility::Public) {
        if (const std::string* sel = fn.str("functionSelector")) {
            info.selector = static_cast<std::uint32_t>(std::stoul(*sel, nullptr, 16));
        } else if (canonical) {
            info.selector = compute_selector(info.signature());
        } else {
            return std::nullopt;
        }
    }
    return info;
}

bool is_transfer_event(const AstNode& ev) {
    if (name_of(ev) != "Transfer") return false;
    const AstNode* list = ev.child("parameters");
    return list && list->children_with_role("parameters").size() == 3;
}

/// Callee expression of a FunctionCall: Identifier, MemberAccess or similar.
const AstNode* callee_of(const AstNode& call) { return call.child("expression"); }

class EmitAnalysis {
public:
    EmitAnalysis(const Index& idx) : idx_(idx) {
        // Functions and modifiers visible in the analyzed contract, for override expansion.
        for (const AstNode* c : idx.linearized_contracts()) {
            for (const auto& m : c->children) {
                if (m.kind == "FunctionDefinition" || m.kind == "ModifierDefinition") visible_.push_back(&m);
            }
        }
        std::vector<const AstNode*> all;
        for (const AstNode* c : idx.contracts) {
            for (const auto& m : c->children) {
                if (m.kind == "FunctionDefinition" || m.kind == "ModifierDefinition") all.push_back(&m);
            }
        }
        for (const AstNode* f : all) {
            bool direct = false;
            std::set<std::int64_t> callees;
            f->walk([&](const AstNode& n) {
                if (n.kind == "FunctionCall") {
                    if (const AstNode* callee = callee_of(n)) {
                        const auto ref = callee->integer("referencedDeclaration");
                        const AstNode* target = ref ? idx_.get(*ref) : nullptr;
                        if (target && target->kind == "EventDefinition") {
                            direct = direct || is_transfer_event(*target);
                        } else if (!target && name_of(*callee) == "Transfer" && n.children_with_role("arguments").size() == 3) {
                            direct = true;
                        }
                    }
                }
                if (n.kind == "Identifier" || n.kind == "MemberAccess" || n.kind == "IdentifierPath") {
                    if (auto ref = n.integer("referencedDeclaration")) {
                        const AstNode* target = idx_.get(*ref);
                        if (target && (target->kind == "FunctionDefinition" || target->kind == "ModifierDefinition")) {
                            for (const AstNode* impl : overrides_of(*target)) callees.insert(impl->id);
                        }
                    }
                }
            });
            direct_[f->id] = direct;
            callees_[f->id] = std::move(callees);
        }
        // Fixpoint over the call graph.
        emits_ = direct_;
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto& [id, e] : emits_) {
                if (e) continue;
                for (auto c : callees_[id]) {
                    const auto it = emits_.find(c);
                    if (it != emits_.end() && it->second) {
                        e = true;
                        changed = true;
                        break;
                    }
                }
            }
        }
    }

    bool emits(std::int64_t id) const {
        const auto it = emits_.find(id);
        return it != emits_.end() && it->second;
    }

private:
    // The referenced definition plus every same-named definition with the same
    // arity in the analyzed contract's hierarchy (virtual dispatch, super calls).
    std::vector<const AstNode*> overrides_of(const AstNode& target) const {
        std::vector<const AstNode*> out{&target};
        const std::string name = name_of(target);
        const std::size_t arity = param_decls(target).size();
        for (const AstNode* f : visible_) {
            if (f != &target && f->kind == target.kind && name_of(*f) == name && param_decls(*f).size() == arity) out.push_back(f);
        }
        return out;
    }

    const Index& idx_;
    std::vector<const AstNode*> visible_;
    std::unordered_map<std::int64_t, bool> direct_;
    std::unordered_map<std::int64_t, bool> emits_;
    std::unordered_map<std::int64_t, std::set<std::int64_t>> callees_;
};

std::vector<FunctionInfo> callable_impl(const CompilationUnit& unit, const Index& idx, const EmitAnalysis* emits) {
    std::vector<FunctionInfo> out;
    std::set<std::uint32_t> seen;
    for (const AstNode* c : idx.linearized_contracts()) {
        for (const auto& m : c->children) {
            if (m.kind != "FunctionDefinition" || is_constructor_like(m) || !m.child("body")) continue;
            const Visibility vis = visibility_of(m);
            if (vis != Visibility::External && vis != Visibility::Public) continue;
            auto info = make_info(idx, m);
            if (!info || !info->selector || !seen.insert(*info->selector).second) continue;
            if (emits) info->emits_transfer = emits->emits(m.id);
            out.push_back(std::move(*info));
        }
    }
    std::sort(out.begin(), out.end(), [](const FunctionInfo& a, const FunctionInfo& b) { return a.src_span < b.src_span; });
    (void)unit;
    return out;
}

}  // namespace

std::vector<FunctionInfo> callable_functions(const CompilationUnit& unit) {
    const Index idx(unit);
    const EmitAnalysis emits(idx);
    return callable_impl(unit, idx, &emits);
}

std::vector<FunctionInfo> select_target_functions(const CompilationUnit& unit) {
    if (unit.ast.children.empty()) throw Error(ErrorCode::NoAst, unit.contract_name + ": compilation unit has no AST");
    auto all = callable_functions(unit);
    std::vector<FunctionInfo> out;
    for (auto& f : all) {
        if (f.emits_transfer) out.push_back(std::move(f));
    }
    return out;
}

std::optional<ReturnBinding> find_owner_return_binding(const CompilationUnit& unit) {
    const Index idx(unit);
    std::vector<const AstNode*> order = idx.linearized_contracts();
    for (const AstNode* c : idx.contracts) {
        if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
    }
    ReturnBinding binding;
    for (const AstNode* c : order) {
        for (const auto& m : c->children) {
            if (m.kind != "FunctionDefinition" || name_of(m) != "ownerOf") continue;
            const AstNode* body = m.child("body");
            if (!body) continue;
            std::vector<const AstNode*> returns;
            body->walk([&](const AstNode& n) {
                if (n.kind == "Return") returns.push_back(&n);
            });
            std::sort(returns.begin(), returns.end(), [](const AstNode* a, const AstNode* b) { return a->span < b->span; });
            for (const AstNode* r : returns) {
                ReturnSite site;
                site.statement = r->span;
                site.contract = name_of(*c);
                if (const AstNode* e = r->child("expression")) {
                    site.expression = e->span;
                    site.identifier = e->kind == "Identifier" ? name_of(*e) : std::string(unit.snippet(e->span));
                } else {
                    site.expression = r->span;
                }
                binding.sites.push_back(std::move(site));
            }
        }
    }
    if (binding.sites.empty()) return std::nullopt;
    binding.return_src_span = binding.sites.front().statement;
    binding.returned_identifier = binding.sites.front().identifier;
    return binding;
}

std::map<std::string, std::string> state_variable_types(const CompilationUnit& unit) {
    const Index idx(unit);
    std::map<std::string, std::string> out;
    for (const AstNode* c : idx.linearized_contracts()) {
        for (const auto& m : c->children) {
            if (m.kind != "VariableDeclaration" || !m.boolean("stateVariable").value_or(false)) continue;
            if (const std::string* ts = m.str("typeString")) out.emplace(name_of(m), *ts);
        }
    }
    return out;
}

}  // namespace sleepscan
