// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xmlkit/xml.hpp"
#include "xmlkit/xpath.hpp"

namespace xmlkit {

struct SchemaError : std::runtime_error {
    int line;
    SchemaError(int line_, const std::string& msg) : std::runtime_error(msg), line(line_) {}
};

struct UnsupportedConstructError : SchemaError {
    std::string construct;
    UnsupportedConstructError(std::string name, int line_)
        : SchemaError(line_, "unsupported schema construct \"" + name + "\""),
          construct(std::move(name)) {}
};

struct UnresolvedTypeError : SchemaError {
    std::string type_name;
    explicit UnresolvedTypeError(std::string name, int line_ = 1)
        : SchemaError(line_, "unresolved type \"" + name + "\""), type_name(std::move(name)) {}
};

enum class Builtin {
    String,
    Boolean,
    UnsignedShort,
    UnsignedInt,
    UnsignedLong,
    NonNegativeInteger,
};

inline std::string_view builtin_name(Builtin b) {
    switch (b) {
        case Builtin::String: return "string";
        case Builtin::Boolean: return "boolean";
        case Builtin::UnsignedShort: return "unsignedShort";
        case Builtin::UnsignedInt: return "unsignedInt";
        case Builtin::UnsignedLong: return "unsignedLong";
        case Builtin::NonNegativeInteger: return "nonNegativeInteger";
    }
    return "?";
}

struct Facet {
    enum class Kind { Length, MaxExclusive, MaxInclusive, MinInclusive, Enumeration };
    Kind kind;
    unsigned long long bound = 0;       // numeric facets and Length
    std::vector<std::string> values;    // Enumeration (non-empty)
    int line = 1;
};

inline std::string_view facet_name(Facet::Kind k) {
    switch (k) {
        case Facet::Kind::Length: return "length";
        case Facet::Kind::MaxExclusive: return "maxExclusive";
        case Facet::Kind::MaxInclusive: return "maxInclusive";
        case Facet::Kind::MinInclusive: return "minInclusive";
        case Facet::Kind::Enumeration: return "enumeration";
    }
    return "?";
}

using TypeId = int;

struct AttrDecl {
    std::string name;
    TypeId type = -1;
    std::optional<std::string> default_value;
    bool required = false;
};

struct UniqueConstraint {
    std::string name;
    PathExpr selector;
    PathExpr field;
};

/// An element declaration; used both for globals (qualified by the target
/// namespace) and for locals inside sequences (no namespace).
struct ElementDecl {
    std::string name;
    TypeId type = -1;
    int min_occurs = 1;
    std::optional<int> max_occurs = 1;  // nullopt = unbounded
    std::optional<std::string> default_value;
    std::vector<UniqueConstraint> uniques;
    int line = 1;
};

struct TypeDef {
    enum class Kind { BuiltinType, Restriction, List, Complex };
    Kind kind = Kind::BuiltinType;
    std::string name;  // empty for anonymous types

    Builtin builtin = Builtin::String;  // BuiltinType
    TypeId base = -1;                   // Restriction
    std::vector<Facet> facets;          // Restriction
    TypeId item = -1;                   // List

    // Complex
    std::vector<ElementDecl> particles;
    std::vector<AttrDecl> attributes;
    TypeId simple_content_base = -1;    // -1 when element-only content
};

class Schema {
public:
    std::string target_namespace;

    const TypeDef& type(TypeId id) const { return types_[static_cast<std::size_t>(id)]; }

    const ElementDecl* global(std::string_view local) const {
        for (const ElementDecl& g : globals_)
            if (g.name == local) return &g;
        return nullptr;
    }

    const std::vector<ElementDecl>& globals() const { return globals_; }

    std::size_t named_type_count() const { return named_count_; }

    /// Resolves through restrictions/lists to the underlying builtin; -1 base
    /// means the chain ends elsewhere (complex).
    Builtin primitive_of(TypeId id) const {
        const TypeDef& t = type(id);
        switch (t.kind) {
            case TypeDef::Kind::BuiltinType: return t.builtin;
            case TypeDef::Kind::Restriction: return primitive_of(t.base);
            case TypeDef::Kind::List: return primitive_of(t.item);
            case TypeDef::Kind::Complex:
                throw std::logic_error("primitive_of on complex type");
        }
        throw std::logic_error("unreachable");
    }

    bool is_list(TypeId id) const {
        const TypeDef& t = type(id);
        if (t.kind == TypeDef::Kind::List) return true;
        if (t.kind == TypeDef::Kind::Restriction) return is_list(t.base);
        return false;
    }

private:
    friend class SchemaLoader;
    std::vector<TypeDef> types_;
    std::vector<ElementDecl> globals_;
    std::size_t named_count_ = 0;
};

using SchemaPtr = std::shared_ptr<const Schema>;

struct Violation {
    int line = 1;
    std::string path;
    std::string kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

// ---------------------------------------------------------------------------
// Lexical checks for the built-in types

namespace detail {

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in_ws = !out.empty();
            continue;
        }
        if (in_ws) out += ' ';
        in_ws = false;
        out += c;
    }
    return out;
}

/// Unbounded non-negative decimal compared through a (value-fits, value)
/// pair; anything wider than 64 bits sorts above every representable bound.
struct UInt {
    bool huge = false;
    unsigned long long value = 0;
};

inline std::optional<UInt> parse_unsigned(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    UInt out;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        if (out.huge) continue;
        if (out.value > (~0ULL - static_cast<unsigned>(c - '0')) / 10) {
            out.huge = true;
            continue;
        }
        out.value = out.value * 10 + static_cast<unsigned>(c - '0');
    }
    return out;
}

inline bool uint_le(const UInt& a, unsigned long long b) { return !a.huge && a.value <= b; }
inline bool uint_lt(const UInt& a, unsigned long long b) { return !a.huge && a.value < b; }
inline bool uint_ge(const UInt& a, unsigned long long b) { return a.huge || a.value >= b; }

inline bool lexically_valid(Builtin b, std::string_view collapsed) {
    switch (b) {
        case Builtin::String:
            return true;
        case Builtin::Boolean:
            return collapsed == "true" || collapsed == "false" || collapsed == "0" ||
                   collapsed == "1";
        case Builtin::UnsignedShort: {
            auto v = parse_unsigned(collapsed);
            return v && uint_le(*v, 65535ULL);
        }
        case Builtin::UnsignedInt: {
            auto v = parse_unsigned(collapsed);
            return v && uint_le(*v, 4294967295ULL);
        }
        case Builtin::UnsignedLong: {
            auto v = parse_unsigned(collapsed);
            return v && !v->huge;  // anything wider than 64 bits is out of range
        }
        case Builtin::NonNegativeInteger:
            return parse_unsigned(collapsed).has_value();
    }
    return false;
}

/// Canonical form used by enumeration comparison and the binding layer:
/// booleans become true/false, numbers lose sign and leading zeros.
inline std::string canonical_value(Builtin b, std::string_view raw) {
    std::string c = collapse_whitespace(raw);
    switch (b) {
        case Builtin::String:
            return std::string(raw);
        case Builtin::Boolean:
            return (c == "true" || c == "1") ? "true" : "false";
        default: {
            std::string_view s = c;
            if (!s.empty() && s.front() == '+') s.remove_prefix(1);
            while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
            return std::string(s);
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loader

class SchemaLoader {
public:
    static Schema load(const XmlDocument& doc) { return SchemaLoader(doc).run(); }

private:
    const XmlDocument& doc_;
    Schema schema_;
    std::map<std::string, NodeId> named_nodes_;   // simpleType/complexType by name
    std::map<std::string, TypeId> named_types_;
    std::vector<std::string> in_progress_;

    explicit SchemaLoader(const XmlDocument& doc) : doc_(doc) {
        for (Builtin b : {Builtin::String, Builtin::Boolean, Builtin::UnsignedShort,
                          Builtin::UnsignedInt, Builtin::UnsignedLong,
                          Builtin::NonNegativeInteger}) {
            TypeDef t;
            t.kind = TypeDef::Kind::BuiltinType;
            t.builtin = b;
            t.name = std::string("xs:") + std::string(builtin_name(b));
            schema_.types_.push_back(std::move(t));
        }
    }

    TypeId builtin_id(Builtin b) const { return static_cast<TypeId>(b); }

    [[noreturn]] void unsupported(std::string what, NodeId at) const {
        throw UnsupportedConstructError(std::move(what), doc_.at(at).line);
    }

    bool is_xs(NodeId id, std::string_view local) const {
        const XmlNode& n = doc_.at(id);
        return n.kind == NodeKind::Element && n.name.ns == kns_xsd && n.name.local == local;
    }

    const std::string* attr(NodeId id, std::string_view name) const {
        for (const XmlAttr& a : doc_.at(id).attributes)
            if (a.name.ns.empty() && a.name.local == name) return &a.value;
        return nullptr;
    }

    // Rejects attributes outside `allowed` so unknown XSD features fail loud
    // instead of silently skewing validation.
    void check_attrs(NodeId id, std::initializer_list<std::string_view> allowed) const {
        for (const XmlAttr& a : doc_.at(id).attributes) {
            if (a.name.ns == kns_xmlns || a.name.ns == kns_xsi) continue;
            if (!a.name.ns.empty()) unsupported("attribute " + a.name.lexical(), id);
            bool ok = false;
            for (std::string_view s : allowed) ok = ok || a.name.local == s;
            if (!ok) unsupported("attribute " + a.name.local, id);
        }
    }

    void require_no_text(NodeId id) const {
        for (NodeId c : doc_.at(id).children) {
            const XmlNode& n = doc_.at(c);
            if (n.kind == NodeKind::Text &&
                n.text.find_first_not_of(" \t\n\r") != std::string::npos)
                unsupported("text content", id);
        }
    }

    Schema run() {
        NodeId root = doc_.root();
        if (!is_xs(root, "schema"))
            throw SchemaError(doc_.at(root).line, "root element is not xs:schema");
        check_attrs(root, {"targetNamespace"});
        if (const std::string* tn = attr(root, "targetNamespace")) schema_.target_namespace = *tn;
        require_no_text(root);

        for (NodeId c : doc_.element_children(root)) {
            if (is_xs(c, "simpleType") || is_xs(c, "complexType")) {
                const std::string* name = attr(c, "name");
                if (!name) unsupported("anonymous top-level type", c);
                named_nodes_[*name] = c;
            } else if (!is_xs(c, "element")) {
                unsupported(doc_.at(c).name.lexical(), c);
            }
        }
        for (auto& [name, node] : named_nodes_) compile_named(name);
        schema_.named_count_ = named_types_.size();
        for (NodeId c : doc_.element_children(root))
            if (is_xs(c, "element")) schema_.globals_.push_back(compile_element(c));
        return schema_;
    }

    TypeId compile_named(const std::string& name) {
        if (auto it = named_types_.find(name); it != named_types_.end()) return it->second;
        for (const std::string& p : in_progress_)
            if (p == name)
                throw UnresolvedTypeError(name + " (circular definition)",
                                          doc_.at(named_nodes_.at(name)).line);
        in_progress_.push_back(name);
        NodeId node = named_nodes_.at(name);
        TypeId id = is_xs(node, "simpleType") ? compile_simple(node) : compile_complex(node);
        schema_.types_[static_cast<std::size_t>(id)].name = name;
        named_types_[name] = id;
        in_progress_.pop_back();
        return id;
    }

    // Type reference in an attribute value: xs:* builtins, otherwise a named
    // type of this schema (reachable via the target namespace or no prefix).
    TypeId resolve_type_ref(const std::string& ref, NodeId at) {
        std::string prefix, local = ref;
        if (auto colon = ref.find(':'); colon != std::string::npos) {
            prefix = ref.substr(0, colon);
            local = ref.substr(colon + 1);
        }
        auto uri = doc_.resolve_prefix(at, prefix);
        if (!uri && !prefix.empty())
            throw SchemaError(doc_.at(at).line, "undeclared prefix \"" + prefix + "\" in type reference");
        if (*uri == kns_xsd) {
            for (Builtin b : {Builtin::String, Builtin::Boolean, Builtin::UnsignedShort,
                              Builtin::UnsignedInt, Builtin::UnsignedLong,
                              Builtin::NonNegativeInteger})
                if (builtin_name(b) == local) return builtin_id(b);
            unsupported("built-in type xs:" + local, at);
        }
        if (uri->empty() || *uri == schema_.target_namespace) {
            if (named_nodes_.count(local)) return compile_named(local);
            throw UnresolvedTypeError(local, doc_.at(at).line);
        }
        throw UnresolvedTypeError(ref, doc_.at(at).line);
    }

    TypeId add_type(TypeDef t) {
        schema_.types_.push_back(std::move(t));
        return static_cast<TypeId>(schema_.types_.size() - 1);
    }

    TypeId compile_simple(NodeId node) {
        check_attrs(node, {"name"});
        require_no_text(node);
        auto kids = doc_.element_children(node);
        if (kids.size() != 1) unsupported("simpleType content", node);
        NodeId body = kids[0];
        if (is_xs(body, "restriction")) return compile_restriction(body);
        if (is_xs(body, "list")) return compile_list(body);
        unsupported(doc_.at(body).name.lexical(), body);
    }

    TypeId compile_restriction(NodeId node) {
        check_attrs(node, {"base"});
        require_no_text(node);
        const std::string* base = attr(node, "base");
        if (!base) unsupported("restriction without base", node);
        TypeId base_id = resolve_type_ref(*base, node);
        if (schema_.type(base_id).kind == TypeDef::Kind::Complex)
            unsupported("restriction of a complex type", node);

        TypeDef t;
        t.kind = TypeDef::Kind::Restriction;
        t.base = base_id;
        std::optional<Facet> enumeration;
        for (NodeId c : doc_.element_children(node)) {
            const std::string& local = doc_.at(c).name.local;
            if (doc_.at(c).name.ns != kns_xsd) unsupported(doc_.at(c).name.lexical(), c);
            check_attrs(c, {"value"});
            const std::string* value = attr(c, "value");
            if (!value) unsupported(local + " without value", c);
            if (local == "enumeration") {
                if (!enumeration) {
                    enumeration.emplace();
                    enumeration->kind = Facet::Kind::Enumeration;
                    enumeration->line = doc_.at(c).line;
                }
                enumeration->values.push_back(*value);
                continue;
            }
            Facet f;
            f.line = doc_.at(c).line;
            if (local == "length") f.kind = Facet::Kind::Length;
            else if (local == "maxExclusive") f.kind = Facet::Kind::MaxExclusive;
            else if (local == "maxInclusive") f.kind = Facet::Kind::MaxInclusive;
            else if (local == "minInclusive") f.kind = Facet::Kind::MinInclusive;
            else unsupported(local, c);
            auto v = detail::parse_unsigned(detail::collapse_whitespace(*value));
            if (!v || v->huge)
                throw SchemaError(doc_.at(c).line, "facet value \"" + *value + "\" is not a valid bound");
            f.bound = v->value;
            t.facets.push_back(std::move(f));
        }
        if (enumeration) t.facets.push_back(std::move(*enumeration));
        check_facet_applicability(t);
        return add_type(std::move(t));
    }

    void check_facet_applicability(const TypeDef& t) {
        bool base_is_list = schema_.is_list(t.base);
        Builtin prim = schema_.primitive_of(t.base);
        bool numeric = prim != Builtin::String && prim != Builtin::Boolean;
        for (const Facet& f : t.facets) {
            switch (f.kind) {
                case Facet::Kind::Length:
                    if (!base_is_list)
                        throw SchemaError(f.line, "length facet applies only to list types");
                    break;
                case Facet::Kind::MaxExclusive:
                case Facet::Kind::MaxInclusive:
                case Facet::Kind::MinInclusive:
                    if (base_is_list || !numeric)
                        throw SchemaError(f.line, std::string(facet_name(f.kind)) +
                                                      " facet applies only to numeric atomic types");
                    break;
                case Facet::Kind::Enumeration:
                    if (base_is_list)
                        throw SchemaError(f.line, "enumeration facet applies only to atomic types");
                    break;
            }
        }
    }

    TypeId compile_list(NodeId node) {
        check_attrs(node, {"itemType"});
        require_no_text(node);
        TypeDef t;
        t.kind = TypeDef::Kind::List;
        auto kids = doc_.element_children(node);
        if (const std::string* item = attr(node, "itemType")) {
            if (!kids.empty()) unsupported("list with both itemType and content", node);
            t.item = resolve_type_ref(*item, node);
        } else if (kids.size() == 1 && is_xs(kids[0], "simpleType")) {
            check_attrs(kids[0], {});
            t.item = compile_simple(kids[0]);
        } else {
            unsupported("list without item type", node);
        }
        if (schema_.type(t.item).kind == TypeDef::Kind::Complex || schema_.is_list(t.item))
            unsupported("list item type", node);
        return add_type(std::move(t));
    }

    TypeId compile_complex(NodeId node) {
        check_attrs(node, {"name"});
        require_no_text(node);
        TypeDef t;
        t.kind = TypeDef::Kind::Complex;
        bool saw_particles = false, saw_simple_content = false;
        for (NodeId c : doc_.element_children(node)) {
            if (is_xs(c, "sequence")) {
                if (saw_particles || saw_simple_content) unsupported("complexType content", c);
                saw_particles = true;
                check_attrs(c, {});
                require_no_text(c);
                for (NodeId e : doc_.element_children(c)) {
                    if (!is_xs(e, "element")) unsupported(doc_.at(e).name.lexical(), e);
                    t.particles.push_back(compile_element(e));
                }
            } else if (is_xs(c, "simpleContent")) {
                if (saw_particles || saw_simple_content) unsupported("complexType content", c);
                saw_simple_content = true;
                compile_simple_content(c, t);
            } else if (is_xs(c, "attribute")) {
                t.attributes.push_back(compile_attribute(c));
            } else {
                unsupported(doc_.at(c).name.lexical(), c);
            }
        }
        return add_type(std::move(t));
    }

    void compile_simple_content(NodeId node, TypeDef& t) {
        check_attrs(node, {});
        require_no_text(node);
        auto kids = doc_.element_children(node);
        if (kids.size() != 1 || !is_xs(kids[0], "extension"))
            unsupported("simpleContent without extension", node);
        NodeId ext = kids[0];
        check_attrs(ext, {"base"});
        require_no_text(ext);
        const std::string* base = attr(ext, "base");
        if (!base) unsupported("extension without base", ext);
        t.simple_content_base = resolve_type_ref(*base, ext);
        if (schema_.type(t.simple_content_base).kind == TypeDef::Kind::Complex)
            unsupported("simpleContent extension of a complex type", ext);
        for (NodeId c : doc_.element_children(ext)) {
            if (!is_xs(c, "attribute")) unsupported(doc_.at(c).name.lexical(), c);
            t.attributes.push_back(compile_attribute(c));
        }
    }

    AttrDecl compile_attribute(NodeId node) {
        check_attrs(node, {"name", "type", "default", "use"});
        require_no_text(node);
        AttrDecl a;
        const std::string* name = attr(node, "name");
        if (!name) unsupported("attribute without name", node);
        a.name = *name;
        if (const std::string* use = attr(node, "use")) {
            if (*use == "required") a.required = true;
            else if (*use != "optional") unsupported("use=\"" + *use + "\"", node);
        }
        auto kids = doc_.element_children(node);
        if (const std::string* type = attr(node, "type")) {
            if (!kids.empty()) unsupported("attribute with both type and content", node);
            a.type = resolve_type_ref(*type, node);
        } else if (kids.size() == 1 && is_xs(kids[0], "simpleType")) {
            check_attrs(kids[0], {});
            a.type = compile_simple(kids[0]);
        } else {
            unsupported("attribute without a type", node);
        }
        if (schema_.type(a.type).kind == TypeDef::Kind::Complex)
            unsupported("attribute of complex type", node);
        if (const std::string* def = attr(node, "default")) {
            a.default_value = *def;
            if (a.required) unsupported("default on a required attribute", node);
            if (!value_ok(a.type, *def))
                throw SchemaError(doc_.at(node).line,
                                  "attribute default \"" + *def + "\" is not valid for its type");
        }
        return a;
    }

    ElementDecl compile_element(NodeId node) {
        check_attrs(node, {"name", "type", "minOccurs", "maxOccurs", "default"});
        require_no_text(node);
        ElementDecl e;
        e.line = doc_.at(node).line;
        const std::string* name = attr(node, "name");
        if (!name) unsupported("element without name (ref is not supported)", node);
        e.name = *name;
        if (const std::string* v = attr(node, "minOccurs")) e.min_occurs = occurs_value(*v, node);
        if (const std::string* v = attr(node, "maxOccurs")) {
            if (*v == "unbounded") e.max_occurs = std::nullopt;
            else e.max_occurs = occurs_value(*v, node);
        }
        if (e.max_occurs && *e.max_occurs < e.min_occurs)
            throw SchemaError(e.line, "maxOccurs is smaller than minOccurs");
        if (const std::string* v = attr(node, "default")) e.default_value = *v;

        std::vector<NodeId> type_kids;
        for (NodeId c : doc_.element_children(node)) {
            if (is_xs(c, "unique")) {
                e.uniques.push_back(compile_unique(c));
            } else if (is_xs(c, "simpleType") || is_xs(c, "complexType")) {
                type_kids.push_back(c);
            } else {
                unsupported(doc_.at(c).name.lexical(), c);
            }
        }
        if (const std::string* type = attr(node, "type")) {
            if (!type_kids.empty()) unsupported("element with both type and inline type", node);
            e.type = resolve_type_ref(*type, node);
        } else if (type_kids.size() == 1) {
            NodeId t = type_kids[0];
            if (is_xs(t, "simpleType")) {
                check_attrs(t, {});
                e.type = compile_simple(t);
            } else {
                check_attrs(t, {});
                e.type = compile_complex(t);
            }
        } else {
            unsupported("element without a type", node);
        }
        if (e.default_value) {
            const TypeDef& t = schema_.type(e.type);
            bool simple = t.kind != TypeDef::Kind::Complex;
            if (!simple || !value_ok(e.type, *e.default_value))
                throw SchemaError(e.line, "element default \"" + *e.default_value +
                                              "\" is not valid for its type");
        }
        return e;
    }

    UniqueConstraint compile_unique(NodeId node) {
        check_attrs(node, {"name"});
        require_no_text(node);
        UniqueConstraint u;
        const std::string* name = attr(node, "name");
        if (!name) unsupported("unique without name", node);
        u.name = *name;
        auto kids = doc_.element_children(node);
        if (kids.size() != 2 || !is_xs(kids[0], "selector") || !is_xs(kids[1], "field"))
            unsupported("unique content (selector then field required)", node);
        u.selector = compile_schema_path(kids[0], false);
        u.field = compile_schema_path(kids[1], true);
        return u;
    }

    PathExpr compile_schema_path(NodeId node, bool allow_attribute) {
        check_attrs(node, {"xpath"});
        const std::string* src = attr(node, "xpath");
        if (!src) unsupported("selector/field without xpath", node);
        NamespaceMap ns;
        for (auto& [p, u] : doc_.in_scope_namespaces(node))
            if (!p.empty()) ns[p] = u;
        PathExpr expr;
        try {
            expr = compile_expr(*src, ns);
        } catch (const XPathSyntaxError& e) {
            throw SchemaError(doc_.at(node).line, std::string("invalid xpath: ") + e.what());
        }
        const Expr& root = expr.root();
        auto path_ok = [&](const Expr& p) {
            if (p.kind != Expr::Kind::Path || p.absolute) return false;
            for (std::size_t i = 0; i < p.steps.size(); ++i) {
                const XPathStep& s = p.steps[i];
                if (s.axis == XPathStep::Axis::Attribute)
                    return allow_attribute && i + 1 == p.steps.size();
                if (s.axis != XPathStep::Axis::Child) return false;
            }
            return true;
        };
        bool ok = root.kind == Expr::Kind::Union
                      ? std::all_of(root.operands.begin(), root.operands.end(), path_ok)
                      : path_ok(root);
        if (!ok)
            throw SchemaError(doc_.at(node).line,
                              "selector/field must be a relative element path");
        return expr;
    }

    int occurs_value(const std::string& v, NodeId at) const {
        auto n = detail::parse_unsigned(v);
        if (!n || n->huge || n->value > 1000000)
            throw SchemaError(doc_.at(at).line, "invalid occurrence bound \"" + v + "\"");
        return static_cast<int>(n->value);
    }

    // Validity of a fixed value (attribute/element default) for a simple type.
    bool value_ok(TypeId type, std::string_view value) {
        std::vector<Violation> sink;
        validate_simple_value(schema_, type, value, "", 1, sink);
        return sink.empty();
    }

public:
    // Shared with the validator below.
    static void validate_simple_value(const Schema& schema, TypeId type, std::string_view raw,
                                      const std::string& path, int line,
                                      std::vector<Violation>& out) {
        const TypeDef& t = schema.type(type);
        switch (t.kind) {
            case TypeDef::Kind::BuiltinType: {
                std::string c = detail::collapse_whitespace(raw);
                if (!detail::lexically_valid(t.builtin, c))
                    out.push_back({line, path, "lexical",
                                   "\"" + c + "\" is not a valid " +
                                       std::string(builtin_name(t.builtin))});
                return;
            }
            case TypeDef::Kind::List: {
                std::string c = detail::collapse_whitespace(raw);
                std::size_t start = 0;
                while (start < c.size()) {
                    std::size_t sp = c.find(' ', start);
                    std::string_view item = sp == std::string::npos
                                                ? std::string_view(c).substr(start)
                                                : std::string_view(c).substr(start, sp - start);
                    validate_simple_value(schema, t.item, item, path, line, out);
                    if (sp == std::string::npos) break;
                    start = sp + 1;
                }
                return;
            }
            case TypeDef::Kind::Restriction: {
                std::size_t before = out.size();
                validate_simple_value(schema, t.base, raw, path, line, out);
                if (out.size() != before) return;  // lexically broken: facets are moot
                apply_facets(schema, t, raw, path, line, out);
                return;
            }
            case TypeDef::Kind::Complex:
                out.push_back({line, path, "type", "complex type used where a simple value is required"});
                return;
        }
    }

private:
    static void apply_facets(const Schema& schema, const TypeDef& t, std::string_view raw,
                             const std::string& path, int line, std::vector<Violation>& out) {
        std::string collapsed = detail::collapse_whitespace(raw);
        Builtin prim = schema.primitive_of(t.base);
        for (const Facet& f : t.facets) {
            switch (f.kind) {
                case Facet::Kind::Length: {
                    std::size_t count = 0;
                    if (!collapsed.empty()) {
                        count = 1;
                        for (char c : collapsed)
                            if (c == ' ') ++count;
                    }
                    if (count != f.bound)
                        out.push_back({line, path, "length",
                                       "list has " + std::to_string(count) + " items, expected " +
                                           std::to_string(f.bound)});
                    break;
                }
                case Facet::Kind::MaxExclusive:
                case Facet::Kind::MaxInclusive:
                case Facet::Kind::MinInclusive: {
                    auto v = detail::parse_unsigned(collapsed);
                    if (!v) break;  // already reported by the base check
                    bool ok = f.kind == Facet::Kind::MaxExclusive ? detail::uint_lt(*v, f.bound)
                              : f.kind == Facet::Kind::MaxInclusive ? detail::uint_le(*v, f.bound)
                                                                    : detail::uint_ge(*v, f.bound);
                    if (!ok)
                        out.push_back({line, path, std::string(facet_name(f.kind)),
                                       "value " + collapsed + " violates " +
                                           std::string(facet_name(f.kind)) + " " +
                                           std::to_string(f.bound)});
                    break;
                }
                case Facet::Kind::Enumeration: {
                    std::string canon = detail::canonical_value(prim, raw);
                    bool found = false;
                    std::string allowed;
                    for (const std::string& ev : f.values) {
                        std::string ec = detail::canonical_value(prim, ev);
                        found = found || ec == canon;
                        if (!allowed.empty()) allowed += ", ";
                        allowed += ec;
                    }
                    if (!found)
                        out.push_back({line, path, "enumeration",
                                       "value " + canon + " not in enumeration {" + allowed + "}"});
                    break;
                }
            }
        }
    }
};

/// Compiles a schema document using the supported vocabulary; anything else
/// raises UnsupportedConstructError / UnresolvedTypeError.
inline Schema load_schema(const XmlDocument& doc) { return SchemaLoader::load(doc); }

// ---------------------------------------------------------------------------
// Validation

namespace detail {

class Validator {
public:
    Validator(const Schema& schema, const XmlDocument& doc) : schema_(schema), doc_(doc) {}

    ValidationReport run() {
        ValidationReport report;
        NodeId root = doc_.root();
        const XmlNode& rn = doc_.at(root);
        const ElementDecl* global =
            rn.name.ns == schema_.target_namespace ? schema_.global(rn.name.local) : nullptr;
        if (!global) {
            report.violations.push_back(
                {rn.line, doc_.path_of(root), "root",
                 "root element \"" + rn.name.lexical() + "\" does not match a global element"});
            return report;
        }
        validate_element(*global, root, report.violations);
        return report;
    }

    // element -> matched declaration, filled during validation; lets the
    // unique-constraint check see attribute defaults of selected nodes.
    const std::map<NodeId, const ElementDecl*>& matches() const { return matched_; }

private:
    const Schema& schema_;
    const XmlDocument& doc_;
    std::map<NodeId, const ElementDecl*> matched_;

    void validate_element(const ElementDecl& decl, NodeId id, std::vector<Violation>& out) {
        matched_[id] = &decl;
        const TypeDef& t = schema_.type(decl.type);
        const XmlNode& n = doc_.at(id);
        std::string path = doc_.path_of(id);

        if (t.kind == TypeDef::Kind::Complex) {
            validate_attributes(t, id, path, out);
            if (t.simple_content_base >= 0) {
                if (!doc_.element_children(id).empty())
                    out.push_back({n.line, path, "element",
                                   "element content not allowed in simple content"});
                else
                    SchemaLoader::validate_simple_value(schema_, t.simple_content_base,
                                                        doc_.string_value(id), path, n.line, out);
            } else {
                validate_sequence(t, id, path, out);
            }
            for (const UniqueConstraint& u : decl.uniques) validate_unique(u, id, out);
        } else {
            if (!n.attributes.empty()) {
                for (const XmlAttr& a : n.attributes) {
                    if (a.name.ns == kns_xmlns || a.name.ns == kns_xsi) continue;
                    out.push_back({n.line, path + "/@" + a.name.local, "attribute",
                                   "undeclared attribute \"" + a.name.lexical() + "\""});
                }
            }
            if (!doc_.element_children(id).empty()) {
                out.push_back({n.line, path, "element", "element content not allowed in simple type"});
                return;
            }
            SchemaLoader::validate_simple_value(schema_, decl.type, doc_.string_value(id), path,
                                                n.line, out);
        }
    }

    void validate_attributes(const TypeDef& t, NodeId id, const std::string& path,
                             std::vector<Violation>& out) {
        const XmlNode& n = doc_.at(id);
        for (const XmlAttr& a : n.attributes) {
            if (a.name.ns == kns_xmlns || a.name.ns == kns_xsi) continue;
            const AttrDecl* decl = nullptr;
            if (a.name.ns.empty())
                for (const AttrDecl& d : t.attributes)
                    if (d.name == a.name.local) decl = &d;
            if (!decl) {
                out.push_back({n.line, path + "/@" + a.name.local, "attribute",
                               "undeclared attribute \"" + a.name.lexical() + "\""});
                continue;
            }
            SchemaLoader::validate_simple_value(schema_, decl->type, a.value,
                                                path + "/@" + a.name.local, n.line, out);
        }
        for (const AttrDecl& d : t.attributes) {
            if (!d.required) continue;
            if (!doc_.attribute(id, QName("", d.name)))
                out.push_back({n.line, path + "/@" + d.name, "attribute",
                               "required attribute \"" + d.name + "\" is missing"});
        }
    }

    void validate_sequence(const TypeDef& t, NodeId id, const std::string& path,
                           std::vector<Violation>& out) {
        const XmlNode& n = doc_.at(id);
        for (NodeId c : n.children) {
            const XmlNode& cn = doc_.at(c);
            if (cn.kind == NodeKind::Text &&
                cn.text.find_first_not_of(" \t\n\r") != std::string::npos)
                out.push_back({cn.line, path, "text",
                               "text content not allowed in element-only content"});
        }
        std::vector<NodeId> kids = doc_.element_children(id);
        std::size_t idx = 0;
        for (const ElementDecl& p : t.particles) {
            int count = 0;
            while (idx < kids.size()) {
                const XmlNode& kn = doc_.at(kids[idx]);
                if (!kn.name.ns.empty() || kn.name.local != p.name) break;
                ++count;
                if (p.max_occurs && count > *p.max_occurs)
                    out.push_back({kn.line, doc_.path_of(kids[idx]), "element",
                                   "element \"" + p.name + "\" occurs more than " +
                                       std::to_string(*p.max_occurs) + " times"});
                validate_element(p, kids[idx], out);
                ++idx;
            }
            if (count < p.min_occurs)
                out.push_back({n.line, path + "/" + p.name, "element",
                               "expected " + std::to_string(p.min_occurs) + " occurrence(s) of \"" +
                                   p.name + "\", found " + std::to_string(count)});
        }
        for (; idx < kids.size(); ++idx) {
            const XmlNode& kn = doc_.at(kids[idx]);
            out.push_back({kn.line, doc_.path_of(kids[idx]), "element",
                           "unexpected element \"" + kn.name.lexical() + "\""});
        }
    }

    void validate_unique(const UniqueConstraint& u, NodeId id, std::vector<Violation>& out) {
        EvalContext ctx(doc_, NodeRef{id, -1});
        XPathValue selected = evaluate(u.selector, ctx);
        auto* nodes = std::get_if<NodeSet>(&selected);
        if (!nodes) return;
        std::vector<std::string> seen;
        for (const NodeRef& node : *nodes) {
            std::optional<std::string> value = field_value(u, node);
            if (!value) continue;  // absent field: no key, nothing to collide
            std::string canon = collapse_whitespace(*value);
            if (std::find(seen.begin(), seen.end(), canon) != seen.end()) {
                out.push_back({doc_.at(node.node).line, field_path(u, node), "unique",
                               "duplicate value \"" + canon + "\" for unique constraint \"" +
                                   u.name + "\""});
            } else {
                seen.push_back(canon);
            }
        }
    }

    std::optional<std::string> field_value(const UniqueConstraint& u, NodeRef node) {
        EvalContext ctx(doc_, node);
        XPathValue v = evaluate(u.field, ctx);
        auto* set = std::get_if<NodeSet>(&v);
        if (!set) return std::nullopt;
        if (!set->empty()) return string_value(doc_, set->front());
        // declared default of an absent attribute still supplies the key
        const Expr& f = u.field.root();
        if (f.kind == Expr::Kind::Path && f.steps.size() == 1 &&
            f.steps[0].axis == XPathStep::Axis::Attribute && !node.is_attribute()) {
            auto it = matched_.find(node.node);
            if (it != matched_.end()) {
                const TypeDef& t = schema_.type(it->second->type);
                if (t.kind == TypeDef::Kind::Complex)
                    for (const AttrDecl& a : t.attributes)
                        if (a.name == f.steps[0].name.local && a.default_value)
                            return a.default_value;
            }
        }
        return std::nullopt;
    }

    std::string field_path(const UniqueConstraint& u, NodeRef node) {
        const Expr& f = u.field.root();
        std::string p = path_of(doc_, node);
        if (f.kind == Expr::Kind::Path && f.steps.size() == 1 &&
            f.steps[0].axis == XPathStep::Axis::Attribute)
            p += "/@" + f.steps[0].name.local;
        return p;
    }
};

}  // namespace detail

/// Structural, lexical, facet and unique-constraint checks; all violations
/// are reported, never just the first, and validation never throws on
/// content.
inline ValidationReport validate(const Schema& schema, const XmlDocument& doc) {
    detail::Validator v(schema, doc);
    return v.run();
}

/// Copy of `doc` where every declared-but-absent attribute with a default
/// carries the default value.
inline XmlDocument apply_defaults(const Schema& schema, const XmlDocument& doc) {
    detail::Validator v(schema, doc);
    v.run();  // fills element -> declaration matches
    struct Rebuild {
        const XmlDocument& src;
        const Schema& schema;
        const std::map<NodeId, const ElementDecl*>& matches;
        XmlBuilder out;

        void copy(NodeId id) {
            const XmlNode& n = src.at(id);
            if (n.kind == NodeKind::Text) {
                out.text(n.text, n.line);
                return;
            }
            out.start_element(n.name, n.line);
            for (const XmlAttr& a : n.attributes) out.attribute(a.name, a.value);
            if (auto it = matches.find(id); it != matches.end()) {
                const TypeDef& t = schema.type(it->second->type);
                if (t.kind == TypeDef::Kind::Complex)
                    for (const AttrDecl& a : t.attributes)
                        if (a.default_value && !src.attribute(id, QName("", a.name)))
                            out.attribute(QName("", a.name), *a.default_value);
            }
            for (NodeId c : n.children) copy(c);
            out.end_element();
        }
    } rb{doc, schema, v.matches(), {}};
    rb.out.declared_encoding(doc.declared_encoding());
    rb.copy(doc.root());
    return rb.out.finish();
}

}  // namespace xmlkit
