// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xmlkit/schema.hpp"
#include "xmlkit/xml.hpp"

namespace xmlkit {

struct BindingError : std::runtime_error {
    ValidationReport report;
    explicit BindingError(const std::string& msg, ValidationReport r = {})
        : std::runtime_error(msg), report(std::move(r)) {}
};

enum class FieldKind { Scalar, ScalarList, Record, RecordList };

struct FieldDesc {
    std::string name;        // field name (lower-camel form of the XML name)
    std::string xml_name;    // element or attribute name in instances
    bool is_attribute = false;
    FieldKind kind = FieldKind::Scalar;
    Builtin scalar = Builtin::String;   // Scalar / ScalarList
    std::string record;                 // Record / RecordList
    TypeId simple_type = -1;            // Scalar / ScalarList, for validation
    std::optional<std::string> default_value;
    bool optional = false;
};

struct RecordDesc {
    std::string name;
    std::vector<FieldDesc> fields;

    const FieldDesc* field(std::string_view name_) const {
        for (const FieldDesc& f : fields)
            if (f.name == name_) return &f;
        return nullptr;
    }
};

struct Scalar {
    Builtin kind = Builtin::String;
    std::string canonical;

    unsigned long long as_uint() const {
        auto v = detail::parse_unsigned(canonical);
        if (!v || v->huge) throw BindingError("scalar \"" + canonical + "\" is not an integer");
        return v->value;
    }
    bool as_bool() const { return canonical == "true"; }
    const std::string& as_string() const { return canonical; }

    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.kind == b.kind && a.canonical == b.canonical;
    }
};

struct TypedValue;

struct FieldValue {
    std::string name;
    FieldKind kind = FieldKind::Scalar;
    std::vector<Scalar> scalars;       // Scalar (exactly one) / ScalarList
    std::vector<TypedValue> records;   // Record (exactly one) / RecordList

    friend bool operator==(const FieldValue& a, const FieldValue& b);
};

/// A typed tree produced by unmarshal; field order follows the binding model.
struct TypedValue {
    std::string record;
    std::vector<FieldValue> fields;

    const FieldValue* field(std::string_view name) const {
        for (const FieldValue& f : fields)
            if (f.name == name) return &f;
        return nullptr;
    }

    FieldValue& add(std::string name, FieldKind kind) {
        fields.push_back(FieldValue{std::move(name), kind, {}, {}});
        return fields.back();
    }

    friend bool operator==(const TypedValue& a, const TypedValue& b) {
        return a.record == b.record && a.fields == b.fields;
    }
};

inline bool operator==(const FieldValue& a, const FieldValue& b) {
    return a.name == b.name && a.kind == b.kind && a.scalars == b.scalars &&
           a.records == b.records;
}

/// Record descriptors derived from a compiled schema plus the schema itself
/// (kept for validation during unmarshal/marshal). Immutable and shareable.
class BindingModel {
public:
    BindingModel(SchemaPtr schema, std::vector<RecordDesc> records,
                 std::vector<std::pair<std::string, std::string>> roots)
        : schema_(std::move(schema)), records_(std::move(records)), roots_(std::move(roots)) {}

    const Schema& schema() const { return *schema_; }
    SchemaPtr schema_ptr() const { return schema_; }

    const RecordDesc* record(std::string_view name) const {
        for (const RecordDesc& r : records_)
            if (r.name == name) return &r;
        return nullptr;
    }

    const std::vector<RecordDesc>& records() const { return records_; }

    /// (global element local name, record name) pairs.
    const std::vector<std::pair<std::string, std::string>>& roots() const { return roots_; }

    const std::string* record_for_root(std::string_view element) const {
        for (const auto& [elem, rec] : roots_)
            if (elem == element) return &rec;
        return nullptr;
    }

    /// Prefix used for the root element when marshalling (the target
    /// namespace must be bound to something; instances bind it explicitly).
    std::string root_prefix = "m";

private:
    SchemaPtr schema_;
    std::vector<RecordDesc> records_;
    std::vector<std::pair<std::string, std::string>> roots_;
};

// ---------------------------------------------------------------------------
// Model derivation

namespace detail {

inline std::string field_name_of(std::string_view xml_name) {
    std::string out(xml_name);
    if (!out.empty() && out[0] >= 'A' && out[0] <= 'Z')
        out[0] = static_cast<char>(out[0] - 'A' + 'a');
    return out;
}

class BindingDeriver {
public:
    explicit BindingDeriver(SchemaPtr schema) : schema_(std::move(schema)) {}

    BindingModel run() {
        std::vector<std::pair<std::string, std::string>> roots;
        for (const ElementDecl& g : schema_->globals())
            roots.emplace_back(g.name, derive_record(g));
        return BindingModel(schema_, std::move(records_), std::move(roots));
    }

private:
    SchemaPtr schema_;
    std::vector<RecordDesc> records_;

    bool have(std::string_view name) const {
        for (const RecordDesc& r : records_)
            if (r.name == name) return true;
        return false;
    }

    // One record per element declaration with a structured type, named after
    // the element; a named complex type reached through two elements of the
    // same name is shared.
    std::string derive_record(const ElementDecl& decl) {
        const TypeDef& t = schema_->type(decl.type);
        std::string name = decl.name;
        if (have(name)) return name;

        RecordDesc rec;
        rec.name = name;
        records_.push_back(rec);  // reserve before recursing (cycles)
        std::vector<FieldDesc> fields;

        if (t.kind != TypeDef::Kind::Complex) {
            FieldDesc f;
            f.name = "value";
            f.xml_name = decl.name;
            f.kind = schema_->is_list(decl.type) ? FieldKind::ScalarList : FieldKind::Scalar;
            f.scalar = schema_->primitive_of(decl.type);
            f.simple_type = decl.type;
            fields.push_back(std::move(f));
        } else {
            if (t.simple_content_base >= 0) {
                FieldDesc f;
                f.name = "value";
                f.xml_name = decl.name;
                f.kind = schema_->is_list(t.simple_content_base) ? FieldKind::ScalarList
                                                                 : FieldKind::Scalar;
                f.scalar = schema_->primitive_of(t.simple_content_base);
                f.simple_type = t.simple_content_base;
                fields.push_back(std::move(f));
            }
            for (const ElementDecl& p : t.particles) {
                FieldDesc f;
                f.name = field_name_of(p.name);
                f.xml_name = p.name;
                f.optional = p.min_occurs == 0;
                f.default_value = p.default_value;
                bool repeated = !p.max_occurs || *p.max_occurs > 1;
                const TypeDef& pt = schema_->type(p.type);
                if (pt.kind == TypeDef::Kind::Complex) {
                    f.kind = repeated ? FieldKind::RecordList : FieldKind::Record;
                    f.record = derive_record(p);
                } else {
                    if (repeated)
                        throw BindingError("repeated simple element \"" + p.name +
                                           "\" has no binding representation");
                    f.kind = schema_->is_list(p.type) ? FieldKind::ScalarList : FieldKind::Scalar;
                    f.scalar = schema_->primitive_of(p.type);
                    f.simple_type = p.type;
                }
                fields.push_back(std::move(f));
            }
            for (const AttrDecl& a : t.attributes) {
                FieldDesc f;
                f.name = field_name_of(a.name);
                f.xml_name = a.name;
                f.is_attribute = true;
                f.kind = schema_->is_list(a.type) ? FieldKind::ScalarList : FieldKind::Scalar;
                f.scalar = schema_->primitive_of(a.type);
                f.simple_type = a.type;
                f.default_value = a.default_value;
                f.optional = !a.required;
                fields.push_back(std::move(f));
            }
        }
        for (RecordDesc& r : records_)
            if (r.name == name) r.fields = std::move(fields);
        return name;
    }
};

}  // namespace detail

/// Derives the binding model: one record per global element and per element
/// declaration with complex content, with list simple types flattened to
/// scalar-list fields and simpleContent to a value field plus attributes.
inline BindingModel derive_bindings(SchemaPtr schema) {
    return detail::BindingDeriver(std::move(schema)).run();
}

inline BindingModel derive_bindings(const Schema& schema) {
    return derive_bindings(std::make_shared<const Schema>(schema));
}

// ---------------------------------------------------------------------------
// Unmarshal / marshal

namespace detail {

inline std::vector<Scalar> make_scalar_list(Builtin kind, std::string_view raw) {
    std::vector<Scalar> out;
    std::string c = collapse_whitespace(raw);
    std::size_t start = 0;
    while (start < c.size()) {
        std::size_t sp = c.find(' ', start);
        std::string_view item = sp == std::string::npos
                                    ? std::string_view(c).substr(start)
                                    : std::string_view(c).substr(start, sp - start);
        out.push_back(Scalar{kind, canonical_value(kind, item)});
        if (sp == std::string::npos) break;
        start = sp + 1;
    }
    return out;
}

class Unmarshaller {
public:
    Unmarshaller(const BindingModel& model, const XmlDocument& doc)
        : model_(model), doc_(doc) {}

    TypedValue run() {
        ValidationReport report = validate(model_.schema(), doc_);
        if (!report.valid()) {
            std::string msg = "document does not validate against the binding schema";
            if (!report.violations.empty()) msg += ": " + report.violations.front().message;
            throw BindingError(msg, std::move(report));
        }
        NodeId root = doc_.root();
        const std::string* rec = model_.record_for_root(doc_.at(root).name.local);
        if (!rec) throw BindingError("no record for root element");
        return bind(*model_.record(*rec), root);
    }

private:
    const BindingModel& model_;
    const XmlDocument& doc_;

    TypedValue bind(const RecordDesc& rec, NodeId elem) {
        TypedValue value;
        value.record = rec.name;
        for (const FieldDesc& f : rec.fields) {
            if (f.is_attribute) {
                const std::string* raw = doc_.attribute(elem, QName("", f.xml_name));
                if (!raw && f.default_value) raw = &*f.default_value;
                if (!raw) continue;  // optional attribute, no default
                FieldValue& fv = value.add(f.name, f.kind);
                if (f.kind == FieldKind::ScalarList) fv.scalars = make_scalar_list(f.scalar, *raw);
                else fv.scalars.push_back(Scalar{f.scalar, canonical_value(f.scalar, *raw)});
                continue;
            }
            if (f.name == "value" && !f.is_attribute && f.xml_name == rec.name) {
                // simpleContent / simple element body
                FieldValue& fv = value.add(f.name, f.kind);
                std::string raw = doc_.string_value(elem);
                if (f.kind == FieldKind::ScalarList) fv.scalars = make_scalar_list(f.scalar, raw);
                else fv.scalars.push_back(Scalar{f.scalar, canonical_value(f.scalar, raw)});
                continue;
            }
            std::vector<NodeId> matches;
            for (NodeId c : doc_.element_children(elem))
                if (doc_.at(c).name.ns.empty() && doc_.at(c).name.local == f.xml_name)
                    matches.push_back(c);
            switch (f.kind) {
                case FieldKind::Record:
                case FieldKind::RecordList: {
                    if (matches.empty() && f.kind == FieldKind::Record && !f.optional)
                        throw BindingError("missing required element \"" + f.xml_name + "\"");
                    if (matches.empty()) break;
                    FieldValue& fv = value.add(f.name, f.kind);
                    for (NodeId m : matches) fv.records.push_back(bind(*model_.record(f.record), m));
                    break;
                }
                case FieldKind::Scalar:
                case FieldKind::ScalarList: {
                    std::optional<std::string> raw;
                    if (!matches.empty()) raw = doc_.string_value(matches.front());
                    else if (f.default_value) raw = f.default_value;
                    if (!raw) break;  // optional, no default
                    FieldValue& fv = value.add(f.name, f.kind);
                    if (f.kind == FieldKind::ScalarList)
                        fv.scalars = make_scalar_list(f.scalar, *raw);
                    else
                        fv.scalars.push_back(Scalar{f.scalar, canonical_value(f.scalar, *raw)});
                    break;
                }
            }
        }
        return value;
    }
};

class Marshaller {
public:
    Marshaller(const BindingModel& model, const TypedValue& value)
        : model_(model), value_(value) {}

    XmlDocument run() {
        const RecordDesc* rec = model_.record(value_.record);
        if (!rec) throw BindingError("unknown record \"" + value_.record + "\"");
        std::string root_element;
        for (const auto& [elem, r] : model_.roots())
            if (r == value_.record) root_element = elem;
        if (root_element.empty())
            throw BindingError("record \"" + value_.record + "\" is not a global element");

        XmlBuilder b;
        const std::string& tns = model_.schema().target_namespace;
        QName root_name = tns.empty() ? QName("", root_element)
                                      : QName(tns, root_element, model_.root_prefix);
        b.start_element(root_name);
        if (!tns.empty())
            b.attribute(QName(std::string(kns_xmlns), model_.root_prefix, "xmlns"), tns);
        emit_fields(b, *rec, value_);
        b.end_element();
        XmlDocument doc = b.finish();

        ValidationReport report = validate(model_.schema(), doc);
        if (!report.valid()) {
            std::string msg = "marshalled document does not validate";
            if (!report.violations.empty()) msg += ": " + report.violations.front().message;
            throw BindingError(msg, std::move(report));
        }
        return doc;
    }

private:
    const BindingModel& model_;
    const TypedValue& value_;

    static std::string join_scalars(const std::vector<Scalar>& items) {
        std::string out;
        for (const Scalar& s : items) {
            if (!out.empty()) out += ' ';
            out += s.canonical;
        }
        return out;
    }

    void emit_fields(XmlBuilder& b, const RecordDesc& rec, const TypedValue& value) {
        for (const FieldValue& fv : value.fields)
            if (!rec.field(fv.name))
                throw BindingError("field \"" + fv.name + "\" is not part of record \"" +
                                   rec.name + "\"");
        // attributes precede content; fields emit in descriptor order
        for (const FieldDesc& f : rec.fields) {
            const FieldValue* fv = value.field(f.name);
            if (!fv) continue;
            if (!f.is_attribute) continue;
            check_kind(f, *fv);
            b.attribute(QName("", f.xml_name), join_scalars(fv->scalars));
        }
        for (const FieldDesc& f : rec.fields) {
            const FieldValue* fv = value.field(f.name);
            if (!fv) continue;
            check_kind(f, *fv);
            if (f.is_attribute) continue;
            if (f.name == "value" && f.xml_name == rec.name) {
                b.text(join_scalars(fv->scalars));
                continue;
            }
            switch (f.kind) {
                case FieldKind::Scalar:
                case FieldKind::ScalarList:
                    b.start_element(QName("", f.xml_name));
                    b.text(join_scalars(fv->scalars));
                    b.end_element();
                    break;
                case FieldKind::Record:
                case FieldKind::RecordList:
                    for (const TypedValue& child : fv->records) {
                        if (child.record != f.record)
                            throw BindingError("field \"" + f.name + "\" holds record \"" +
                                               child.record + "\", expected \"" + f.record + "\"");
                        b.start_element(QName("", f.xml_name));
                        emit_fields(b, *model_.record(f.record), child);
                        b.end_element();
                    }
                    break;
            }
        }
    }

    void check_kind(const FieldDesc& f, const FieldValue& fv) {
        if (f.kind != fv.kind)
            throw BindingError("field \"" + f.name + "\" has the wrong kind");
        bool scalar_kind = f.kind == FieldKind::Scalar || f.kind == FieldKind::ScalarList;
        if (scalar_kind) {
            if (!fv.records.empty())
                throw BindingError("scalar field \"" + f.name + "\" holds records");
            if (f.kind == FieldKind::Scalar && fv.scalars.size() != 1)
                throw BindingError("field \"" + f.name + "\" must hold exactly one scalar");
            for (const Scalar& s : fv.scalars)
                if (s.kind != f.scalar)
                    throw BindingError("field \"" + f.name + "\" holds the wrong scalar kind");
        } else {
            if (!fv.scalars.empty())
                throw BindingError("record field \"" + f.name + "\" holds scalars");
            if (f.kind == FieldKind::Record && fv.records.size() != 1)
                throw BindingError("field \"" + f.name + "\" must hold exactly one record");
        }
    }
};

}  // namespace detail

/// Typed tree with defaults applied and scalars canonicalized; the document
/// must validate against the model's schema (BindingError reports the
/// violations otherwise).
inline TypedValue unmarshal(const BindingModel& model, const XmlDocument& doc) {
    return detail::Unmarshaller(model, doc).run();
}

/// Document that validates against the originating schema;
/// unmarshal(marshal(v)) == v for conforming values.
inline XmlDocument marshal(const BindingModel& model, const TypedValue& value) {
    return detail::Marshaller(model, value).run();
}

}  // namespace xmlkit
