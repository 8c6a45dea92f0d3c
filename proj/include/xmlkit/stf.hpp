// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xmlkit/parse.hpp"
#include "xmlkit/schema.hpp"
#include "xmlkit/xml.hpp"
#include "xmlkit/xslt.hpp"

namespace xmlkit::stf {

inline constexpr std::string_view kns_stf = "http://glacier.lbl.gov/icecube/daq/stf";

struct DefinitionError : std::runtime_error {
    ValidationReport report;
    explicit DefinitionError(const std::string& msg, ValidationReport r = {})
        : std::runtime_error(msg), report(std::move(r)) {}
};

enum class ParamKind { Boolean, String, UnsignedInt, UnsignedLong };

inline std::string_view param_kind_name(ParamKind k) {
    switch (k) {
        case ParamKind::Boolean: return "boolean";
        case ParamKind::String: return "string";
        case ParamKind::UnsignedInt: return "unsignedInt";
        case ParamKind::UnsignedLong: return "unsignedLong";
    }
    return "?";
}

struct Parameter {
    std::string name;
    ParamKind kind = ParamKind::String;
    std::optional<std::string> default_value;          // inputs only
    std::optional<unsigned long long> min_value;       // numeric kinds only
    std::optional<unsigned long long> max_value;       // numeric kinds only
};

/// Typed model of a test-module definition: name, version and the declared
/// input/output parameters in declaration order.
struct ModuleDefn {
    std::string name;  // a C identifier; generated code concatenates it
    std::string description;
    int version_major = 0;
    int version_minor = 0;
    std::vector<Parameter> input_params;
    std::vector<Parameter> output_params;
};

/// Schema for module definition documents. The paper's figures fix the
/// instance shape; the parameter payloads are limited to the four kinds the
/// signature stylesheet understands.
inline const std::string& defn_schema_text() {
    static const std::string text = R"SCHEMA(<?xml version="1.0" encoding="UTF-8"?>
<xs:schema targetNamespace="http://glacier.lbl.gov/icecube/daq/stf"
        xmlns="http://glacier.lbl.gov/icecube/daq/stf"
        xmlns:xs="http://www.w3.org/2001/XMLSchema">
  <xs:element name="test">
    <xs:complexType>
      <xs:sequence>
        <xs:element name="name" type="xs:string"/>
        <xs:element name="description" type="xs:string"/>
        <xs:element name="version">
          <xs:complexType>
            <xs:attribute name="major" type="xs:nonNegativeInteger" use="required"/>
            <xs:attribute name="minor" type="xs:nonNegativeInteger" use="required"/>
          </xs:complexType>
        </xs:element>
        <xs:element name="inputParameter" type="ParameterDecl" minOccurs="0" maxOccurs="unbounded"/>
        <xs:element name="outputParameter" type="ParameterDecl" minOccurs="0" maxOccurs="unbounded"/>
      </xs:sequence>
    </xs:complexType>
  </xs:element>

  <xs:complexType name="ParameterDecl">
    <xs:sequence>
      <xs:element name="name" type="xs:string"/>
      <xs:element name="boolean" type="BooleanPayload" minOccurs="0"/>
      <xs:element name="string" type="StringPayload" minOccurs="0"/>
      <xs:element name="unsignedInt" type="UnsignedIntPayload" minOccurs="0"/>
      <xs:element name="unsignedLong" type="UnsignedLongPayload" minOccurs="0"/>
    </xs:sequence>
  </xs:complexType>

  <xs:complexType name="BooleanPayload">
    <xs:attribute name="default" type="xs:boolean"/>
  </xs:complexType>
  <xs:complexType name="StringPayload">
    <xs:attribute name="default" type="xs:string"/>
  </xs:complexType>
  <xs:complexType name="UnsignedIntPayload">
    <xs:attribute name="default" type="xs:unsignedInt"/>
    <xs:attribute name="minValue" type="xs:unsignedInt"/>
    <xs:attribute name="maxValue" type="xs:unsignedInt"/>
  </xs:complexType>
  <xs:complexType name="UnsignedLongPayload">
    <xs:attribute name="default" type="xs:unsignedLong"/>
    <xs:attribute name="minValue" type="xs:unsignedLong"/>
    <xs:attribute name="maxValue" type="xs:unsignedLong"/>
  </xs:complexType>
</xs:schema>
)SCHEMA";
    return text;
}

/// The signature-generating stylesheet, byte-identical to the checked-in
/// tests/fixtures/defn2Signature.xsl.
inline const std::string& signature_stylesheet_text() {
    static const std::string text = R"XSL(<?xml version="1.0" encoding="UTF-8"?>
<xsl:stylesheet version="1.0" xmlns:stf="http://glacier.lbl.gov/icecube/daq/stf"
        xmlns:xs="http://www.w3.org/2001/XMLSchema"
        xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
  <xsl:output indent="yes" method="text"/>
  <xsl:variable name="nl">
<xsl:text>
</xsl:text>
  </xsl:variable>
  <xsl:template match="/">
    <xsl:apply-templates select="stf:test"/>
  </xsl:template>
  <xsl:template match="stf:test">
  <xsl:variable name="testName" select="name"/>
extern BOOLEAN <xsl:copy-of select="$testName"/>Init(STF_DESCRIPTOR *);
extern BOOLEAN <xsl:copy-of select="$testName"/>Entry(STF_DESCRIPTOR *,
<xsl:apply-templates mode="Entry" select="inputParameter"/>
<xsl:apply-templates mode="Entry" select="outputParameter"/>
  </xsl:template>
  <xsl:template match="stf:test/*/*" mode="Entry">
    <xsl:text>                   </xsl:text>
    <xsl:apply-templates mode="signature" select="."/>
    <xsl:apply-templates mode="entryModifier" select="."/>
    <xsl:text> </xsl:text>
    <xsl:copy-of select="../name"/>
  </xsl:template>
  <xsl:template match="stf:test/*" mode="Entry">
    <xsl:apply-templates mode="Entry" select="boolean|string|unsignedInt|unsignedLong"/>
    <xsl:choose>
      <xsl:when test='((0=count(../outputParameter))or("outputParameter"=local-name()))
              and(last()=position())'>);</xsl:when>
      <xsl:otherwise>,</xsl:otherwise>
    </xsl:choose>
    <xsl:copy-of select="$nl"/>
  </xsl:template>
  <xsl:template match="stf:test/*/boolean" mode="signature">BOOLEAN</xsl:template>
  <xsl:template match="stf:test/inputParameter/string" mode="signature">const char*</xsl:template>
  <xsl:template match="stf:test/outputParameter/string" mode="signature">char*</xsl:template>
  <xsl:template match="stf:test/*/unsignedInt" mode="signature">unsigned int</xsl:template>
  <xsl:template match="stf:test/*/unsignedLong" mode="signature">unsigned long</xsl:template>
  <xsl:template match="stf:test/outputParameter/*" mode="entryModifier">* </xsl:template>
  <xsl:template match="stf:test/*/*" mode="EntryLocal">
    <xsl:text>                   </xsl:text>
    <xsl:apply-templates mode="entryLocalModifier" select="."/>
    <xsl:text>getParamByName(d, "</xsl:text>
    <xsl:copy-of select="../name"/><xsl:text>")->value.</xsl:text>
    <xsl:apply-templates mode="value" select="."/>
    <xsl:text>Value</xsl:text>
  </xsl:template>
  <xsl:template match="stf:test/*" mode="EntryLocal">
    <xsl:apply-templates mode="EntryLocal" select="boolean|string|unsignedInt|unsignedLong"/>
    <xsl:choose>
      <xsl:when test='((0=count(../outputParameter))or("outputParameter"=local-name()))
              and(last()=position())'>);</xsl:when>
      <xsl:otherwise>,</xsl:otherwise>
    </xsl:choose>
    <xsl:copy-of select="$nl"/>
  </xsl:template>
  <xsl:template match="stf:test/outputParameter/*" mode="entryLocalModifier">&amp;</xsl:template>
</xsl:stylesheet>
)XSL";
    return text;
}

namespace detail_stf {

inline const Schema& defn_schema() {
    static const Schema schema = load_schema(parse_tree(defn_schema_text()));
    return schema;
}

inline const Stylesheet& signature_stylesheet() {
    static const Stylesheet sheet = load_stylesheet(parse_tree(signature_stylesheet_text()));
    return sheet;
}

inline bool is_c_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    };
    if (!head(s[0])) return false;
    for (char c : s)
        if (!head(c) && !(c >= '0' && c <= '9')) return false;
    return true;
}

[[noreturn]] inline void defn_fail(const std::string& msg) { throw DefinitionError(msg); }

inline unsigned long long parse_bound(const std::string& raw, const std::string& what) {
    auto v = xmlkit::detail::parse_unsigned(xmlkit::detail::collapse_whitespace(raw));
    if (!v || v->huge) defn_fail(what + " \"" + raw + "\" is out of range");
    return v->value;
}

inline Parameter load_parameter(const XmlDocument& doc, NodeId node, bool is_output) {
    Parameter p;
    std::vector<NodeId> kids = doc.element_children(node);
    // schema guarantees: first child is <name>, at most one payload of each kind
    p.name = xmlkit::detail::collapse_whitespace(doc.string_value(kids.at(0)));
    std::vector<NodeId> payloads(kids.begin() + 1, kids.end());
    if (payloads.size() != 1)
        defn_fail("parameter \"" + p.name + "\" must declare exactly one type element");
    NodeId payload = payloads[0];
    const std::string& kind = doc.at(payload).name.local;
    if (kind == "boolean") p.kind = ParamKind::Boolean;
    else if (kind == "string") p.kind = ParamKind::String;
    else if (kind == "unsignedInt") p.kind = ParamKind::UnsignedInt;
    else p.kind = ParamKind::UnsignedLong;

    if (const std::string* v = doc.attribute(payload, QName("", "default"))) {
        if (is_output) defn_fail("output parameter \"" + p.name + "\" may not declare a default");
        p.default_value = p.kind == ParamKind::Boolean
                              ? xmlkit::detail::canonical_value(Builtin::Boolean, *v)
                              : *v;
    }
    if (const std::string* v = doc.attribute(payload, QName("", "minValue")))
        p.min_value = parse_bound(*v, "minValue");
    if (const std::string* v = doc.attribute(payload, QName("", "maxValue")))
        p.max_value = parse_bound(*v, "maxValue");

    if (!is_c_identifier(p.name)) defn_fail("parameter name \"" + p.name + "\" is not a C identifier");
    if (p.min_value && p.max_value && *p.min_value > *p.max_value)
        defn_fail("parameter \"" + p.name + "\" has minValue > maxValue");
    if (p.default_value &&
        (p.kind == ParamKind::UnsignedInt || p.kind == ParamKind::UnsignedLong)) {
        unsigned long long d = parse_bound(*p.default_value, "default");
        if (p.min_value && d < *p.min_value)
            defn_fail("parameter \"" + p.name + "\" default is below minValue");
        if (p.max_value && d > *p.max_value)
            defn_fail("parameter \"" + p.name + "\" default is above maxValue");
    }
    return p;
}

}  // namespace detail_stf

/// Validates a definition document against the built-in definition schema
/// and binds it; structural problems surface as DefinitionError (carrying
/// the validation report when one exists).
inline ModuleDefn load_defn(const XmlDocument& doc) {
    ValidationReport report = validate(detail_stf::defn_schema(), doc);
    if (!report.valid()) {
        std::string msg = "module definition is not valid";
        if (!report.violations.empty()) msg += ": " + report.violations.front().message;
        throw DefinitionError(msg, std::move(report));
    }

    ModuleDefn defn;
    NodeId root = doc.root();
    std::vector<NodeId> kids = doc.element_children(root);
    defn.name = xmlkit::detail::collapse_whitespace(doc.string_value(kids.at(0)));
    defn.description = xmlkit::detail::collapse_whitespace(doc.string_value(kids.at(1)));
    NodeId version = kids.at(2);
    defn.version_major =
        static_cast<int>(detail_stf::parse_bound(*doc.attribute(version, QName("", "major")), "major"));
    defn.version_minor =
        static_cast<int>(detail_stf::parse_bound(*doc.attribute(version, QName("", "minor")), "minor"));

    for (std::size_t i = 3; i < kids.size(); ++i) {
        bool is_output = doc.at(kids[i]).name.local == "outputParameter";
        Parameter p = detail_stf::load_parameter(doc, kids[i], is_output);
        (is_output ? defn.output_params : defn.input_params).push_back(std::move(p));
    }

    if (!detail_stf::is_c_identifier(defn.name))
        detail_stf::defn_fail("module name \"" + defn.name + "\" is not a C identifier");
    if (defn.input_params.empty() && defn.output_params.empty())
        detail_stf::defn_fail("module \"" + defn.name +
                              "\" declares no parameters; the Entry signature would be unterminated");
    std::vector<std::string> names;
    for (const Parameter& p : defn.input_params) names.push_back(p.name);
    for (const Parameter& p : defn.output_params) names.push_back(p.name);
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j)
            if (names[i] == names[j])
                detail_stf::defn_fail("duplicate parameter name \"" + names[i] + "\"");
    return defn;
}

/// Definition document shaped like the figures (stf:test root, per-parameter
/// payload elements); the inverse of load_defn up to whitespace.
inline XmlDocument defn_to_document(const ModuleDefn& defn) {
    XmlBuilder b;
    b.start_element(QName(std::string(kns_stf), "test", "stf"));
    b.attribute(QName(std::string(kns_xmlns), "stf", "xmlns"), std::string(kns_stf));
    b.start_element(QName("", "name")).text(defn.name).end_element();
    b.start_element(QName("", "description")).text(defn.description).end_element();
    b.start_element(QName("", "version"));
    b.attribute(QName("", "major"), std::to_string(defn.version_major));
    b.attribute(QName("", "minor"), std::to_string(defn.version_minor));
    b.end_element();
    auto emit_param = [&](const Parameter& p, bool output) {
        b.start_element(QName("", output ? "outputParameter" : "inputParameter"));
        b.start_element(QName("", "name")).text(p.name).end_element();
        b.start_element(QName("", std::string(param_kind_name(p.kind))));
        if (p.default_value) b.attribute(QName("", "default"), *p.default_value);
        if (p.min_value) b.attribute(QName("", "minValue"), std::to_string(*p.min_value));
        if (p.max_value) b.attribute(QName("", "maxValue"), std::to_string(*p.max_value));
        b.end_element();
        b.end_element();
    };
    for (const Parameter& p : defn.input_params) emit_param(p, false);
    for (const Parameter& p : defn.output_params) emit_param(p, true);
    b.end_element();
    return b.finish();
}

/// C header signatures for the module, produced by running the built-in
/// signature stylesheet over the definition document.
inline std::string gen_header(const ModuleDefn& defn) {
    return transform(detail_stf::signature_stylesheet(), defn_to_document(defn));
}

namespace detail_stf {

inline constexpr std::string_view kns_xmlschema = kns_xsd;

class SchemaDocBuilder {
public:
    SchemaDocBuilder() {
        b_.start_element(xs("schema"));
        b_.attribute(QName("", "targetNamespace"), std::string(kns_stf));
        b_.attribute(QName(std::string(kns_xmlns), "xs", "xmlns"), std::string(kns_xmlschema));
    }

    XmlDocument finish() {
        b_.end_element();
        return b_.finish();
    }

    XmlBuilder& raw() { return b_; }

    static QName xs(std::string_view local) {
        return QName(std::string(kns_xmlschema), std::string(local), "xs");
    }

    void element_open(const std::string& name) {
        b_.start_element(xs("element"));
        b_.attribute(QName("", "name"), name);
    }

    void complex_sequence_open() {
        b_.start_element(xs("complexType"));
        b_.start_element(xs("sequence"));
    }

    void complex_sequence_close() {
        b_.end_element();  // sequence
        b_.end_element();  // complexType
    }

    // <xs:element name=.../> for one parameter, with bounds as facets and an
    // optional default.
    void parameter_element(const Parameter& p, bool with_default) {
        element_open(p.name);
        bool defaulted = with_default && p.default_value.has_value();
        if (defaulted) {
            b_.attribute(QName("", "default"), *p.default_value);
            b_.attribute(QName("", "minOccurs"), "0");
        }
        bool bounded = p.min_value || p.max_value;
        if (!bounded) {
            b_.attribute(QName("", "type"), builtin_ref(p.kind));
            b_.end_element();
            return;
        }
        b_.start_element(xs("simpleType"));
        b_.start_element(xs("restriction"));
        b_.attribute(QName("", "base"), builtin_ref(p.kind));
        if (p.min_value) {
            b_.start_element(xs("minInclusive"));
            b_.attribute(QName("", "value"), std::to_string(*p.min_value));
            b_.end_element();
        }
        if (p.max_value) {
            b_.start_element(xs("maxInclusive"));
            b_.attribute(QName("", "value"), std::to_string(*p.max_value));
            b_.end_element();
        }
        b_.end_element();  // restriction
        b_.end_element();  // simpleType
        b_.end_element();  // element
    }

    void simple_element(const std::string& name, const char* type) {
        element_open(name);
        b_.attribute(QName("", "type"), type);
        b_.end_element();
    }

    static std::string builtin_ref(ParamKind k) {
        switch (k) {
            case ParamKind::Boolean: return "xs:boolean";
            case ParamKind::String: return "xs:string";
            case ParamKind::UnsignedInt: return "xs:unsignedInt";
            case ParamKind::UnsignedLong: return "xs:unsignedLong";
        }
        return "xs:string";
    }

private:
    XmlBuilder b_;
};

}  // namespace detail_stf

/// Schema for setup documents: stf:setup / <module name> / parameters with
/// one element per input parameter; bounds map to minInclusive/maxInclusive
/// and defaulted parameters are optional.
inline XmlDocument gen_setup_schema(const ModuleDefn& defn) {
    detail_stf::SchemaDocBuilder sb;
    sb.element_open("setup");
    sb.complex_sequence_open();
    sb.element_open(defn.name);
    sb.complex_sequence_open();
    sb.element_open("parameters");
    sb.complex_sequence_open();
    for (const Parameter& p : defn.input_params) sb.parameter_element(p, true);
    sb.complex_sequence_close();
    sb.raw().end_element();  // parameters
    sb.complex_sequence_close();
    sb.raw().end_element();  // module element
    sb.complex_sequence_close();
    sb.raw().end_element();  // setup
    return sb.finish();
}

/// Schema for result documents: stf:result / <module name> / description,
/// version, parameters holding echoed inputs, declared outputs, then the
/// standard trailer (passed, testRunnable, boardID).
inline XmlDocument gen_result_schema(const ModuleDefn& defn) {
    detail_stf::SchemaDocBuilder sb;
    sb.element_open("result");
    sb.complex_sequence_open();
    sb.element_open(defn.name);
    sb.complex_sequence_open();
    sb.simple_element("description", "xs:string");
    sb.element_open("version");
    sb.raw().start_element(detail_stf::SchemaDocBuilder::xs("complexType"));
    for (const char* attr : {"major", "minor"}) {
        sb.raw().start_element(detail_stf::SchemaDocBuilder::xs("attribute"));
        sb.raw().attribute(QName("", "name"), attr);
        sb.raw().attribute(QName("", "type"), "xs:nonNegativeInteger");
        sb.raw().attribute(QName("", "use"), "required");
        sb.raw().end_element();
    }
    sb.raw().end_element();  // complexType
    sb.raw().end_element();  // version element
    sb.element_open("parameters");
    sb.complex_sequence_open();
    for (const Parameter& p : defn.input_params) sb.parameter_element(p, false);
    for (const Parameter& p : defn.output_params) sb.parameter_element(p, false);
    sb.simple_element("passed", "xs:boolean");
    sb.simple_element("testRunnable", "xs:boolean");
    sb.simple_element("boardID", "xs:string");
    sb.complex_sequence_close();
    sb.raw().end_element();  // parameters
    sb.complex_sequence_close();
    sb.raw().end_element();  // module element
    sb.complex_sequence_close();
    sb.raw().end_element();  // result
    return sb.finish();
}

/// validate(gen_setup_schema(defn), doc).
inline ValidationReport check_setup(const ModuleDefn& defn, const XmlDocument& doc) {
    Schema schema = load_schema(gen_setup_schema(defn));
    return validate(schema, doc);
}

/// validate(gen_result_schema(defn), doc).
inline ValidationReport check_result(const ModuleDefn& defn, const XmlDocument& doc) {
    Schema schema = load_schema(gen_result_schema(defn));
    return validate(schema, doc);
}

/// Input parameters of a valid setup document with defaults filled in, in
/// declaration order.
inline std::vector<std::pair<std::string, std::string>> effective_setup_params(
    const ModuleDefn& defn, const XmlDocument& doc) {
    std::vector<std::pair<std::string, std::string>> out;
    NodeId root = doc.root();
    std::vector<NodeId> module = doc.element_children(root);
    if (module.empty()) return out;
    NodeId params = knode_none;
    for (NodeId c : doc.element_children(module[0]))
        if (doc.at(c).name.local == "parameters") params = c;
    for (const Parameter& p : defn.input_params) {
        std::optional<std::string> value;
        if (params != knode_none)
            for (NodeId c : doc.element_children(params))
                if (doc.at(c).name.ns.empty() && doc.at(c).name.local == p.name)
                    value = doc.string_value(c);
        if (!value && p.default_value) value = p.default_value;
        if (value) out.emplace_back(p.name, *value);
    }
    return out;
}

}  // namespace xmlkit::stf
