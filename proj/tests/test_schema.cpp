// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "xmlkit/parse.hpp"
#include "xmlkit/schema.hpp"

using namespace xmlkit;
using testsupport::fixture;
using testsupport::parse_fixture;
using testsupport::replace_once;

namespace {

Schema atwd_schema() { return load_schema(parse_fixture("atwdExample.xsd")); }

ValidationReport validate_text(const Schema& s, const std::string& text) {
    return validate(s, parse_tree(text));
}

}  // namespace

TEST_CASE("the readout schema compiles to the expected components") {
    Schema s = atwd_schema();
    CHECK(s.target_namespace == "http://glacier.lbl.gov/icecube/daq/example");
    REQUIRE(s.globals().size() == 1);
    CHECK(s.globals()[0].name == "AtwdReadout");
    CHECK(s.named_type_count() == 3);

    // AtwdReadout -> sequence of Atwd (unbounded), which carries the unique
    const TypeDef& root_type = s.type(s.global("AtwdReadout")->type);
    REQUIRE(root_type.kind == TypeDef::Kind::Complex);
    REQUIRE(root_type.particles.size() == 1);
    const ElementDecl& atwd = root_type.particles[0];
    CHECK(atwd.name == "Atwd");
    CHECK_FALSE(atwd.max_occurs.has_value());
    REQUIRE(atwd.uniques.size() == 1);
    CHECK(atwd.uniques[0].name == "RequireAllChannels");
    CHECK(atwd.uniques[0].selector.to_string() == "Channel");
    CHECK(atwd.uniques[0].field.to_string() == "@number");

    // Channel: min/max 2, simpleContent over the 48-sample list
    const TypeDef& atwd_type = s.type(atwd.type);
    REQUIRE(atwd_type.particles.size() == 1);
    const ElementDecl& channel = atwd_type.particles[0];
    CHECK(channel.min_occurs == 2);
    CHECK(channel.max_occurs == std::optional<int>(2));
    const TypeDef& channel_type = s.type(channel.type);
    REQUIRE(channel_type.kind == TypeDef::Kind::Complex);
    CHECK(channel_type.name == "AtwdChannel");
    CHECK(channel_type.simple_content_base >= 0);
    CHECK(s.is_list(channel_type.simple_content_base));
    CHECK(s.primitive_of(channel_type.simple_content_base) == Builtin::UnsignedShort);
    REQUIRE(channel_type.attributes.size() == 2);
    CHECK(channel_type.attributes[0].name == "number");
    CHECK(channel_type.attributes[1].name == "bitsPerSample");
    CHECK(channel_type.attributes[1].default_value == std::optional<std::string>("16"));
}

TEST_CASE("smallest possible schema") {
    Schema s = load_schema(parse_tree(
        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
        "<xs:element name=\"e\" type=\"xs:string\"/></xs:schema>"));
    REQUIRE(s.globals().size() == 1);
    CHECK(s.primitive_of(s.globals()[0].type) == Builtin::String);
    CHECK(validate(s, parse_tree("<e>anything</e>")).valid());
}

TEST_CASE("facet applicability is checked at load time") {
    // length on an atomic base
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\"><xs:simpleType>"
                        "<xs:restriction base=\"xs:string\"><xs:length value=\"3\"/>"
                        "</xs:restriction></xs:simpleType></xs:element></xs:schema>")),
                    SchemaError);
    // maxExclusive on a list
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\"><xs:simpleType><xs:restriction>"
                        "<xs:simpleType><xs:list itemType=\"xs:unsignedShort\"/></xs:simpleType>"
                        "</xs:restriction></xs:simpleType></xs:element></xs:schema>")),
                    SchemaError);
    // maxExclusive on a string
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\"><xs:simpleType>"
                        "<xs:restriction base=\"xs:string\"><xs:maxExclusive value=\"3\"/>"
                        "</xs:restriction></xs:simpleType></xs:element></xs:schema>")),
                    SchemaError);
}

TEST_CASE("unsupported constructs and unresolved types fail loud") {
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\"><xs:complexType><xs:choice/>"
                        "</xs:complexType></xs:element></xs:schema>")),
                    UnsupportedConstructError);
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\" type=\"Missing\"/></xs:schema>")),
                    UnresolvedTypeError);
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\" type=\"xs:dateTime\"/></xs:schema>")),
                    UnsupportedConstructError);
    // unknown attributes on schema constructs are not silently ignored
    CHECK_THROWS_AS(load_schema(parse_tree(
                        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
                        "<xs:element name=\"e\" type=\"xs:string\" substitutionGroup=\"g\"/>"
                        "</xs:schema>")),
                    UnsupportedConstructError);
}

TEST_CASE("verbatim figure pair: exactly one violation") {
    Schema s = atwd_schema();
    ValidationReport report = validate(s, parse_fixture("atwdExample.xml"));
    REQUIRE(report.violations.size() == 1);
    const Violation& v = report.violations[0];
    CHECK(v.kind == "maxExclusive");
    CHECK(v.path == "/AtwdReadout/Atwd/Channel[2]/@number");
    CHECK(v.message.find("2") != std::string::npos);
}

TEST_CASE("corrected figure pair: valid") {
    Schema s = atwd_schema();
    CHECK(validate(s, parse_fixture("atwdExampleCorrected.xml")).valid());
}

TEST_CASE("single-field mutations each produce a violation naming the spot") {
    Schema s = atwd_schema();
    std::string good = fixture("atwdExampleCorrected.xml");

    SECTION("one sample deleted: 47 is not 48") {
        std::string text = replace_once(good, "      84 188 0 0 0 0 0 0 0 0 0 0\n",
                                        "      84 188 0 0 0 0 0 0 0 0 0\n");
        ValidationReport r = validate_text(s, text);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "length");
        CHECK(r.violations[0].path == "/AtwdReadout/Atwd/Channel[1]");
        CHECK(r.violations[0].message.find("47") != std::string::npos);
    }
    SECTION("duplicate channel numbers violate the unique constraint") {
        std::string text = replace_once(good, "number=\"1\"", "number=\"0\"");
        ValidationReport r = validate_text(s, text);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "unique");
        CHECK(r.violations[0].path == "/AtwdReadout/Atwd/Channel[2]/@number");
        CHECK(r.violations[0].message.find("RequireAllChannels") != std::string::npos);
    }
    SECTION("bitsPerSample outside the enumeration") {
        std::string text = replace_once(good, "bitsPerSample=\"8\"", "bitsPerSample=\"12\"");
        ValidationReport r = validate_text(s, text);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "enumeration");
        CHECK(r.violations[0].path == "/AtwdReadout/Atwd/Channel[1]/@bitsPerSample");
        CHECK(r.violations[0].message.find("8") != std::string::npos);
        CHECK(r.violations[0].message.find("16") != std::string::npos);
    }
    SECTION("three channels exceed maxOccurs") {
        std::string third = "    <Channel number=\"0\">\n";
        third +=
            "      0 0 0 0 0 0 0 0 0 0 0 0\n      0 0 0 0 0 0 0 0 0 0 0 0\n"
            "      0 0 0 0 0 0 0 0 0 0 0 0\n      0 0 0 0 0 0 0 0 0 0 0 0\n";
        third += "    </Channel>\n";
        std::string text = replace_once(good, "   </Atwd>", third + "   </Atwd>");
        ValidationReport r = validate_text(s, text);
        REQUIRE_FALSE(r.violations.empty());
        bool occurs = false;
        for (const Violation& v : r.violations)
            occurs = occurs || (v.kind == "element" && v.path == "/AtwdReadout/Atwd/Channel[3]");
        CHECK(occurs);
    }
    SECTION("one channel misses minOccurs") {
        std::size_t start = good.find("    <Channel number=\"1\">");
        std::size_t stop = good.find("</Channel>", start);
        REQUIRE(start != std::string::npos);
        std::string text = good;
        text.erase(start, stop + std::string("</Channel>\n").size() - start);
        ValidationReport r = validate_text(s, text);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "element");
        CHECK(r.violations[0].path == "/AtwdReadout/Atwd/Channel");
        CHECK(r.violations[0].message.find("2") != std::string::npos);
    }
}

TEST_CASE("defaults are applied to absent attributes only") {
    Schema s = atwd_schema();
    XmlDocument doc = parse_fixture("atwdExample.xml");
    XmlDocument with_defaults = apply_defaults(s, doc);

    NodeId atwd = with_defaults.element_children(with_defaults.root())[0];
    auto channels = with_defaults.element_children(atwd);
    REQUIRE(channels.size() == 2);
    // first channel wrote bitsPerSample="8" and keeps it
    CHECK(*with_defaults.attribute(channels[0], QName("", "bitsPerSample")) == "8");
    // second channel had none and gains the default
    CHECK(*with_defaults.attribute(channels[1], QName("", "bitsPerSample")) == "16");
    // the original document is untouched
    auto orig_channels = doc.element_children(doc.element_children(doc.root())[0]);
    CHECK(doc.attribute(orig_channels[1], QName("", "bitsPerSample")) == nullptr);

    SECTION("elements with no declared attributes pass through unchanged") {
        Schema plain = load_schema(parse_tree(
            "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
            "<xs:element name=\"e\" type=\"xs:string\"/></xs:schema>"));
        XmlDocument d = parse_tree("<e>text</e>");
        CHECK(structurally_equal(apply_defaults(plain, d), d));
    }
}

TEST_CASE("defaults never change the violation set on the corpus") {
    Schema s = atwd_schema();
    for (const char* name : {"atwdExample.xml", "atwdExampleCorrected.xml"}) {
        XmlDocument doc = parse_fixture(name);
        ValidationReport before = validate(s, doc);
        ValidationReport after = validate(s, apply_defaults(s, doc));
        REQUIRE(before.violations.size() == after.violations.size());
        for (std::size_t i = 0; i < before.violations.size(); ++i) {
            CHECK(before.violations[i].kind == after.violations[i].kind);
            CHECK(before.violations[i].path == after.violations[i].path);
        }
    }
}

TEST_CASE("built-in boundary values") {
    Schema s = load_schema(parse_tree(
        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
        "<xs:element name=\"v\" type=\"xs:unsignedShort\"/></xs:schema>"));
    auto ok = [&](const std::string& value) {
        return validate(s, parse_tree("<v>" + value + "</v>")).valid();
    };
    CHECK(ok("0"));
    CHECK(ok("65535"));
    CHECK(ok(" 65535 "));  // collapse before the lexical check
    CHECK_FALSE(ok("-1"));
    CHECK_FALSE(ok("65536"));
    CHECK_FALSE(ok("12.5"));
    CHECK_FALSE(ok("abc"));
    CHECK_FALSE(ok(""));

    Schema b = load_schema(parse_tree(
        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
        "<xs:element name=\"v\" type=\"xs:boolean\"/></xs:schema>"));
    for (const char* good : {"true", "false", "0", "1"})
        CHECK(validate(b, parse_tree(std::string("<v>") + good + "</v>")).valid());
    CHECK_FALSE(validate(b, parse_tree("<v>maybe</v>")).valid());

    Schema ul = load_schema(parse_tree(
        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
        "<xs:element name=\"v\" type=\"xs:unsignedLong\"/></xs:schema>"));
    CHECK(validate(ul, parse_tree("<v>18446744073709551615</v>")).valid());
    CHECK_FALSE(validate(ul, parse_tree("<v>18446744073709551616</v>")).valid());
}

TEST_CASE("root mismatch is a single violation") {
    Schema s = atwd_schema();
    ValidationReport r = validate(s, parse_tree("<Wrong/>"));
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == "root");

    // right local name, wrong namespace
    ValidationReport r2 = validate(s, parse_tree("<AtwdReadout/>"));
    REQUIRE(r2.violations.size() == 1);
    CHECK(r2.violations[0].kind == "root");
}

TEST_CASE("all violations are reported, in document order") {
    Schema s = atwd_schema();
    std::string text = fixture("atwdExampleCorrected.xml");
    text = replace_once(text, "bitsPerSample=\"8\"", "bitsPerSample=\"12\"");
    text = replace_once(text, "number=\"1\"", "number=\"9\"");
    ValidationReport r = validate_text(s, text);
    REQUIRE(r.violations.size() == 2);
    CHECK(r.violations[0].kind == "enumeration");
    CHECK(r.violations[1].kind == "maxExclusive");
    CHECK(r.violations[0].path < r.violations[1].path);
}

TEST_CASE("xsi attributes are ignored during validation") {
    // the verbatim figure carries xsi:schemaLocation; already covered, but
    // make the rule explicit for an arbitrary xsi attribute
    Schema s = load_schema(parse_tree(
        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
        "<xs:element name=\"e\" type=\"xs:string\"/></xs:schema>"));
    XmlDocument doc = parse_tree(
        "<e xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
        "xsi:type=\"whatever\">ok</e>");
    CHECK(validate(s, doc).valid());
}

TEST_CASE("undeclared attributes and stray text are violations") {
    Schema s = atwd_schema();
    std::string good = fixture("atwdExampleCorrected.xml");

    std::string with_attr = replace_once(good, "<Atwd>", "<Atwd extra=\"1\">");
    ValidationReport r1 = validate_text(s, with_attr);
    REQUIRE(r1.violations.size() == 1);
    CHECK(r1.violations[0].kind == "attribute");

    std::string with_text = replace_once(good, "<Atwd>", "<Atwd>stray");
    ValidationReport r2 = validate_text(s, with_text);
    REQUIRE(r2.violations.size() == 1);
    CHECK(r2.violations[0].kind == "text");
}
