// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "xmlkit/databind.hpp"
#include "xmlkit/parse.hpp"

using namespace xmlkit;
using testsupport::fixture;
using testsupport::parse_fixture;
using testsupport::replace_once;

namespace {

BindingModel atwd_model() {
    return derive_bindings(load_schema(parse_fixture("atwdExample.xsd")));
}

}  // namespace

TEST_CASE("the readout schema derives three records") {
    BindingModel model = atwd_model();
    CHECK(model.records().size() == 3);

    const RecordDesc* readout = model.record("AtwdReadout");
    REQUIRE(readout);
    REQUIRE(readout->fields.size() == 1);
    CHECK(readout->fields[0].name == "atwd");
    CHECK(readout->fields[0].kind == FieldKind::RecordList);
    CHECK(readout->fields[0].record == "Atwd");

    const RecordDesc* atwd = model.record("Atwd");
    REQUIRE(atwd);
    REQUIRE(atwd->fields.size() == 1);
    CHECK(atwd->fields[0].name == "channel");
    CHECK(atwd->fields[0].kind == FieldKind::RecordList);

    const RecordDesc* channel = model.record("Channel");
    REQUIRE(channel);
    REQUIRE(channel->fields.size() == 3);
    CHECK(channel->fields[0].name == "value");
    CHECK(channel->fields[0].kind == FieldKind::ScalarList);
    CHECK(channel->fields[0].scalar == Builtin::UnsignedShort);
    CHECK(channel->fields[1].name == "number");
    CHECK(channel->fields[1].is_attribute);
    CHECK(channel->fields[1].scalar == Builtin::NonNegativeInteger);
    CHECK(channel->fields[2].name == "bitsPerSample");
    CHECK(channel->fields[2].default_value == std::optional<std::string>("16"));
}

TEST_CASE("a single string element derives one scalar record") {
    Schema s = load_schema(parse_tree(
        "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">"
        "<xs:element name=\"note\" type=\"xs:string\"/></xs:schema>"));
    BindingModel model = derive_bindings(s);
    REQUIRE(model.records().size() == 1);
    const RecordDesc& rec = model.records()[0];
    CHECK(rec.name == "note");
    REQUIRE(rec.fields.size() == 1);
    CHECK(rec.fields[0].name == "value");
    CHECK(rec.fields[0].kind == FieldKind::Scalar);

    TypedValue v = unmarshal(model, parse_tree("<note>hello</note>"));
    CHECK(v.field("value")->scalars[0].as_string() == "hello");
}

TEST_CASE("unmarshal reproduces the demo readout") {
    BindingModel model = atwd_model();
    TypedValue readout = unmarshal(model, parse_fixture("atwdExampleCorrected.xml"));

    const FieldValue* atwds = readout.field("atwd");
    REQUIRE(atwds);
    REQUIRE(atwds->records.size() == 1);

    // the quantity the demo prints: channels in the first ATWD
    const FieldValue* channels = atwds->records[0].field("channel");
    REQUIRE(channels);
    CHECK(channels->records.size() == 2);

    const TypedValue& ch0 = channels->records[0];
    const FieldValue* samples = ch0.field("value");
    REQUIRE(samples);
    REQUIRE(samples->scalars.size() == 48);
    CHECK(samples->scalars[37].as_uint() == 188);

    // channel originally numbered 2 has no bitsPerSample: default applies
    const TypedValue& ch1 = channels->records[1];
    REQUIRE(ch1.field("bitsPerSample"));
    CHECK(ch1.field("bitsPerSample")->scalars[0].as_uint() == 16);
    CHECK(ch0.field("bitsPerSample")->scalars[0].as_uint() == 8);
}

TEST_CASE("unmarshal refuses invalid documents, listing the violations") {
    BindingModel model = atwd_model();
    try {
        unmarshal(model, parse_fixture("atwdExample.xml"));  // number="2" breaks maxExclusive
        FAIL("expected BindingError");
    } catch (const BindingError& e) {
        REQUIRE(e.report.violations.size() == 1);
        CHECK(e.report.violations[0].kind == "maxExclusive");
    }
}

TEST_CASE("marshal round-trips typed values") {
    BindingModel model = atwd_model();
    TypedValue v = unmarshal(model, parse_fixture("atwdExampleCorrected.xml"));
    XmlDocument doc = marshal(model, v);
    CHECK(validate(model.schema(), doc).valid());
    CHECK(unmarshal(model, doc) == v);
}

TEST_CASE("marshal validates: 47 samples raise the length facet") {
    BindingModel model = atwd_model();
    TypedValue v = unmarshal(model, parse_fixture("atwdExampleCorrected.xml"));
    TypedValue broken = v;
    FieldValue* samples = nullptr;
    for (FieldValue& f : broken.fields)
        if (f.name == "atwd")
            for (FieldValue& g : f.records[0].fields)
                if (g.name == "channel")
                    for (FieldValue& h : g.records[0].fields)
                        if (h.name == "value") samples = &h;
    REQUIRE(samples);
    samples->scalars.pop_back();
    try {
        marshal(model, broken);
        FAIL("expected BindingError");
    } catch (const BindingError& e) {
        REQUIRE_FALSE(e.report.violations.empty());
        CHECK(e.report.violations[0].kind == "length");
    }
}

TEST_CASE("field descriptor violations raise BindingError") {
    BindingModel model = atwd_model();
    TypedValue v = unmarshal(model, parse_fixture("atwdExampleCorrected.xml"));

    SECTION("unknown field") {
        TypedValue broken = v;
        broken.add("bogus", FieldKind::Scalar).scalars.push_back({Builtin::String, "x"});
        CHECK_THROWS_AS(marshal(model, broken), BindingError);
    }
    SECTION("wrong kind") {
        TypedValue broken = v;
        for (FieldValue& f : broken.fields)
            if (f.name == "atwd") f.kind = FieldKind::Record;
        CHECK_THROWS_AS(marshal(model, broken), BindingError);
    }
    SECTION("wrong scalar kind") {
        TypedValue broken = v;
        for (FieldValue& f : broken.fields)
            if (f.name == "atwd")
                for (FieldValue& g : f.records[0].fields)
                    if (g.name == "channel")
                        for (FieldValue& h : g.records[0].fields)
                            if (h.name == "number") h.scalars[0].kind = Builtin::String;
        CHECK_THROWS_AS(marshal(model, broken), BindingError);
    }
}

TEST_CASE("written defaults and absent defaults bind identically") {
    BindingModel model = atwd_model();
    std::string implicit_text = fixture("atwdExampleCorrected.xml");
    std::string explicit_text = replace_once(implicit_text, "<Channel number=\"1\">",
                                             "<Channel number=\"1\" bitsPerSample=\"16\">");
    TypedValue implicit_v = unmarshal(model, parse_tree(implicit_text));
    TypedValue explicit_v = unmarshal(model, parse_tree(explicit_text));
    CHECK(implicit_v == explicit_v);

    // and marshalling the model value then re-reading it keeps the default
    TypedValue back = unmarshal(model, marshal(model, implicit_v));
    CHECK(back == implicit_v);
}

TEST_CASE("unmarshal validates against the originating schema exactly") {
    BindingModel model = atwd_model();
    for (const char* name : {"atwdExample.xml", "atwdExampleCorrected.xml"}) {
        XmlDocument doc = parse_fixture(name);
        bool validates = validate(model.schema(), doc).valid();
        bool binds = true;
        try {
            unmarshal(model, doc);
        } catch (const BindingError&) {
            binds = false;
        }
        INFO(name);
        CHECK(validates == binds);
    }
}
