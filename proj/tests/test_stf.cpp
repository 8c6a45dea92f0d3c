// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "xmlkit/parse.hpp"
#include "xmlkit/serialize.hpp"
#include "xmlkit/stf.hpp"

using namespace xmlkit;
using namespace xmlkit::stf;
using testsupport::fixture;
using testsupport::parse_fixture;
using testsupport::replace_once;

namespace {

ModuleDefn example_defn() { return load_defn(parse_fixture("exampleOne.xml")); }

std::string defn_text(const std::string& params) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>"
           "<stf:test xmlns:stf=\"http://glacier.lbl.gov/icecube/daq/stf\">"
           "<name>Sample</name><description>d</description>"
           "<version major=\"1\" minor=\"0\"/>" + params + "</stf:test>";
}

}  // namespace

TEST_CASE("the example definition loads with its declared shape") {
    ModuleDefn defn = example_defn();
    CHECK(defn.name == "ExampleOne");
    CHECK(defn.version_major == 1);
    CHECK(defn.version_minor == 0);
    REQUIRE(defn.input_params.size() == 2);
    REQUIRE(defn.output_params.size() == 2);

    CHECK(defn.input_params[0].name == "fruit");
    CHECK(defn.input_params[0].kind == ParamKind::String);
    CHECK(defn.input_params[0].default_value == std::optional<std::string>("bananas"));

    CHECK(defn.input_params[1].name == "quantity");
    CHECK(defn.input_params[1].kind == ParamKind::UnsignedInt);
    CHECK(defn.input_params[1].default_value == std::optional<std::string>("1"));
    CHECK(defn.input_params[1].min_value == std::optional<unsigned long long>(0));
    CHECK(defn.input_params[1].max_value == std::optional<unsigned long long>(100));

    CHECK(defn.output_params[0].name == "fufilled");
    CHECK(defn.output_params[0].kind == ParamKind::Boolean);
    CHECK(defn.output_params[1].name == "numberRemaining");
    CHECK(defn.output_params[1].kind == ParamKind::UnsignedInt);
}

TEST_CASE("definition-level invariants are enforced") {
    SECTION("duplicate parameter names") {
        std::string text = defn_text(
            "<inputParameter><name>x</name><string/></inputParameter>"
            "<outputParameter><name>x</name><boolean/></outputParameter>");
        CHECK_THROWS_AS(load_defn(parse_tree(text)), DefinitionError);
    }
    SECTION("default outside the declared bounds") {
        std::string text = defn_text(
            "<inputParameter><name>q</name>"
            "<unsignedInt default=\"150\" maxValue=\"100\" minValue=\"0\"/></inputParameter>");
        CHECK_THROWS_AS(load_defn(parse_tree(text)), DefinitionError);
    }
    SECTION("minValue above maxValue") {
        std::string text = defn_text(
            "<inputParameter><name>q</name>"
            "<unsignedInt maxValue=\"1\" minValue=\"5\"/></inputParameter>");
        CHECK_THROWS_AS(load_defn(parse_tree(text)), DefinitionError);
    }
    SECTION("module and parameter names must be C identifiers") {
        CHECK_THROWS_AS(load_defn(parse_tree(replace_once(
                            defn_text("<inputParameter><name>ok</name><string/></inputParameter>"),
                            "<name>Sample</name>", "<name>Not a name</name>"))),
                        DefinitionError);
        CHECK_THROWS_AS(load_defn(parse_tree(defn_text(
                            "<inputParameter><name>2bad</name><string/></inputParameter>"))),
                        DefinitionError);
    }
    SECTION("exactly one payload element per parameter") {
        CHECK_THROWS_AS(load_defn(parse_tree(defn_text(
                            "<inputParameter><name>x</name></inputParameter>"))),
                        DefinitionError);
        CHECK_THROWS_AS(load_defn(parse_tree(defn_text(
                            "<inputParameter><name>x</name><string/><boolean/>"
                            "</inputParameter>"))),
                        DefinitionError);
    }
    SECTION("outputs may not carry defaults") {
        CHECK_THROWS_AS(load_defn(parse_tree(defn_text(
                            "<outputParameter><name>x</name><boolean default=\"true\"/>"
                            "</outputParameter>"))),
                        DefinitionError);
    }
    SECTION("at least one parameter is required") {
        CHECK_THROWS_AS(load_defn(parse_tree(defn_text(""))), DefinitionError);
    }
    SECTION("malformed structure carries the validation report") {
        try {
            load_defn(parse_tree(defn_text("<bogus/>")));
            FAIL("expected DefinitionError");
        } catch (const DefinitionError& e) {
            CHECK_FALSE(e.report.violations.empty());
        }
    }
}

TEST_CASE("gen_header is byte-identical to the golden signatures") {
    CHECK(gen_header(example_defn()) == fixture("exampleOneSignature.h"));
}

TEST_CASE("gen_header on derived shapes follows the stylesheet trace") {
    SECTION("zero inputs, one boolean output") {
        ModuleDefn defn;
        defn.name = "Probe";
        defn.description = "d";
        defn.version_major = 1;
        Parameter flag;
        flag.name = "flag";
        flag.kind = ParamKind::Boolean;
        defn.output_params.push_back(flag);
        std::string expected =
            "\nextern BOOLEAN ProbeInit(STF_DESCRIPTOR *);\n"
            "extern BOOLEAN ProbeEntry(STF_DESCRIPTOR *,\n"
            "                   BOOLEAN*  flag);\n";
        CHECK(gen_header(defn) == expected);
    }
    SECTION("no parameters at all leaves the argument list unterminated") {
        // load_defn rejects this shape; generating from a hand-built value
        // shows why: the stylesheet never closes the parenthesis.
        ModuleDefn defn;
        defn.name = "Empty";
        defn.description = "d";
        std::string out = gen_header(defn);
        CHECK(out ==
              "\nextern BOOLEAN EmptyInit(STF_DESCRIPTOR *);\n"
              "extern BOOLEAN EmptyEntry(STF_DESCRIPTOR *,\n");
    }
    SECTION("unsignedLong and output string map to their C forms") {
        ModuleDefn defn;
        defn.name = "Wide";
        defn.description = "d";
        Parameter ticks{"ticks", ParamKind::UnsignedLong, {}, {}, {}};
        Parameter label{"label", ParamKind::String, {}, {}, {}};
        defn.input_params.push_back(ticks);
        defn.output_params.push_back(label);
        // the output modifier rule stacks a second '*' onto the char* that
        // the signature rule already emits
        std::string expected =
            "\nextern BOOLEAN WideInit(STF_DESCRIPTOR *);\n"
            "extern BOOLEAN WideEntry(STF_DESCRIPTOR *,\n"
            "                   unsigned long ticks,\n"
            "                   char**  label);\n";
        CHECK(gen_header(defn) == expected);
    }
}

TEST_CASE("parameter order in signatures equals declaration order") {
    ModuleDefn defn = example_defn();
    std::string out = gen_header(defn);
    CHECK(out.find("fruit") < out.find("quantity"));
    CHECK(out.find("quantity") < out.find("fufilled"));
    CHECK(out.find("fufilled") < out.find("numberRemaining"));
}

TEST_CASE("generated setup schema accepts and bounds the setup figure") {
    ModuleDefn defn = example_defn();
    XmlDocument schema_doc = gen_setup_schema(defn);
    Schema schema = load_schema(schema_doc);  // generated schemas load cleanly
    CHECK(schema.target_namespace == kns_stf);

    std::string setup = fixture("exampleOneSetup.xml");
    CHECK(validate(schema, parse_tree(setup)).valid());

    SECTION("quantity above the maximum") {
        ValidationReport r =
            validate(schema, parse_tree(replace_once(setup, ">54<", ">101<")));
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "maxInclusive");
        CHECK(r.violations[0].path.find("quantity") != std::string::npos);
    }
    SECTION("quantity below zero") {
        ValidationReport r =
            validate(schema, parse_tree(replace_once(setup, ">54<", ">-1<")));
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "lexical");
        CHECK(r.violations[0].path.find("quantity") != std::string::npos);
    }
    SECTION("the schema document itself round-trips through serialization") {
        Schema again = load_schema(parse_tree(serialize(schema_doc)));
        CHECK(validate(again, parse_tree(setup)).valid());
    }
}

TEST_CASE("generated result schema matches the corrected result figure") {
    ModuleDefn defn = example_defn();
    Schema schema = load_schema(gen_result_schema(defn));
    std::string good = fixture("exampleOneResultsCorrected.xml");
    CHECK(validate(schema, parse_tree(good)).valid());

    SECTION("removing the passed trailer is a violation") {
        std::string text = replace_once(good, "     <passed>true</passed>\n", "");
        ValidationReport r = validate(schema, parse_tree(text));
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "element");
        CHECK(r.violations[0].path.find("passed") != std::string::npos);
    }
    SECTION("a non-boolean fufilled is a lexical violation") {
        std::string text = replace_once(good, ">true</fufilled>", ">maybe</fufilled>");
        ValidationReport r = validate(schema, parse_tree(text));
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "lexical");
        CHECK(r.violations[0].path.find("fufilled") != std::string::npos);
    }
}

TEST_CASE("check_setup and check_result wrap the generated schemas") {
    ModuleDefn defn = example_defn();

    CHECK(check_setup(defn, parse_fixture("exampleOneSetup.xml")).valid());
    CHECK(check_result(defn, parse_fixture("exampleOneResultsCorrected.xml")).valid());

    SECTION("renamed parameter element") {
        std::string text = fixture("exampleOneSetup.xml");
        text = replace_once(text, "<fruit>oranges</fruit>", "<fruits>oranges</fruits>");
        ValidationReport r = check_setup(defn, parse_tree(text));
        REQUIRE_FALSE(r.valid());
        bool unexpected = false;
        for (const Violation& v : r.violations)
            unexpected = unexpected || v.message.find("fruits") != std::string::npos;
        CHECK(unexpected);
    }
    SECTION("setup omitting a defaulted parameter is valid and keeps the default") {
        std::string text = fixture("exampleOneSetup.xml");
        text = replace_once(text, "     <quantity>54</quantity>\n", "");
        XmlDocument doc = parse_tree(text);
        CHECK(check_setup(defn, doc).valid());
        auto params = effective_setup_params(defn, doc);
        REQUIRE(params.size() == 2);
        CHECK(params[0] == std::pair<std::string, std::string>("fruit", "oranges"));
        CHECK(params[1] == std::pair<std::string, std::string>("quantity", "1"));
    }
    SECTION("the verbatim result figure fails well-formedness before validation") {
        CHECK_THROWS_AS(parse_fixture("exampleOneResults.xml"), WellFormednessError);
    }
    SECTION("missing output parameter in a result") {
        std::string text = fixture("exampleOneResultsCorrected.xml");
        text = replace_once(text, "     <numberRemaining>19</numberRemaining>\n", "");
        ValidationReport r = check_result(defn, parse_tree(text));
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].kind == "element");
        CHECK(r.violations[0].path.find("numberRemaining") != std::string::npos);
    }
}

TEST_CASE("definition documents rebuild faithfully") {
    ModuleDefn defn = example_defn();
    XmlDocument doc = defn_to_document(defn);
    // the rebuilt document revalidates and rebinds to an equal definition
    ModuleDefn again = load_defn(doc);
    CHECK(again.name == defn.name);
    CHECK(again.input_params.size() == defn.input_params.size());
    CHECK(again.output_params.size() == defn.output_params.size());
    CHECK(again.input_params[1].max_value == defn.input_params[1].max_value);
    // and transforms to the same golden text as the original figure
    CHECK(gen_header(again) == fixture("exampleOneSignature.h"));
}

TEST_CASE("generated schemas stay inside the supported subset") {
    ModuleDefn defn = example_defn();
    CHECK_NOTHROW(load_schema(gen_setup_schema(defn)));
    CHECK_NOTHROW(load_schema(gen_result_schema(defn)));

    // a definition with every parameter kind still generates loadable schemas
    ModuleDefn wide;
    wide.name = "Wide";
    wide.description = "d";
    wide.input_params.push_back({"b", ParamKind::Boolean, std::optional<std::string>("true"), {}, {}});
    wide.input_params.push_back({"s", ParamKind::String, {}, {}, {}});
    wide.input_params.push_back({"u", ParamKind::UnsignedInt, {}, 1ULL, 9ULL});
    wide.output_params.push_back({"l", ParamKind::UnsignedLong, {}, {}, 100ULL});
    CHECK_NOTHROW(load_schema(gen_setup_schema(wide)));
    CHECK_NOTHROW(load_schema(gen_result_schema(wide)));
}
