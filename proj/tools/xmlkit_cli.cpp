// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: well-formedness checks, schema validation, XPath
// queries, XSLT transforms, data binding and the STF code/schema generators.
//
// Exit codes: 0 success, 1 usage error, 2 well-formedness error,
// 3 validation failure, 4 definition/schema error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xmlkit/xmlkit.hpp"

namespace {

constexpr int kexit_ok = 0;
constexpr int kexit_usage = 1;
constexpr int kexit_not_well_formed = 2;
constexpr int kexit_invalid = 3;
constexpr int kexit_bad_definition = 4;

struct CliError {
    int code;
    std::string message;  // printed to stderr
};

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CliError{kexit_usage, path + ": cannot open file"};
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Output is staged and only written once the command has fully succeeded, so
// a failing run never leaves a partial file behind.
void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CliError{kexit_usage, path + ": cannot open for writing"};
    f << data;
}

xmlkit::XmlDocument parse_file(const std::string& path) {
    std::string bytes = read_input(path);
    try {
        return xmlkit::parse_tree(bytes);
    } catch (const xmlkit::WellFormednessError& e) {
        throw CliError{kexit_not_well_formed,
                       path + ":" + std::to_string(e.line) + ": " + e.what()};
    }
}

xmlkit::Schema load_schema_file(const std::string& path) {
    xmlkit::XmlDocument doc = parse_file(path);
    try {
        return xmlkit::load_schema(doc);
    } catch (const xmlkit::SchemaError& e) {
        throw CliError{kexit_bad_definition,
                       path + ":" + std::to_string(e.line) + ": " + e.what()};
    }
}

void print_report(const xmlkit::ValidationReport& report) {
    for (const xmlkit::Violation& v : report.violations)
        std::cout << v.line << ":" << v.path << ": " << v.kind << ": " << v.message << "\n";
}

xmlkit::stf::ModuleDefn load_defn_file(const std::string& path) {
    xmlkit::XmlDocument doc = parse_file(path);
    try {
        return xmlkit::stf::load_defn(doc);
    } catch (const xmlkit::stf::DefinitionError& e) {
        std::string msg = path + ": " + e.what();
        for (const xmlkit::Violation& v : e.report.violations)
            msg += "\n" + path + ":" + std::to_string(v.line) + ": " + v.kind + ": " + v.message;
        throw CliError{kexit_bad_definition, msg};
    }
}

// --- bind: typed-tree printing and --count path navigation ----------------

void print_typed(const xmlkit::TypedValue& value, int indent, std::ostream& os) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    for (const xmlkit::FieldValue& f : value.fields) {
        switch (f.kind) {
            case xmlkit::FieldKind::Scalar:
                os << pad << f.name << " = " << f.scalars[0].canonical << "\n";
                break;
            case xmlkit::FieldKind::ScalarList: {
                os << pad << f.name << " =";
                for (const xmlkit::Scalar& s : f.scalars) os << " " << s.canonical;
                os << "\n";
                break;
            }
            case xmlkit::FieldKind::Record:
            case xmlkit::FieldKind::RecordList:
                for (std::size_t i = 0; i < f.records.size(); ++i) {
                    os << pad << f.name << "[" << i << "]\n";
                    print_typed(f.records[i], indent + 1, os);
                }
                break;
        }
    }
}

// Path syntax: field names separated by '.', each with an optional [index];
// the value printed for a terminal repeated field is its size.
std::string count_path(const xmlkit::TypedValue& root, const std::string& path) {
    const xmlkit::TypedValue* cur = &root;
    std::size_t pos = 0;
    while (pos < path.size()) {
        std::size_t dot = path.find('.', pos);
        std::string part = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        pos = dot == std::string::npos ? path.size() : dot + 1;
        std::size_t bracket = part.find('[');
        std::string name = part.substr(0, bracket);
        const xmlkit::FieldValue* field = cur->field(name);
        if (!field) throw CliError{kexit_usage, "no field \"" + name + "\" in record " + cur->record};
        bool last = pos >= path.size();
        if (bracket == std::string::npos) {
            if (!last) throw CliError{kexit_usage, "field \"" + name + "\" needs an [index] to descend"};
            if (field->kind == xmlkit::FieldKind::RecordList ||
                field->kind == xmlkit::FieldKind::ScalarList)
                return std::to_string(field->kind == xmlkit::FieldKind::RecordList
                                          ? field->records.size()
                                          : field->scalars.size());
            throw CliError{kexit_usage, "field \"" + name + "\" is not repeated"};
        }
        if (part.back() != ']') throw CliError{kexit_usage, "malformed index in \"" + part + "\""};
        std::size_t index = std::stoul(part.substr(bracket + 1, part.size() - bracket - 2));
        if (field->records.size() <= index)
            throw CliError{kexit_usage, "index " + std::to_string(index) + " out of range for \"" +
                                            name + "\""};
        cur = &field->records[index];
        if (last) throw CliError{kexit_usage, "--count path must end in a repeated field"};
    }
    throw CliError{kexit_usage, "empty --count path"};
}

// --- subcommand bodies -----------------------------------------------------

int run_check(const std::string& file) {
    parse_file(file);
    return kexit_ok;
}

int run_validate(const std::string& schema_path, const std::string& file) {
    xmlkit::Schema schema = load_schema_file(schema_path);
    xmlkit::XmlDocument doc = parse_file(file);
    xmlkit::ValidationReport report = xmlkit::validate(schema, doc);
    print_report(report);
    return report.valid() ? kexit_ok : kexit_invalid;
}

int run_xpath(const std::string& expr_src, const std::string& file) {
    xmlkit::XmlDocument doc = parse_file(file);
    xmlkit::NamespaceMap ns;
    for (auto& [p, u] : doc.in_scope_namespaces(doc.root()))
        if (!p.empty()) ns[p] = u;
    xmlkit::PathExpr expr;
    try {
        expr = xmlkit::compile_expr(expr_src, ns);
    } catch (const std::runtime_error& e) {
        throw CliError{kexit_usage, std::string("xpath: ") + e.what()};
    }
    xmlkit::EvalContext ctx(doc, xmlkit::NodeRef{doc.root(), -1});
    xmlkit::XPathValue value = xmlkit::evaluate(expr, ctx);
    std::string out;
    if (auto* set = std::get_if<xmlkit::NodeSet>(&value)) {
        for (const xmlkit::NodeRef& ref : *set) {
            out += xmlkit::path_of(doc, ref);
            if (ref.is_attribute())
                out += " = " + doc.at(ref.node).attributes[ref.attr].value;
            out += "\n";
        }
    } else {
        out = xmlkit::string_value(doc, value) + "\n";
    }
    std::cout << out;
    return kexit_ok;
}

int run_transform(const std::string& xsl_path, const std::string& file, const std::string& out) {
    xmlkit::XmlDocument sheet_doc = parse_file(xsl_path);
    xmlkit::Stylesheet sheet;
    try {
        sheet = xmlkit::load_stylesheet(sheet_doc);
    } catch (const xmlkit::XsltError& e) {
        throw CliError{kexit_bad_definition,
                       xsl_path + ":" + std::to_string(e.line) + ": " + e.what()};
    }
    xmlkit::XmlDocument doc = parse_file(file);
    std::string result;
    try {
        result = xmlkit::transform(sheet, doc);
    } catch (const std::runtime_error& e) {
        throw CliError{kexit_bad_definition, std::string("transform: ") + e.what()};
    }
    write_output(out, result);
    return kexit_ok;
}

int run_bind(const std::string& schema_path, const std::string& file, const std::string& count) {
    xmlkit::Schema schema = load_schema_file(schema_path);
    xmlkit::BindingModel model = xmlkit::derive_bindings(schema);
    xmlkit::XmlDocument doc = parse_file(file);
    xmlkit::TypedValue value;
    try {
        value = xmlkit::unmarshal(model, doc);
    } catch (const xmlkit::BindingError& e) {
        print_report(e.report);
        throw CliError{kexit_invalid, file + ": " + e.what()};
    }
    if (!count.empty()) {
        std::cout << count_path(value, count) << "\n";
        return kexit_ok;
    }
    std::ostringstream os;
    os << value.record << "\n";
    print_typed(value, 1, os);
    std::cout << os.str();
    return kexit_ok;
}

int report_or_ok(const xmlkit::ValidationReport& report) {
    print_report(report);
    return report.valid() ? kexit_ok : kexit_invalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"XML toolchain: parse, validate, query, transform, bind, generate"};
    app.require_subcommand(1);

    std::string file, schema_path, xsl_path, expr, out_path, count_path_arg;

    CLI::App* check = app.add_subcommand("check", "Check well-formedness");
    check->add_option("file", file, "XML document ('-' for stdin)")->required();

    CLI::App* validate_cmd = app.add_subcommand("validate", "Validate against an XML Schema");
    validate_cmd->add_option("--schema", schema_path, "schema document")->required();
    validate_cmd->add_option("file", file, "XML document")->required();

    CLI::App* xpath_cmd = app.add_subcommand("xpath", "Evaluate an XPath expression");
    xpath_cmd->add_option("expr", expr, "expression (prefixes bound from the document root)")
        ->required();
    xpath_cmd->add_option("file", file, "XML document")->required();

    CLI::App* transform_cmd = app.add_subcommand("transform", "Apply an XSLT stylesheet");
    transform_cmd->add_option("--xsl", xsl_path, "stylesheet document")->required();
    transform_cmd->add_option("file", file, "XML document")->required();
    transform_cmd->add_option("-o,--output", out_path, "output file (default stdout)");

    CLI::App* bind_cmd = app.add_subcommand("bind", "Unmarshal into a typed tree");
    bind_cmd->add_option("--schema", schema_path, "schema document")->required();
    bind_cmd->add_option("file", file, "XML document")->required();
    bind_cmd->add_option("--count", count_path_arg,
                         "print the size of the repeated field at this path");

    CLI::App* stf_cmd = app.add_subcommand("stf", "Simple Test Framework toolchain");
    stf_cmd->require_subcommand(1);
    std::string defn_path, target_path;
    CLI::App* gen_header = stf_cmd->add_subcommand("gen-header", "Generate C header signatures");
    gen_header->add_option("defn", defn_path, "module definition")->required();
    gen_header->add_option("-o,--output", out_path, "output file (default stdout)");
    CLI::App* gen_setup = stf_cmd->add_subcommand("gen-setup-schema", "Generate the setup schema");
    gen_setup->add_option("defn", defn_path, "module definition")->required();
    gen_setup->add_option("-o,--output", out_path, "output file (default stdout)");
    CLI::App* gen_result = stf_cmd->add_subcommand("gen-result-schema", "Generate the result schema");
    gen_result->add_option("defn", defn_path, "module definition")->required();
    gen_result->add_option("-o,--output", out_path, "output file (default stdout)");
    CLI::App* check_setup = stf_cmd->add_subcommand("check-setup", "Validate a setup document");
    check_setup->add_option("defn", defn_path, "module definition")->required();
    check_setup->add_option("setup", target_path, "setup document")->required();
    CLI::App* check_result = stf_cmd->add_subcommand("check-result", "Validate a result document");
    check_result->add_option("defn", defn_path, "module definition")->required();
    check_result->add_option("result", target_path, "result document")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kexit_ok : kexit_usage;
    }

    try {
        if (check->parsed()) return run_check(file);
        if (validate_cmd->parsed()) return run_validate(schema_path, file);
        if (xpath_cmd->parsed()) return run_xpath(expr, file);
        if (transform_cmd->parsed()) return run_transform(xsl_path, file, out_path);
        if (bind_cmd->parsed()) return run_bind(schema_path, file, count_path_arg);
        if (stf_cmd->parsed()) {
            if (gen_header->parsed()) {
                write_output(out_path, xmlkit::stf::gen_header(load_defn_file(defn_path)));
                return kexit_ok;
            }
            if (gen_setup->parsed()) {
                write_output(out_path, xmlkit::serialize(
                                           xmlkit::stf::gen_setup_schema(load_defn_file(defn_path))));
                return kexit_ok;
            }
            if (gen_result->parsed()) {
                write_output(out_path, xmlkit::serialize(
                                           xmlkit::stf::gen_result_schema(load_defn_file(defn_path))));
                return kexit_ok;
            }
            if (check_setup->parsed()) {
                xmlkit::stf::ModuleDefn defn = load_defn_file(defn_path);
                xmlkit::XmlDocument doc = parse_file(target_path);
                xmlkit::ValidationReport report = xmlkit::stf::check_setup(defn, doc);
                if (report.valid())
                    for (auto& [name, value] : xmlkit::stf::effective_setup_params(defn, doc))
                        std::cout << name << " = " << value << "\n";
                else
                    print_report(report);
                return report.valid() ? kexit_ok : kexit_invalid;
            }
            if (check_result->parsed()) {
                xmlkit::stf::ModuleDefn defn = load_defn_file(defn_path);
                xmlkit::XmlDocument doc = parse_file(target_path);
                return report_or_ok(xmlkit::stf::check_result(defn, doc));
            }
        }
        return kexit_usage;
    } catch (const CliError& e) {
        std::cerr << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kexit_usage;
    }
}
