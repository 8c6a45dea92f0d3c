// SPDX-License-Identifier: Apache-2.0
//
// Reads an ATWD readout document with its schema, binds it to typed values
// and reports how many channels the first ATWD carries.
//
//   atwd_unmarshal <schema.xsd> <readout.xml>

#include <fstream>
#include <iostream>
#include <sstream>

#include "xmlkit/xmlkit.hpp"

static std::string slurp(const char* path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(std::string(path) + ": cannot open");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: atwd_unmarshal <schema.xsd> <readout.xml>\n";
        return 1;
    }
    try {
        xmlkit::Schema schema = xmlkit::load_schema(xmlkit::parse_tree(slurp(argv[1])));
        xmlkit::BindingModel model = xmlkit::derive_bindings(schema);
        xmlkit::TypedValue readout = xmlkit::unmarshal(model, xmlkit::parse_tree(slurp(argv[2])));

        const xmlkit::FieldValue* atwds = readout.field("atwd");
        if (!atwds || atwds->records.empty()) {
            std::cerr << "document holds no ATWD readouts\n";
            return 1;
        }
        const xmlkit::FieldValue* channels = atwds->records.front().field("channel");
        std::size_t count = channels ? channels->records.size() : 0;
        std::cout << "Found " << count << " channels in the first ATWD" << std::endl;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
