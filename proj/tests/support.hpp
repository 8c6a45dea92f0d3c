// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xmlkit/xmlkit.hpp"

#ifndef XMLKIT_FIXTURE_DIR
#error "XMLKIT_FIXTURE_DIR must be defined by the build"
#endif

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
    return std::string(XMLKIT_FIXTURE_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string fixture(const std::string& name) { return slurp(fixture_path(name)); }

inline xmlkit::XmlDocument parse_fixture(const std::string& name) {
    return xmlkit::parse_tree(fixture(name));
}

/// Replaces the single occurrence of `from` in `text`; throws if it is
/// missing or ambiguous so fixture mutations stay honest.
inline std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = text.find(from);
    if (pos == std::string::npos) throw std::runtime_error("mutation anchor not found: " + from);
    if (text.find(from, pos + 1) != std::string::npos)
        throw std::runtime_error("mutation anchor is ambiguous: " + from);
    return text.replace(pos, from.size(), to);
}

// ---------------------------------------------------------------------------
// Random generators for the property suites

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) {  // inclusive
    return static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)) + lo;
}

inline bool chance(Rng& rng, int percent) { return pick(rng, 1, 100) <= percent; }

inline const std::vector<std::string>& name_alphabet() {
    static const std::vector<std::string> names = {"alpha", "beta", "gamma", "delta"};
    return names;
}

struct GenOptions {
    int max_depth = 4;
    int max_children = 4;
    bool with_namespaces = true;
};

/// Random well-formed document built through the public builder: prefixed
/// names stay consistent with xmlns declarations on the root, text includes
/// characters that force escaping, adjacent text merging holds by
/// construction.
inline xmlkit::XmlDocument gen_document(Rng& rng, const GenOptions& opts = {}) {
    using namespace xmlkit;
    XmlBuilder b;
    bool use_ns = opts.with_namespaces && chance(rng, 60);
    const std::string uri1 = "urn:gen:one", uri2 = "urn:gen:two";

    auto gen_text = [&]() {
        static const std::vector<std::string> runs = {
            "plain", "a<b", "x & y", "line\nbreak", "  padded  ", "quote\"mark", "tab\there", "]]>",
        };
        return runs[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(runs.size()) - 1))];
    };
    auto gen_name = [&](bool allow_ns) {
        const std::string& local =
            name_alphabet()[static_cast<std::size_t>(pick(rng, 0, 3))];
        if (allow_ns && use_ns && chance(rng, 40))
            return chance(rng, 50) ? QName(uri1, local, "p") : QName(uri2, local, "q");
        return QName("", local, "");
    };

    struct Frame {
        int remaining;
    };

    b.start_element(gen_name(true));
    if (use_ns) {
        b.attribute(QName(std::string(kns_xmlns), "p", "xmlns"), uri1);
        b.attribute(QName(std::string(kns_xmlns), "q", "xmlns"), uri2);
    }
    std::vector<Frame> stack{{pick(rng, 0, opts.max_children)}};
    auto add_attrs = [&]() {
        int n = pick(rng, 0, 2);
        for (int i = 0; i < n; ++i) {
            QName name("", std::string(1, static_cast<char>('x' + i)), "");
            b.attribute(name, gen_text());
        }
    };
    add_attrs();
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.remaining <= 0) {
            b.end_element();
            stack.pop_back();
            continue;
        }
        --top.remaining;
        if (static_cast<int>(stack.size()) < opts.max_depth && chance(rng, 45)) {
            b.start_element(gen_name(true));
            add_attrs();
            stack.push_back({pick(rng, 0, opts.max_children)});
        } else {
            b.text(gen_text());
        }
    }
    return b.finish();
}

/// Random match pattern over the generator's name alphabet: 1..3 child steps
/// of names or '*', optionally absolute.
inline std::string gen_pattern(Rng& rng) {
    std::string out;
    if (chance(rng, 20)) out += "/";
    int steps = pick(rng, 1, 3);
    for (int i = 0; i < steps; ++i) {
        if (i) out += "/";
        if (chance(rng, 30)) out += "*";
        else if (chance(rng, 30)) out += "p:" + name_alphabet()[static_cast<std::size_t>(pick(rng, 0, 3))];
        else out += name_alphabet()[static_cast<std::size_t>(pick(rng, 0, 3))];
    }
    return out;
}

/// All nodes of a document (document node, elements, text) as NodeRefs.
inline std::vector<xmlkit::NodeRef> all_nodes(const xmlkit::XmlDocument& doc) {
    std::vector<xmlkit::NodeRef> out;
    for (xmlkit::NodeId id = 0; id < doc.size(); ++id) out.push_back({id, -1});
    return out;
}

inline std::vector<xmlkit::NodeRef> ancestor_or_self(const xmlkit::XmlDocument& doc,
                                                     xmlkit::NodeRef node) {
    std::vector<xmlkit::NodeRef> out{node};
    xmlkit::NodeId cur = node.node;
    while (doc.at(cur).parent != xmlkit::knode_none) {
        cur = doc.at(cur).parent;
        out.push_back({cur, -1});
    }
    return out;
}

/// Random module definition; always at least one parameter unless
/// `allow_empty`.
inline xmlkit::stf::ModuleDefn gen_defn(Rng& rng, bool allow_empty = false) {
    using namespace xmlkit::stf;
    ModuleDefn defn;
    defn.name = "Mod" + std::to_string(pick(rng, 0, 9999));
    defn.description = "generated module";
    defn.version_major = pick(rng, 0, 9);
    defn.version_minor = pick(rng, 0, 9);
    int inputs = pick(rng, 0, 3);
    int outputs = pick(rng, 0, 3);
    if (!allow_empty && inputs + outputs == 0) inputs = 1;
    int serial = 0;
    auto gen_param = [&](bool output) {
        Parameter p;
        p.name = std::string(output ? "out" : "in") + std::to_string(serial++);
        p.kind = static_cast<ParamKind>(pick(rng, 0, 3));
        bool numeric = p.kind == ParamKind::UnsignedInt || p.kind == ParamKind::UnsignedLong;
        if (numeric && chance(rng, 60)) {
            unsigned long long lo = static_cast<unsigned long long>(pick(rng, 0, 50));
            unsigned long long hi = lo + static_cast<unsigned long long>(pick(rng, 0, 100));
            if (chance(rng, 80)) p.min_value = lo;
            p.max_value = hi;
        }
        if (!output && chance(rng, 50)) {
            switch (p.kind) {
                case ParamKind::Boolean: p.default_value = chance(rng, 50) ? "true" : "false"; break;
                case ParamKind::String: p.default_value = "dflt"; break;
                default: {
                    unsigned long long lo = p.min_value.value_or(0);
                    unsigned long long hi = p.max_value.value_or(lo + 40);
                    p.default_value = std::to_string(lo + (rng() % (hi - lo + 1)));
                    break;
                }
            }
        }
        return p;
    };
    for (int i = 0; i < inputs; ++i) defn.input_params.push_back(gen_param(false));
    for (int i = 0; i < outputs; ++i) defn.output_params.push_back(gen_param(true));
    return defn;
}

inline std::string conforming_value(Rng& rng, const xmlkit::stf::Parameter& p) {
    using xmlkit::stf::ParamKind;
    switch (p.kind) {
        case ParamKind::Boolean: return chance(rng, 50) ? "true" : "false";
        case ParamKind::String: return "value";
        default: {
            unsigned long long lo = p.min_value.value_or(0);
            unsigned long long hi = p.max_value.value_or(lo + 100);
            return std::to_string(lo + (rng() % (hi - lo + 1)));
        }
    }
}

/// Setup document conforming to gen_setup_schema(defn): defaulted parameters
/// are omitted at random, everything else gets an in-bounds value.
inline xmlkit::XmlDocument gen_setup_instance(Rng& rng, const xmlkit::stf::ModuleDefn& defn) {
    using namespace xmlkit;
    XmlBuilder b;
    b.start_element(QName(std::string(stf::kns_stf), "setup", "stf"));
    b.attribute(QName(std::string(kns_xmlns), "stf", "xmlns"), std::string(stf::kns_stf));
    b.start_element(QName("", defn.name));
    b.start_element(QName("", "parameters"));
    for (const auto& p : defn.input_params) {
        if (p.default_value && chance(rng, 50)) continue;
        b.start_element(QName("", p.name));
        b.text(conforming_value(rng, p));
        b.end_element();
    }
    b.end_element();
    b.end_element();
    b.end_element();
    return b.finish();
}

/// Result document conforming to gen_result_schema(defn).
inline xmlkit::XmlDocument gen_result_instance(Rng& rng, const xmlkit::stf::ModuleDefn& defn) {
    using namespace xmlkit;
    XmlBuilder b;
    b.start_element(QName(std::string(stf::kns_stf), "result", "stf"));
    b.attribute(QName(std::string(kns_xmlns), "stf", "xmlns"), std::string(stf::kns_stf));
    b.start_element(QName("", defn.name));
    b.start_element(QName("", "description")).text(defn.description).end_element();
    b.start_element(QName("", "version"));
    b.attribute(QName("", "major"), std::to_string(defn.version_major));
    b.attribute(QName("", "minor"), std::to_string(defn.version_minor));
    b.end_element();
    b.start_element(QName("", "parameters"));
    for (const auto& p : defn.input_params)
        b.start_element(QName("", p.name)).text(conforming_value(rng, p)).end_element();
    for (const auto& p : defn.output_params)
        b.start_element(QName("", p.name)).text(conforming_value(rng, p)).end_element();
    b.start_element(QName("", "passed")).text(chance(rng, 50) ? "true" : "false").end_element();
    b.start_element(QName("", "testRunnable")).text("true").end_element();
    b.start_element(QName("", "boardID")).text("linux-sim").end_element();
    b.end_element();
    b.end_element();
    b.end_element();
    return b.finish();
}

}  // namespace testsupport
