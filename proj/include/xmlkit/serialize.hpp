// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "xmlkit/xml.hpp"

namespace xmlkit {

namespace detail {

inline void escape_text(std::string_view in, std::string& out) {
    for (char c : in) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            // a raw CR would be normalized away on re-parse
            case '\r': out += "&#13;"; break;
            default: out += c;
        }
    }
}

inline void escape_attr(std::string_view in, std::string& out) {
    for (char c : in) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            // literal whitespace would be normalized to spaces on re-parse
            case '\n': out += "&#10;"; break;
            case '\t': out += "&#9;"; break;
            case '\r': out += "&#13;"; break;
            default: out += c;
        }
    }
}

inline std::string attr_lexical(const QName& name) {
    if (name.ns == kns_xmlns) return name.prefix.empty() ? "xmlns" : "xmlns:" + name.local;
    return name.lexical();
}

inline void serialize_node(const XmlDocument& doc, NodeId id, std::string& out) {
    const XmlNode& n = doc.at(id);
    if (n.kind == NodeKind::Text) {
        escape_text(n.text, out);
        return;
    }
    out += '<';
    out += n.name.lexical();
    for (const XmlAttr& a : n.attributes) {
        out += ' ';
        out += attr_lexical(a.name);
        out += "=\"";
        escape_attr(a.value, out);
        out += '"';
    }
    if (n.children.empty()) {
        out += "/>";
        return;
    }
    out += '>';
    for (NodeId c : n.children) serialize_node(doc, c, out);
    out += "</";
    out += n.name.lexical();
    out += '>';
}

}  // namespace detail

/// Emits an XML declaration followed by the tree, attributes in stored order.
/// Output always re-parses to a structurally equal document.
inline std::string serialize(const XmlDocument& doc) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    detail::serialize_node(doc, doc.root(), out);
    out += '\n';
    return out;
}

}  // namespace xmlkit
