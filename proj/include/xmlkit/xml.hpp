// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xmlkit {

// Well-known namespace URIs.
inline constexpr std::string_view kns_xml = "http://www.w3.org/XML/1998/namespace";
inline constexpr std::string_view kns_xmlns = "http://www.w3.org/2000/xmlns/";
inline constexpr std::string_view kns_xsd = "http://www.w3.org/2001/XMLSchema";
inline constexpr std::string_view kns_xsi = "http://www.w3.org/2001/XMLSchema-instance";
inline constexpr std::string_view kns_xslt = "http://www.w3.org/1999/XSL/Transform";

/// Expanded element or attribute name. Equality and ordering ignore the
/// prefix; it is kept only so serialization can reproduce the source form.
struct QName {
    std::string ns;
    std::string local;
    std::string prefix;

    QName() = default;
    QName(std::string ns_, std::string local_, std::string prefix_ = {})
        : ns(std::move(ns_)), local(std::move(local_)), prefix(std::move(prefix_)) {}

    friend bool operator==(const QName& a, const QName& b) {
        return a.ns == b.ns && a.local == b.local;
    }
    friend bool operator<(const QName& a, const QName& b) {
        return a.ns != b.ns ? a.ns < b.ns : a.local < b.local;
    }

    /// Name as written in markup (prefix:local or plain local).
    std::string lexical() const { return prefix.empty() ? local : prefix + ":" + local; }
};

struct XmlAttr {
    QName name;
    std::string value;
};

enum class NodeKind { Document, Element, Text };

using NodeId = std::uint32_t;
inline constexpr NodeId knode_none = static_cast<NodeId>(-1);

struct XmlNode {
    NodeKind kind = NodeKind::Element;
    QName name;                    // elements only
    std::string text;              // text nodes only
    std::vector<XmlAttr> attributes;
    std::vector<NodeId> children;  // document and element nodes
    NodeId parent = knode_none;
    int line = 1;
};

struct WellFormednessError : std::runtime_error {
    int line;
    WellFormednessError(int line_, const std::string& msg)
        : std::runtime_error(msg), line(line_) {}
};

/// An XML document as a flat node arena. Node ids are assigned in document
/// (pre-)order, so comparing ids compares document positions. Documents are
/// immutable once built and safe to share between threads.
class XmlDocument {
public:
    XmlDocument() {
        XmlNode doc;
        doc.kind = NodeKind::Document;
        nodes_.push_back(std::move(doc));
    }

    NodeId doc_node() const { return 0; }

    NodeId root() const {
        for (NodeId c : nodes_[0].children)
            if (nodes_[c].kind == NodeKind::Element) return c;
        throw std::logic_error("document has no root element");
    }

    const XmlNode& at(NodeId id) const { return nodes_[id]; }
    const XmlNode& operator[](NodeId id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    const std::string& declared_encoding() const { return declared_encoding_; }

    std::vector<NodeId> element_children(NodeId id) const {
        std::vector<NodeId> out;
        for (NodeId c : nodes_[id].children)
            if (nodes_[c].kind == NodeKind::Element) out.push_back(c);
        return out;
    }

    const std::string* attribute(NodeId id, const QName& name) const {
        for (const XmlAttr& a : nodes_[id].attributes)
            if (a.name == name) return &a.value;
        return nullptr;
    }

    /// Concatenation of all descendant text (the XPath string-value of an
    /// element or document node).
    std::string string_value(NodeId id) const {
        std::string out;
        append_text(id, out);
        return out;
    }

    /// Namespace URI bound to `prefix` at `id`, walking xmlns declarations
    /// up the ancestor chain. Empty prefix looks up the default namespace.
    std::optional<std::string> resolve_prefix(NodeId id, std::string_view prefix) const {
        if (prefix == "xml") return std::string(kns_xml);
        for (NodeId n = id; n != knode_none; n = nodes_[n].parent) {
            if (nodes_[n].kind != NodeKind::Element) continue;
            for (const XmlAttr& a : nodes_[n].attributes) {
                if (a.name.ns != kns_xmlns) continue;
                bool is_default = a.name.prefix.empty();  // plain xmlns=
                if ((prefix.empty() && is_default) || (!is_default && a.name.local == prefix))
                    return a.value;
            }
        }
        if (prefix.empty()) return std::string();  // no default declaration: no namespace
        return std::nullopt;
    }

    /// All prefix bindings in scope at `id`, nearest declaration winning.
    std::vector<std::pair<std::string, std::string>> in_scope_namespaces(NodeId id) const {
        std::vector<std::pair<std::string, std::string>> out;
        auto seen = [&](const std::string& p) {
            return std::any_of(out.begin(), out.end(),
                               [&](const auto& kv) { return kv.first == p; });
        };
        for (NodeId n = id; n != knode_none; n = nodes_[n].parent) {
            if (nodes_[n].kind != NodeKind::Element) continue;
            for (const XmlAttr& a : nodes_[n].attributes) {
                if (a.name.ns != kns_xmlns) continue;
                std::string p = a.name.prefix.empty() ? std::string() : a.name.local;
                if (!seen(p)) out.emplace_back(p, a.value);
            }
        }
        if (!seen("xml")) out.emplace_back("xml", std::string(kns_xml));
        return out;
    }

    /// Location string like /AtwdReadout/Atwd[1]/Channel[2], using local
    /// names and 1-based ordinals among same-named siblings.
    std::string path_of(NodeId id) const {
        if (id == 0) return "/";
        std::vector<NodeId> chain;
        for (NodeId n = id; n != 0; n = nodes_[n].parent) chain.push_back(n);
        std::string out;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            const XmlNode& node = nodes_[*it];
            if (node.kind != NodeKind::Element) continue;
            int ordinal = 1, total = 0;
            for (NodeId sib : nodes_[node.parent].children) {
                if (nodes_[sib].kind != NodeKind::Element) continue;
                if (!(nodes_[sib].name == node.name)) continue;
                ++total;
                if (sib < *it) ++ordinal;
            }
            out += "/" + node.name.local;
            if (total > 1) out += "[" + std::to_string(ordinal) + "]";
        }
        return out.empty() ? "/" : out;
    }

private:
    friend class XmlBuilder;
    std::vector<XmlNode> nodes_;
    std::string declared_encoding_ = "UTF-8";

    void append_text(NodeId id, std::string& out) const {
        const XmlNode& n = nodes_[id];
        if (n.kind == NodeKind::Text) {
            out += n.text;
            return;
        }
        for (NodeId c : n.children) append_text(c, out);
    }
};

/// Constructs documents in document order; used by the parser and by every
/// module that emits XML programmatically. Adjacent text children are merged
/// and duplicate attributes rejected, keeping the tree invariants true by
/// construction.
class XmlBuilder {
public:
    XmlBuilder() { stack_.push_back(doc_.doc_node()); }

    XmlBuilder& start_element(QName name, int line = 1) {
        XmlNode n;
        n.kind = NodeKind::Element;
        n.name = std::move(name);
        n.parent = stack_.back();
        n.line = line;
        NodeId id = static_cast<NodeId>(doc_.nodes_.size());
        doc_.nodes_.push_back(std::move(n));
        doc_.nodes_[stack_.back()].children.push_back(id);
        stack_.push_back(id);
        return *this;
    }

    XmlBuilder& attribute(QName name, std::string value) {
        XmlNode& cur = doc_.nodes_[stack_.back()];
        for (const XmlAttr& a : cur.attributes)
            if (a.name == name)
                throw WellFormednessError(cur.line, "duplicate attribute \"" + name.lexical() + "\"");
        cur.attributes.push_back({std::move(name), std::move(value)});
        return *this;
    }

    XmlBuilder& text(std::string_view value, int line = 1) {
        if (value.empty()) return *this;
        XmlNode& cur = doc_.nodes_[stack_.back()];
        if (!cur.children.empty()) {
            XmlNode& last = doc_.nodes_[cur.children.back()];
            if (last.kind == NodeKind::Text) {
                last.text += value;
                return *this;
            }
        }
        XmlNode n;
        n.kind = NodeKind::Text;
        n.text = std::string(value);
        n.parent = stack_.back();
        n.line = line;
        NodeId id = static_cast<NodeId>(doc_.nodes_.size());
        doc_.nodes_.push_back(std::move(n));
        doc_.nodes_[stack_.back()].children.push_back(id);
        return *this;
    }

    XmlBuilder& end_element() {
        if (stack_.size() <= 1) throw std::logic_error("end_element without start_element");
        stack_.pop_back();
        return *this;
    }

    XmlBuilder& declared_encoding(std::string enc) {
        doc_.declared_encoding_ = std::move(enc);
        return *this;
    }

    int depth() const { return static_cast<int>(stack_.size()) - 1; }

    XmlDocument finish() {
        if (stack_.size() != 1) throw std::logic_error("unclosed element in builder");
        bool has_root = false;
        for (NodeId c : doc_.nodes_[0].children)
            if (doc_.nodes_[c].kind == NodeKind::Element) has_root = true;
        if (!has_root) throw std::logic_error("document has no root element");
        return std::move(doc_);
    }

private:
    XmlDocument doc_;
    std::vector<NodeId> stack_;
};

/// Reference to a node or to one attribute of a node; the currency of XPath
/// results. Ordering is document order (attributes sort directly after their
/// element, before its children).
struct NodeRef {
    NodeId node = knode_none;
    int attr = -1;

    bool is_attribute() const { return attr >= 0; }

    friend bool operator==(const NodeRef& a, const NodeRef& b) {
        return a.node == b.node && a.attr == b.attr;
    }
    friend bool operator<(const NodeRef& a, const NodeRef& b) {
        return a.node != b.node ? a.node < b.node : a.attr < b.attr;
    }
};

inline std::string string_value(const XmlDocument& doc, NodeRef ref) {
    if (ref.is_attribute()) return doc.at(ref.node).attributes[ref.attr].value;
    if (doc.at(ref.node).kind == NodeKind::Text) return doc.at(ref.node).text;
    return doc.string_value(ref.node);
}

inline std::string path_of(const XmlDocument& doc, NodeRef ref) {
    std::string p = doc.path_of(ref.node);
    if (ref.is_attribute()) {
        if (p == "/") p.clear();
        p += "/@" + doc.at(ref.node).attributes[ref.attr].name.local;
    }
    return p;
}

namespace detail {

inline bool attrs_equal(const std::vector<XmlAttr>& a, const std::vector<XmlAttr>& b) {
    if (a.size() != b.size()) return false;
    auto key = [](const XmlAttr& x) { return std::pair<QName, std::string>(x.name, x.value); };
    std::vector<std::pair<QName, std::string>> ka, kb;
    for (const auto& x : a) ka.push_back(key(x));
    for (const auto& x : b) kb.push_back(key(x));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    return ka == kb;
}

inline bool nodes_equal(const XmlDocument& da, NodeId a, const XmlDocument& db, NodeId b) {
    const XmlNode& na = da.at(a);
    const XmlNode& nb = db.at(b);
    if (na.kind != nb.kind) return false;
    if (na.kind == NodeKind::Text) return na.text == nb.text;
    if (na.kind == NodeKind::Element) {
        if (!(na.name == nb.name)) return false;
        if (!attrs_equal(na.attributes, nb.attributes)) return false;
    }
    if (na.children.size() != nb.children.size()) return false;
    for (std::size_t i = 0; i < na.children.size(); ++i)
        if (!nodes_equal(da, na.children[i], db, nb.children[i])) return false;
    return true;
}

}  // namespace detail

/// Structural equality: QNames (namespace + local), attribute sets, and the
/// merged text content. Prefixes, source lines and the declared encoding do
/// not participate.
inline bool structurally_equal(const XmlDocument& a, const XmlDocument& b) {
    return detail::nodes_equal(a, a.doc_node(), b, b.doc_node());
}

}  // namespace xmlkit
