// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xmlkit/xml.hpp"
#include "xmlkit/xpath.hpp"

namespace xmlkit {

struct XsltError : std::runtime_error {
    int line;
    XsltError(int line_, const std::string& msg) : std::runtime_error(msg), line(line_) {}
};

struct UnsupportedInstructionError : XsltError {
    std::string instruction;
    UnsupportedInstructionError(std::string name, int line_)
        : XsltError(line_, "unsupported instruction \"" + name + "\""),
          instruction(std::move(name)) {}
};

struct Instruction {
    enum class Kind {
        Text,            // literal or xsl:text content
        ApplyTemplates,  // optional select, optional mode
        CopyOf,          // select path
        CopyOfVariable,  // select="$name"
        Choose,          // whens + otherwise
        When,            // select = test (only inside Choose::whens)
        Variable,        // local declaration: select or body content
    };

    Kind kind = Kind::Text;
    int line = 1;
    std::string text;            // Text
    std::optional<PathExpr> select;
    std::string mode;            // ApplyTemplates
    std::string name;            // CopyOfVariable / Variable
    std::vector<Instruction> body;       // When / Variable content
    std::vector<Instruction> whens;      // Choose
    std::vector<Instruction> otherwise;  // Choose
};

struct TemplateRule {
    PathExpr match;
    std::string mode;     // empty = default mode
    std::vector<Instruction> body;
    int order = 0;        // declaration position, used for last-wins ties
    int line = 1;
};

struct VariableDecl {
    std::string name;
    std::optional<PathExpr> select;
    std::vector<Instruction> content;
    int line = 1;
};

enum class OutputMethod { Xml, Text };

struct Stylesheet {
    std::vector<TemplateRule> templates;
    std::vector<VariableDecl> variables;  // stylesheet-level (global)
    OutputMethod output_method = OutputMethod::Xml;
    bool output_indent = false;
};

/// Diagnostics hook for transform(): records which rule fired for which node
/// and any conflict-resolution warnings.
struct TransformTrace {
    struct Selection {
        int rule_index;  // -1 for built-in rules
        std::string mode;
        NodeRef node;
    };
    std::vector<Selection> selections;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Loader

namespace detail {

class StylesheetLoader {
public:
    static Stylesheet load(const XmlDocument& doc) { return StylesheetLoader(doc).run(); }

private:
    const XmlDocument& doc_;
    Stylesheet sheet_;
    std::vector<std::string> global_names_;

    explicit StylesheetLoader(const XmlDocument& doc) : doc_(doc) {}

    bool is_xsl(NodeId id, std::string_view local) const {
        const XmlNode& n = doc_.at(id);
        return n.kind == NodeKind::Element && n.name.ns == kns_xslt && n.name.local == local;
    }

    const std::string* attr(NodeId id, std::string_view name) const {
        for (const XmlAttr& a : doc_.at(id).attributes)
            if (a.name.ns.empty() && a.name.local == name) return &a.value;
        return nullptr;
    }

    void check_attrs(NodeId id, std::initializer_list<std::string_view> allowed) const {
        for (const XmlAttr& a : doc_.at(id).attributes) {
            if (a.name.ns == kns_xmlns) continue;
            if (!a.name.ns.empty())
                throw UnsupportedInstructionError("attribute " + a.name.lexical(), doc_.at(id).line);
            bool ok = false;
            for (std::string_view s : allowed) ok = ok || a.name.local == s;
            if (!ok)
                throw UnsupportedInstructionError("attribute " + a.name.local, doc_.at(id).line);
        }
    }

    NamespaceMap ns_at(NodeId id) const {
        NamespaceMap ns;
        for (auto& [p, u] : doc_.in_scope_namespaces(id))
            if (!p.empty()) ns[p] = u;
        return ns;
    }

    PathExpr compile_at(const std::string& src, NodeId at) const {
        try {
            return compile_expr(src, ns_at(at));
        } catch (const UnboundPrefixError&) {
            throw;
        } catch (const XPathSyntaxError& e) {
            throw XsltError(doc_.at(at).line, std::string("invalid expression: ") + e.what());
        }
    }

    bool is_ws_text(NodeId id) const {
        const XmlNode& n = doc_.at(id);
        return n.kind == NodeKind::Text &&
               n.text.find_first_not_of(" \t\n\r") == std::string::npos;
    }

    Stylesheet run() {
        NodeId root = doc_.root();
        if (!is_xsl(root, "stylesheet") && !is_xsl(root, "transform"))
            throw XsltError(doc_.at(root).line, "root element is not xsl:stylesheet");
        check_attrs(root, {"version"});

        // Globals are in scope for every template regardless of declaration
        // order, so collect their names up front.
        for (NodeId c : doc_.element_children(root))
            if (is_xsl(c, "variable"))
                if (const std::string* name = attr(c, "name")) {
                    for (const std::string& g : global_names_)
                        if (g == *name)
                            throw XsltError(doc_.at(c).line,
                                            "duplicate global variable \"" + *name + "\"");
                    global_names_.push_back(*name);
                }

        for (NodeId c : doc_.at(root).children) {
            const XmlNode& n = doc_.at(c);
            if (n.kind == NodeKind::Text) {
                if (!is_ws_text(c)) throw XsltError(n.line, "text content at stylesheet level");
                continue;
            }
            if (is_xsl(c, "output")) {
                check_attrs(c, {"method", "indent"});
                if (const std::string* m = attr(c, "method")) {
                    if (*m == "text") sheet_.output_method = OutputMethod::Text;
                    else if (*m == "xml") sheet_.output_method = OutputMethod::Xml;
                    else throw UnsupportedInstructionError("output method \"" + *m + "\"", n.line);
                }
                if (const std::string* i = attr(c, "indent")) sheet_.output_indent = *i == "yes";
            } else if (is_xsl(c, "variable")) {
                sheet_.variables.push_back(load_variable(c));
            } else if (is_xsl(c, "template")) {
                sheet_.templates.push_back(load_template(c));
            } else {
                throw UnsupportedInstructionError(n.name.lexical(), n.line);
            }
        }
        return sheet_;
    }

    VariableDecl load_variable(NodeId id) {
        check_attrs(id, {"name", "select"});
        VariableDecl v;
        v.line = doc_.at(id).line;
        const std::string* name = attr(id, "name");
        if (!name) throw XsltError(v.line, "xsl:variable without name");
        v.name = *name;
        if (const std::string* sel = attr(id, "select")) {
            if (!doc_.at(id).children.empty())
                throw XsltError(v.line, "xsl:variable with both select and content");
            v.select = compile_at(*sel, id);
        } else {
            std::vector<std::string> locals;
            for (NodeId c : doc_.at(id).children) load_item(c, v.content, locals);
        }
        return v;
    }

    TemplateRule load_template(NodeId id) {
        check_attrs(id, {"match", "mode"});
        TemplateRule rule;
        rule.line = doc_.at(id).line;
        rule.order = static_cast<int>(sheet_.templates.size());
        const std::string* match = attr(id, "match");
        if (!match)
            throw UnsupportedInstructionError("template without match (named templates)", rule.line);
        rule.match = compile_at(*match, id);
        require_pattern(rule.match);
        if (const std::string* mode = attr(id, "mode")) rule.mode = *mode;
        std::vector<std::string> locals;
        for (NodeId c : doc_.at(id).children) load_item(c, rule.body, locals);
        return rule;
    }

    // Whitespace-only text nodes are stripped everywhere except inside
    // xsl:text, per the XSLT stylesheet-whitespace rule.
    void load_item(NodeId c, std::vector<Instruction>& body, std::vector<std::string>& locals) {
        const XmlNode& n = doc_.at(c);
        if (n.kind == NodeKind::Text) {
            if (is_ws_text(c)) return;
            Instruction t;
            t.kind = Instruction::Kind::Text;
            t.text = n.text;
            t.line = n.line;
            body.push_back(std::move(t));
            return;
        }
        if (n.name.ns != kns_xslt)
            throw UnsupportedInstructionError("literal result element <" + n.name.lexical() + ">",
                                              n.line);
        Instruction ins;
        ins.line = n.line;
        if (n.name.local == "text") {
            check_attrs(c, {});
            ins.kind = Instruction::Kind::Text;
            for (NodeId t : n.children) {
                if (doc_.at(t).kind != NodeKind::Text)
                    throw XsltError(n.line, "xsl:text may contain only text");
                ins.text += doc_.at(t).text;
            }
            body.push_back(std::move(ins));
            return;
        }
        if (n.name.local == "apply-templates") {
            check_attrs(c, {"select", "mode"});
            for (NodeId t : n.children)
                if (!is_ws_text(t))
                    throw UnsupportedInstructionError("apply-templates content (xsl:sort/param)",
                                                      n.line);
            ins.kind = Instruction::Kind::ApplyTemplates;
            if (const std::string* sel = attr(c, "select")) ins.select = compile_at(*sel, c);
            if (const std::string* mode = attr(c, "mode")) ins.mode = *mode;
            body.push_back(std::move(ins));
            return;
        }
        if (n.name.local == "copy-of") {
            check_attrs(c, {"select"});
            const std::string* sel = attr(c, "select");
            if (!sel) throw XsltError(n.line, "xsl:copy-of without select");
            if (!sel->empty() && (*sel)[0] == '$') {
                ins.kind = Instruction::Kind::CopyOfVariable;
                ins.name = sel->substr(1);
                bool declared = false;
                for (const std::string& l : locals) declared = declared || l == ins.name;
                for (const std::string& g : global_names_) declared = declared || g == ins.name;
                if (!declared)
                    throw XsltError(n.line, "reference to undeclared variable \"$" + ins.name + "\"");
            } else {
                ins.kind = Instruction::Kind::CopyOf;
                ins.select = compile_at(*sel, c);
            }
            body.push_back(std::move(ins));
            return;
        }
        if (n.name.local == "variable") {
            check_attrs(c, {"name", "select"});
            const std::string* name = attr(c, "name");
            if (!name) throw XsltError(n.line, "xsl:variable without name");
            ins.kind = Instruction::Kind::Variable;
            ins.name = *name;
            if (const std::string* sel = attr(c, "select")) {
                if (!n.children.empty())
                    throw XsltError(n.line, "xsl:variable with both select and content");
                ins.select = compile_at(*sel, c);
            } else {
                std::vector<std::string> inner = locals;
                for (NodeId t : n.children) load_item(t, ins.body, inner);
            }
            locals.push_back(ins.name);
            body.push_back(std::move(ins));
            return;
        }
        if (n.name.local == "choose") {
            check_attrs(c, {});
            ins.kind = Instruction::Kind::Choose;
            bool saw_otherwise = false;
            for (NodeId k : n.children) {
                const XmlNode& kn = doc_.at(k);
                if (kn.kind == NodeKind::Text) {
                    if (!is_ws_text(k))
                        throw XsltError(kn.line, "text content directly inside xsl:choose");
                    continue;
                }
                if (kn.name.ns == kns_xslt && kn.name.local == "when") {
                    if (saw_otherwise) throw XsltError(kn.line, "xsl:when after xsl:otherwise");
                    check_attrs(k, {"test"});
                    const std::string* test = attr(k, "test");
                    if (!test) throw XsltError(kn.line, "xsl:when without test");
                    Instruction when;
                    when.kind = Instruction::Kind::When;
                    when.line = kn.line;
                    when.select = compile_at(*test, k);
                    std::vector<std::string> inner = locals;
                    for (NodeId t : kn.children) load_item(t, when.body, inner);
                    ins.whens.push_back(std::move(when));
                } else if (kn.name.ns == kns_xslt && kn.name.local == "otherwise") {
                    if (saw_otherwise) throw XsltError(kn.line, "more than one xsl:otherwise");
                    saw_otherwise = true;
                    check_attrs(k, {});
                    std::vector<std::string> inner = locals;
                    for (NodeId t : kn.children) load_item(t, ins.otherwise, inner);
                } else {
                    throw UnsupportedInstructionError(kn.name.lexical(), kn.line);
                }
            }
            if (ins.whens.empty()) throw XsltError(n.line, "xsl:choose without xsl:when");
            body.push_back(std::move(ins));
            return;
        }
        throw UnsupportedInstructionError("xsl:" + n.name.local, n.line);
    }
};

}  // namespace detail

/// Compiles a stylesheet; instructions outside the supported set raise
/// UnsupportedInstructionError.
inline Stylesheet load_stylesheet(const XmlDocument& doc) {
    return detail::StylesheetLoader::load(doc);
}

// ---------------------------------------------------------------------------
// Execution

namespace detail {

class TransformRun {
public:
    TransformRun(const Stylesheet& sheet, const XmlDocument& doc, TransformTrace* trace)
        : sheet_(sheet), doc_(doc), trace_(trace) {}

    std::string run() {
        std::string out;
        sink_ = &out;
        bind_globals();
        apply_to_nodes({NodeRef{doc_.doc_node(), -1}}, "");
        if (sheet_.output_method == OutputMethod::Text) return out;
        // No literal result elements exist in this instruction set, so xml
        // output degenerates to a declaration plus escaped text.
        std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        for (char c : out) {
            switch (c) {
                case '&': xml += "&amp;"; break;
                case '<': xml += "&lt;"; break;
                case '>': xml += "&gt;"; break;
                default: xml += c;
            }
        }
        return xml;
    }

private:
    // Result-tree fragments degenerate to text in this instruction set.
    using VarValue = std::variant<XPathValue, std::string>;
    using Bindings = std::map<std::string, VarValue>;

    const Stylesheet& sheet_;
    const XmlDocument& doc_;
    TransformTrace* trace_;
    std::string* sink_ = nullptr;
    Bindings globals_;

    void bind_globals() {
        for (const VariableDecl& v : sheet_.variables) {
            EvalContext ctx(doc_, NodeRef{doc_.doc_node(), -1});
            if (v.select) {
                globals_[v.name] = evaluate(*v.select, ctx);
            } else {
                Bindings locals;
                globals_[v.name] = capture(v.content, ctx, locals);
            }
        }
    }

    std::string capture(const std::vector<Instruction>& body, const EvalContext& ctx,
                        Bindings& locals) {
        std::string buf;
        std::string* saved = sink_;
        sink_ = &buf;
        instantiate(body, ctx, locals);
        sink_ = saved;
        return buf;
    }

    // Specificity of a matching branch: longer parent chains beat shorter,
    // a name test beats '*'; remaining ties go to the later rule.
    static std::pair<int, int> branch_specificity(const Expr& branch) {
        int len = static_cast<int>(branch.steps.size());
        int named = branch.steps.empty() ? 1 : (branch.steps.back().any ? 0 : 1);
        return {len, named};
    }

    const TemplateRule* find_rule(NodeRef node, const std::string& mode) {
        const TemplateRule* best = nullptr;
        std::pair<int, int> best_spec{-1, -1};
        bool tie = false;
        for (const TemplateRule& rule : sheet_.templates) {
            if (rule.mode != mode) continue;
            if (!match_pattern(rule.match, doc_, node)) continue;
            std::pair<int, int> spec{-1, -1};
            const Expr& root = rule.match.root();
            if (root.kind == Expr::Kind::Union) {
                for (const Expr& b : root.operands)
                    if (match_branch(b, doc_, node)) spec = std::max(spec, branch_specificity(b));
            } else {
                spec = branch_specificity(root);
            }
            if (!best || spec > best_spec) {
                best = &rule;
                best_spec = spec;
                tie = false;
            } else if (spec == best_spec) {
                best = &rule;  // last declaration wins
                tie = true;
            }
        }
        if (tie && trace_)
            trace_->warnings.push_back("ambiguous rule match resolved to last declaration (mode \"" +
                                       mode + "\")");
        return best;
    }

    void apply_to_nodes(const NodeSet& nodes, const std::string& mode) {
        int size = static_cast<int>(nodes.size());
        for (int i = 0; i < size; ++i) {
            NodeRef node = nodes[static_cast<std::size_t>(i)];
            const TemplateRule* rule = find_rule(node, mode);
            if (trace_) trace_->selections.push_back({rule ? rule->order : -1, mode, node});
            if (rule) {
                EvalContext ctx(doc_, node, i + 1, size);
                Bindings locals;
                instantiate(rule->body, ctx, locals);
                continue;
            }
            builtin_rule(node, mode);
        }
    }

    // Built-in rules: elements and the root apply templates to their children
    // in the current mode; text and attribute nodes copy their value through.
    void builtin_rule(NodeRef node, const std::string& mode) {
        if (node.is_attribute()) {
            *sink_ += doc_.at(node.node).attributes[node.attr].value;
            return;
        }
        const XmlNode& n = doc_.at(node.node);
        if (n.kind == NodeKind::Text) {
            *sink_ += n.text;
            return;
        }
        NodeSet children;
        for (NodeId c : n.children) children.push_back(NodeRef{c, -1});
        apply_to_nodes(children, mode);
    }

    VarValue* lookup(const std::string& name, Bindings& locals) {
        if (auto it = locals.find(name); it != locals.end()) return &it->second;
        if (auto it = globals_.find(name); it != globals_.end()) return &it->second;
        return nullptr;
    }

    void append_value(const XPathValue& v) {
        if (auto* set = std::get_if<NodeSet>(&v)) {
            for (const NodeRef& ref : *set) *sink_ += string_value(doc_, ref);
        } else if (auto* n = std::get_if<long long>(&v)) {
            *sink_ += std::to_string(*n);
        } else if (auto* b = std::get_if<bool>(&v)) {
            *sink_ += *b ? "true" : "false";
        } else {
            *sink_ += std::get<std::string>(v);
        }
    }

    void instantiate(const std::vector<Instruction>& body, const EvalContext& ctx,
                     Bindings& locals) {
        for (const Instruction& ins : body) {
            switch (ins.kind) {
                case Instruction::Kind::Text:
                    *sink_ += ins.text;
                    break;
                case Instruction::Kind::ApplyTemplates: {
                    NodeSet nodes;
                    if (ins.select) {
                        XPathValue v = evaluate(*ins.select, ctx);
                        auto* set = std::get_if<NodeSet>(&v);
                        if (!set)
                            throw XsltError(ins.line, "apply-templates select is not a node-set");
                        nodes = *set;
                    } else if (!ctx.node.is_attribute()) {
                        for (NodeId c : doc_.at(ctx.node.node).children)
                            nodes.push_back(NodeRef{c, -1});
                    }
                    apply_to_nodes(nodes, ins.mode);
                    break;
                }
                case Instruction::Kind::CopyOf:
                    append_value(evaluate(*ins.select, ctx));
                    break;
                case Instruction::Kind::CopyOfVariable: {
                    VarValue* v = lookup(ins.name, locals);
                    if (!v) throw XsltError(ins.line, "undefined variable \"$" + ins.name + "\"");
                    if (auto* text = std::get_if<std::string>(v)) *sink_ += *text;
                    else append_value(std::get<XPathValue>(*v));
                    break;
                }
                case Instruction::Kind::Variable: {
                    if (ins.select) {
                        locals[ins.name] = evaluate(*ins.select, ctx);
                    } else {
                        Bindings inner = locals;
                        locals[ins.name] = capture(ins.body, ctx, inner);
                    }
                    break;
                }
                case Instruction::Kind::Choose: {
                    bool taken = false;
                    for (const Instruction& when : ins.whens) {
                        if (!to_boolean(evaluate(*when.select, ctx))) continue;
                        Bindings inner = locals;
                        instantiate(when.body, ctx, inner);
                        taken = true;
                        break;
                    }
                    if (!taken && !ins.otherwise.empty()) {
                        Bindings inner = locals;
                        instantiate(ins.otherwise, ctx, inner);
                    }
                    break;
                }
                case Instruction::Kind::When:
                    throw std::logic_error("when outside choose");
            }
        }
    }
};

}  // namespace detail

/// Runs the transform starting at the document root in the default mode.
/// With text output the result is the concatenation of all emitted text;
/// repeated runs over the same inputs are byte-identical.
inline std::string transform(const Stylesheet& sheet, const XmlDocument& doc,
                             TransformTrace* trace = nullptr) {
    detail::TransformRun run(sheet, doc, trace);
    return run.run();
}

}  // namespace xmlkit
