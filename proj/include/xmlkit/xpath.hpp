// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xmlkit/xml.hpp"

namespace xmlkit {

struct XPathSyntaxError : std::runtime_error {
    std::size_t position;
    XPathSyntaxError(std::size_t pos, const std::string& msg)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
};

struct UnboundPrefixError : std::runtime_error {
    std::string prefix;
    explicit UnboundPrefixError(std::string p)
        : std::runtime_error("unbound namespace prefix \"" + p + "\""), prefix(std::move(p)) {}
};

struct XPathTypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidPatternError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using NamespaceMap = std::map<std::string, std::string>;

struct XPathStep {
    enum class Axis { Child, Parent, Self, Attribute };
    Axis axis = Axis::Child;
    bool any = false;  // name test '*'
    QName name;        // Child (when !any) and Attribute

    friend bool operator==(const XPathStep& a, const XPathStep& b) {
        return a.axis == b.axis && a.any == b.any && (a.any || a.name == b.name);
    }
};

/// Expression AST: paths, unions, the boolean/equality operators and the
/// four functions of the dialect. Parentheses are structural only and do not
/// appear as nodes.
struct Expr {
    enum class Kind {
        Path, Union, Or, And, Equals,
        Count, LocalName, Last, Position,
        Number, Literal,
    };

    Kind kind = Kind::Path;
    bool absolute = false;
    std::vector<XPathStep> steps;
    std::vector<Expr> operands;
    long long number = 0;
    std::string literal;

    friend bool operator==(const Expr& a, const Expr& b) {
        return a.kind == b.kind && a.absolute == b.absolute && a.steps == b.steps &&
               a.operands == b.operands && a.number == b.number && a.literal == b.literal;
    }
};

/// A compiled expression; immutable and freely shareable across threads.
class PathExpr {
public:
    PathExpr() = default;
    explicit PathExpr(Expr root) : root_(std::make_shared<const Expr>(std::move(root))) {}

    const Expr& root() const { return *root_; }
    bool empty() const { return root_ == nullptr; }

    std::string to_string() const;

    friend bool operator==(const PathExpr& a, const PathExpr& b) {
        if (a.root_ == b.root_) return true;
        if (!a.root_ || !b.root_) return false;
        return *a.root_ == *b.root_;
    }

private:
    std::shared_ptr<const Expr> root_;
};

using NodeSet = std::vector<NodeRef>;  // document order, duplicate-free

using XPathValue = std::variant<NodeSet, long long, bool, std::string>;

struct EvalContext {
    const XmlDocument* doc = nullptr;
    NodeRef node;
    int position = 1;
    int size = 1;

    EvalContext(const XmlDocument& d, NodeRef n, int pos = 1, int sz = 1)
        : doc(&d), node(n), position(pos), size(sz) {
        if (pos < 1 || sz < 1 || pos > sz)
            throw std::invalid_argument("context position must satisfy 1 <= position <= size");
    }
};

// ---------------------------------------------------------------------------
// Compilation

namespace detail {

struct Token {
    enum class Kind { End, Name, Number, Literal, Slash, Union, At, Dot, DotDot,
                      LParen, RParen, Star, Equals, Or, And, Comma };
    Kind kind = Kind::End;
    std::string text;  // Name: as written; Literal: content
    long long number = 0;
    std::size_t pos = 0;
};

class XPathLexer {
public:
    explicit XPathLexer(std::string_view src) : src_(src) { scan(); }

    const Token& current() const { return cur_; }

    Token take() {
        Token t = cur_;
        scan();
        return t;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    Token cur_;
    bool operand_done_ = false;  // previous token can end an operand

    static bool name_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
               static_cast<unsigned char>(c) >= 0x80;
    }
    static bool name_char(char c) {
        return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    void scan() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
        cur_ = Token{};
        cur_.pos = pos_;
        if (pos_ >= src_.size()) {
            cur_.kind = Token::Kind::End;
            return;
        }
        char c = src_[pos_];
        auto single = [&](Token::Kind k, bool ends_operand) {
            cur_.kind = k;
            ++pos_;
            operand_done_ = ends_operand;
        };
        switch (c) {
            case '/': single(Token::Kind::Slash, false); return;
            case '|': single(Token::Kind::Union, false); return;
            case '@': single(Token::Kind::At, false); return;
            case '(': single(Token::Kind::LParen, false); return;
            case ')': single(Token::Kind::RParen, true); return;
            case '=': single(Token::Kind::Equals, false); return;
            case ',': single(Token::Kind::Comma, false); return;
            case '*': single(Token::Kind::Star, true); return;
            case '"':
            case '\'': {
                std::size_t end = src_.find(c, pos_ + 1);
                if (end == std::string_view::npos)
                    throw XPathSyntaxError(pos_, "unterminated string literal");
                cur_.kind = Token::Kind::Literal;
                cur_.text = std::string(src_.substr(pos_ + 1, end - pos_ - 1));
                pos_ = end + 1;
                operand_done_ = true;
                return;
            }
            default: break;
        }
        if (c == '.') {
            if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') {
                cur_.kind = Token::Kind::DotDot;
                pos_ += 2;
            } else {
                cur_.kind = Token::Kind::Dot;
                ++pos_;
            }
            operand_done_ = true;
            return;
        }
        if (c >= '0' && c <= '9') {
            long long v = 0;
            while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9')
                v = v * 10 + (src_[pos_++] - '0');
            cur_.kind = Token::Kind::Number;
            cur_.number = v;
            operand_done_ = true;
            return;
        }
        if (!name_start(c)) throw XPathSyntaxError(pos_, "unexpected character");
        std::string name;
        while (pos_ < src_.size() && name_char(src_[pos_])) name += src_[pos_++];
        if (pos_ < src_.size() && src_[pos_] == ':' && pos_ + 1 < src_.size() &&
            name_start(src_[pos_ + 1])) {
            name += src_[pos_++];
            while (pos_ < src_.size() && name_char(src_[pos_])) name += src_[pos_++];
        }
        // 'or' / 'and' are operators exactly where an operator may appear
        if (operand_done_ && name == "or") {
            cur_.kind = Token::Kind::Or;
            operand_done_ = false;
            return;
        }
        if (operand_done_ && name == "and") {
            cur_.kind = Token::Kind::And;
            operand_done_ = false;
            return;
        }
        cur_.kind = Token::Kind::Name;
        cur_.text = std::move(name);
        operand_done_ = true;
    }
};

class XPathParser {
public:
    XPathParser(std::string_view src, const NamespaceMap& ns) : lex_(src), ns_(ns) {}

    Expr parse() {
        Expr e = parse_or();
        if (lex_.current().kind != Token::Kind::End)
            throw XPathSyntaxError(lex_.current().pos, "trailing input after expression");
        return e;
    }

private:
    XPathLexer lex_;
    const NamespaceMap& ns_;

    bool at(Token::Kind k) const { return lex_.current().kind == k; }

    static Expr binary(Expr::Kind kind, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = kind;
        e.operands.push_back(std::move(lhs));
        e.operands.push_back(std::move(rhs));
        return e;
    }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (at(Token::Kind::Or)) {
            lex_.take();
            lhs = binary(Expr::Kind::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_equality();
        while (at(Token::Kind::And)) {
            lex_.take();
            lhs = binary(Expr::Kind::And, std::move(lhs), parse_equality());
        }
        return lhs;
    }

    Expr parse_equality() {
        Expr lhs = parse_union();
        while (at(Token::Kind::Equals)) {
            lex_.take();
            lhs = binary(Expr::Kind::Equals, std::move(lhs), parse_union());
        }
        return lhs;
    }

    Expr parse_union() {
        std::size_t start = lex_.current().pos;
        Expr lhs = parse_primary();
        if (!at(Token::Kind::Union)) return lhs;
        if (lhs.kind != Expr::Kind::Path)
            throw XPathSyntaxError(start, "union operands must be paths");
        Expr e;
        e.kind = Expr::Kind::Union;
        e.operands.push_back(std::move(lhs));
        while (at(Token::Kind::Union)) {
            std::size_t p = lex_.current().pos;
            lex_.take();
            Expr branch = parse_primary();
            if (branch.kind != Expr::Kind::Path)
                throw XPathSyntaxError(p, "union operands must be paths");
            e.operands.push_back(std::move(branch));
        }
        return e;
    }

    Expr parse_primary() {
        const Token& t = lex_.current();
        switch (t.kind) {
            case Token::Kind::LParen: {
                lex_.take();
                Expr inner = parse_or();
                if (!at(Token::Kind::RParen))
                    throw XPathSyntaxError(lex_.current().pos, "expected ')'");
                lex_.take();
                return inner;
            }
            case Token::Kind::Number: {
                Expr e;
                e.kind = Expr::Kind::Number;
                e.number = lex_.take().number;
                return e;
            }
            case Token::Kind::Literal: {
                Expr e;
                e.kind = Expr::Kind::Literal;
                e.literal = lex_.take().text;
                return e;
            }
            case Token::Kind::Name: {
                Token name = lex_.take();
                if (at(Token::Kind::LParen)) return parse_function(name);
                return parse_path(first_step(name));
            }
            case Token::Kind::Slash:
            case Token::Kind::At:
            case Token::Kind::Dot:
            case Token::Kind::DotDot:
            case Token::Kind::Star:
                return parse_path(std::nullopt);
            default:
                throw XPathSyntaxError(t.pos, "expected an expression");
        }
    }

    Expr parse_function(const Token& name) {
        Expr e;
        std::size_t arity;
        if (name.text == "count") {
            e.kind = Expr::Kind::Count;
            arity = 1;
        } else if (name.text == "local-name") {
            e.kind = Expr::Kind::LocalName;
            arity = 0;
        } else if (name.text == "last") {
            e.kind = Expr::Kind::Last;
            arity = 0;
        } else if (name.text == "position") {
            e.kind = Expr::Kind::Position;
            arity = 0;
        } else {
            throw XPathSyntaxError(name.pos, "unknown function \"" + name.text + "\"");
        }
        lex_.take();  // '('
        for (std::size_t i = 0; i < arity; ++i) {
            if (i > 0) {
                if (!at(Token::Kind::Comma))
                    throw XPathSyntaxError(lex_.current().pos, "expected ','");
                lex_.take();
            }
            e.operands.push_back(parse_or());
        }
        if (!at(Token::Kind::RParen))
            throw XPathSyntaxError(lex_.current().pos,
                                   "wrong number of arguments to " + name.text + "()");
        lex_.take();
        return e;
    }

    XPathStep first_step(const Token& name) {
        XPathStep s;
        s.name = resolve_name(name);
        return s;
    }

    // `pre` holds a step already consumed by the caller (a leading name).
    Expr parse_path(std::optional<XPathStep> pre) {
        Expr e;
        e.kind = Expr::Kind::Path;
        if (pre) {
            e.steps.push_back(std::move(*pre));
        } else if (at(Token::Kind::Slash)) {
            e.absolute = true;
            lex_.take();
            if (!step_ahead()) return e;  // bare "/"
            e.steps.push_back(parse_step());
        } else {
            e.steps.push_back(parse_step());
        }
        while (at(Token::Kind::Slash)) {
            lex_.take();
            if (!step_ahead())
                throw XPathSyntaxError(lex_.current().pos, "expected a step after '/'");
            e.steps.push_back(parse_step());
        }
        return e;
    }

    bool step_ahead() const {
        switch (lex_.current().kind) {
            case Token::Kind::Name:
            case Token::Kind::Star:
            case Token::Kind::At:
            case Token::Kind::Dot:
            case Token::Kind::DotDot:
                return true;
            default:
                return false;
        }
    }

    XPathStep parse_step() {
        XPathStep s;
        switch (lex_.current().kind) {
            case Token::Kind::Dot:
                s.axis = XPathStep::Axis::Self;
                lex_.take();
                return s;
            case Token::Kind::DotDot:
                s.axis = XPathStep::Axis::Parent;
                lex_.take();
                return s;
            case Token::Kind::At: {
                lex_.take();
                if (!at(Token::Kind::Name))
                    throw XPathSyntaxError(lex_.current().pos, "expected attribute name after '@'");
                Token name = lex_.take();
                if (name.text.find(':') != std::string::npos)
                    throw XPathSyntaxError(name.pos, "prefixed attribute steps are not supported");
                s.axis = XPathStep::Axis::Attribute;
                s.name = QName("", name.text, "");
                return s;
            }
            case Token::Kind::Star:
                s.any = true;
                lex_.take();
                return s;
            case Token::Kind::Name:
                s.name = resolve_name(lex_.take());
                return s;
            default:
                throw XPathSyntaxError(lex_.current().pos, "expected a path step");
        }
    }

    QName resolve_name(const Token& t) {
        auto colon = t.text.find(':');
        if (colon == std::string::npos) return QName("", t.text, "");
        std::string prefix = t.text.substr(0, colon);
        std::string local = t.text.substr(colon + 1);
        auto it = ns_.find(prefix);
        if (it == ns_.end()) throw UnboundPrefixError(prefix);
        return QName(it->second, local, prefix);
    }
};

inline void print_expr(const Expr& e, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::Path: {
            if (e.absolute) out += '/';
            bool first = true;
            for (const XPathStep& s : e.steps) {
                if (!first) out += '/';
                first = false;
                switch (s.axis) {
                    case XPathStep::Axis::Self: out += '.'; break;
                    case XPathStep::Axis::Parent: out += ".."; break;
                    case XPathStep::Axis::Attribute: out += "@" + s.name.local; break;
                    case XPathStep::Axis::Child:
                        out += s.any ? "*" : s.name.lexical();
                        break;
                }
            }
            break;
        }
        case Expr::Kind::Union: {
            bool first = true;
            for (const Expr& b : e.operands) {
                if (!first) out += '|';
                first = false;
                print_expr(b, out);
            }
            break;
        }
        case Expr::Kind::Or:
        case Expr::Kind::And:
        case Expr::Kind::Equals: {
            const char* op = e.kind == Expr::Kind::Or ? " or "
                           : e.kind == Expr::Kind::And ? " and " : " = ";
            out += '(';
            print_expr(e.operands[0], out);
            out += op;
            print_expr(e.operands[1], out);
            out += ')';
            break;
        }
        case Expr::Kind::Count:
            out += "count(";
            print_expr(e.operands[0], out);
            out += ')';
            break;
        case Expr::Kind::LocalName: out += "local-name()"; break;
        case Expr::Kind::Last: out += "last()"; break;
        case Expr::Kind::Position: out += "position()"; break;
        case Expr::Kind::Number: out += std::to_string(e.number); break;
        case Expr::Kind::Literal:
            if (e.literal.find('"') == std::string::npos) {
                out += '"' + e.literal + '"';
            } else {
                out += '\'' + e.literal + '\'';
            }
            break;
    }
}

}  // namespace detail

inline std::string PathExpr::to_string() const {
    std::string out;
    if (root_) detail::print_expr(*root_, out);
    return out;
}

/// Compiles an expression; every prefix used in `source` must be bound in
/// `ns`. The printed form of the result re-compiles to an equal AST.
inline PathExpr compile_expr(std::string_view source, const NamespaceMap& ns = {}) {
    detail::XPathParser parser(source, ns);
    return PathExpr(parser.parse());
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline void add_sorted(NodeSet& set, NodeRef ref) { set.push_back(ref); }

inline void normalize(NodeSet& set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
}

inline NodeSet apply_step(const XmlDocument& doc, const NodeSet& input, const XPathStep& step) {
    NodeSet out;
    for (const NodeRef& ref : input) {
        switch (step.axis) {
            case XPathStep::Axis::Self:
                add_sorted(out, ref);
                break;
            case XPathStep::Axis::Parent: {
                if (ref.is_attribute()) {
                    add_sorted(out, NodeRef{ref.node, -1});
                } else if (doc.at(ref.node).parent != knode_none) {
                    add_sorted(out, NodeRef{doc.at(ref.node).parent, -1});
                }
                break;
            }
            case XPathStep::Axis::Attribute: {
                if (ref.is_attribute()) break;
                const XmlNode& n = doc.at(ref.node);
                if (n.kind != NodeKind::Element) break;
                for (std::size_t i = 0; i < n.attributes.size(); ++i)
                    if (n.attributes[i].name == step.name)
                        add_sorted(out, NodeRef{ref.node, static_cast<int>(i)});
                break;
            }
            case XPathStep::Axis::Child: {
                if (ref.is_attribute()) break;
                const XmlNode& n = doc.at(ref.node);
                for (NodeId c : n.children) {
                    if (doc.at(c).kind != NodeKind::Element) continue;
                    if (step.any || doc.at(c).name == step.name)
                        add_sorted(out, NodeRef{c, -1});
                }
                break;
            }
        }
    }
    normalize(out);
    return out;
}

inline NodeSet eval_path(const Expr& e, const EvalContext& ctx) {
    NodeSet cur;
    if (e.absolute) cur.push_back(NodeRef{ctx.doc->doc_node(), -1});
    else cur.push_back(ctx.node);
    for (const XPathStep& s : e.steps) cur = apply_step(*ctx.doc, cur, s);
    return cur;
}

inline bool to_boolean(const XPathValue& v) {
    if (auto* ns = std::get_if<NodeSet>(&v)) return !ns->empty();
    if (auto* n = std::get_if<long long>(&v)) return *n != 0;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    return !std::get<std::string>(v).empty();
}

inline std::optional<long long> parse_integer(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\n\r");
    if (b == std::string_view::npos) return std::nullopt;
    std::size_t e = s.find_last_not_of(" \t\n\r");
    s = s.substr(b, e - b + 1);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

inline XPathValue eval_expr(const Expr& e, const EvalContext& ctx);

inline bool equals(const XPathValue& a, const XPathValue& b, const EvalContext& ctx) {
    const NodeSet* na = std::get_if<NodeSet>(&a);
    const NodeSet* nb = std::get_if<NodeSet>(&b);
    if (na && nb) {
        for (const NodeRef& x : *na) {
            std::string sx = string_value(*ctx.doc, x);
            for (const NodeRef& y : *nb)
                if (sx == string_value(*ctx.doc, y)) return true;
        }
        return false;
    }
    if (na || nb) {
        const NodeSet& set = na ? *na : *nb;
        const XPathValue& other = na ? b : a;
        if (auto* s = std::get_if<std::string>(&other)) {
            for (const NodeRef& x : set)
                if (string_value(*ctx.doc, x) == *s) return true;
            return false;
        }
        if (auto* n = std::get_if<long long>(&other)) {
            for (const NodeRef& x : set) {
                auto v = parse_integer(string_value(*ctx.doc, x));
                if (v && *v == *n) return true;
            }
            return false;
        }
        return to_boolean(XPathValue(set)) == std::get<bool>(other);
    }
    if (auto* ba = std::get_if<bool>(&a)) return *ba == to_boolean(b);
    if (auto* bb = std::get_if<bool>(&b)) return *bb == to_boolean(a);
    if (auto* la = std::get_if<long long>(&a)) {
        if (auto* lb = std::get_if<long long>(&b)) return *la == *lb;
        auto v = parse_integer(std::get<std::string>(b));
        return v && *v == *la;
    }
    if (auto* lb = std::get_if<long long>(&b)) {
        auto v = parse_integer(std::get<std::string>(a));
        return v && *v == *lb;
    }
    return std::get<std::string>(a) == std::get<std::string>(b);
}

inline XPathValue eval_expr(const Expr& e, const EvalContext& ctx) {
    switch (e.kind) {
        case Expr::Kind::Path:
            return eval_path(e, ctx);
        case Expr::Kind::Union: {
            NodeSet out;
            for (const Expr& b : e.operands) {
                NodeSet part = eval_path(b, ctx);
                out.insert(out.end(), part.begin(), part.end());
            }
            normalize(out);
            return out;
        }
        case Expr::Kind::Or:
            return to_boolean(eval_expr(e.operands[0], ctx)) ||
                   to_boolean(eval_expr(e.operands[1], ctx));
        case Expr::Kind::And:
            return to_boolean(eval_expr(e.operands[0], ctx)) &&
                   to_boolean(eval_expr(e.operands[1], ctx));
        case Expr::Kind::Equals:
            return equals(eval_expr(e.operands[0], ctx), eval_expr(e.operands[1], ctx), ctx);
        case Expr::Kind::Count: {
            XPathValue arg = eval_expr(e.operands[0], ctx);
            auto* set = std::get_if<NodeSet>(&arg);
            if (!set) throw XPathTypeError("count() requires a node-set argument");
            return static_cast<long long>(set->size());
        }
        case Expr::Kind::LocalName: {
            if (ctx.node.is_attribute())
                return ctx.doc->at(ctx.node.node).attributes[ctx.node.attr].name.local;
            const XmlNode& n = ctx.doc->at(ctx.node.node);
            return n.kind == NodeKind::Element ? n.name.local : std::string();
        }
        case Expr::Kind::Last:
            return static_cast<long long>(ctx.size);
        case Expr::Kind::Position:
            return static_cast<long long>(ctx.position);
        case Expr::Kind::Number:
            return e.number;
        case Expr::Kind::Literal:
            return e.literal;
    }
    throw std::logic_error("unreachable");
}

inline bool is_pattern_path(const Expr& p) {
    if (p.kind != Expr::Kind::Path) return false;
    if (p.steps.empty()) return p.absolute;  // bare "/"
    for (const XPathStep& s : p.steps)
        if (s.axis != XPathStep::Axis::Child) return false;
    return true;
}

inline bool match_branch(const Expr& p, const XmlDocument& doc, NodeRef ref) {
    if (p.steps.empty()) return p.absolute && ref.node == doc.doc_node() && !ref.is_attribute();
    if (ref.is_attribute()) return false;
    NodeId cur = ref.node;
    for (auto it = p.steps.rbegin(); it != p.steps.rend(); ++it) {
        if (cur == knode_none) return false;
        const XmlNode& n = doc.at(cur);
        if (n.kind != NodeKind::Element) return false;
        if (!it->any && !(n.name == it->name)) return false;
        cur = n.parent;
    }
    if (p.absolute) return cur == doc.doc_node();
    return true;
}

}  // namespace detail

/// XPath-1.0-style evaluation of the supported dialect. Node-set results are
/// in document order with no duplicates.
inline XPathValue evaluate(const PathExpr& expr, const EvalContext& ctx) {
    return detail::eval_expr(expr.root(), ctx);
}

inline std::string string_value(const XmlDocument& doc, const XPathValue& v) {
    if (auto* set = std::get_if<NodeSet>(&v))
        return set->empty() ? std::string() : string_value(doc, set->front());
    if (auto* n = std::get_if<long long>(&v)) return std::to_string(*n);
    if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<std::string>(v);
}

/// True iff the node's (name, parent-name, ...) chain matches one union
/// branch read right-to-left; '*' matches any element and a bare '/' matches
/// only the document node. The pattern must be a union of child-axis paths.
inline bool match_pattern(const PathExpr& pattern, const XmlDocument& doc, NodeRef node) {
    const Expr& root = pattern.root();
    if (root.kind == Expr::Kind::Path) {
        if (!detail::is_pattern_path(root))
            throw InvalidPatternError("pattern must use only name/*/prefixed steps");
        return detail::match_branch(root, doc, node);
    }
    if (root.kind != Expr::Kind::Union)
        throw InvalidPatternError("pattern must be a path or a union of paths");
    for (const Expr& b : root.operands) {
        if (!detail::is_pattern_path(b))
            throw InvalidPatternError("pattern must use only name/*/prefixed steps");
        if (detail::match_branch(b, doc, node)) return true;
    }
    return false;
}

/// Throws InvalidPatternError unless `p` is usable with match_pattern.
inline void require_pattern(const PathExpr& p) {
    const Expr& root = p.root();
    if (root.kind == Expr::Kind::Path) {
        if (!detail::is_pattern_path(root))
            throw InvalidPatternError("pattern must use only name/*/prefixed steps");
        return;
    }
    if (root.kind != Expr::Kind::Union)
        throw InvalidPatternError("pattern must be a path or a union of paths");
    for (const Expr& b : root.operands)
        if (!detail::is_pattern_path(b))
            throw InvalidPatternError("pattern must use only name/*/prefixed steps");
}

}  // namespace xmlkit
