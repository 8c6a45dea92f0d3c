// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xmlkit/xml.hpp"

namespace xmlkit {

/// One callback event of the streaming parser. Start/End events are properly
/// nested and balanced; Text carries one contiguous run of character data.
struct ParseEvent {
    enum class Kind { StartElement, EndElement, Text };
    Kind kind;
    QName name;                      // Start/End
    std::vector<XmlAttr> attributes; // Start (xmlns declarations included)
    std::vector<std::pair<std::string, std::string>> namespaces; // in scope at Start
    std::string text;                // Text
    int line = 1;
};

/// Return false to abort parsing cleanly.
using EventHandler = std::function<bool(const ParseEvent&)>;

namespace detail {

class Tokenizer {
public:
    Tokenizer(std::string_view input, const EventHandler& handler)
        : in_(input), on_event_(handler) {}

    std::string declared_encoding = "UTF-8";

    void run() {
        if (in_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;  // UTF-8 BOM
        parse_declaration();
        bool saw_root = false;
        while (pos_ < in_.size()) {
            if (peek() != '<') {
                int at = line_;
                std::string text = read_text_run();
                if (!depth()) {
                    if (text.find_first_not_of(" \t\n") != std::string::npos)
                        fail(at, "text content outside the root element");
                    continue;  // inter-element whitespace in the prolog/epilog
                }
                ParseEvent ev;
                ev.kind = ParseEvent::Kind::Text;
                ev.text = std::move(text);
                ev.line = at;
                if (!emit(ev)) return;
                continue;
            }
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            if (starts_with("<![CDATA[")) fail(line_, "CDATA sections are not supported");
            if (starts_with("<!DOCTYPE")) fail(line_, "DOCTYPE is not supported");
            if (starts_with("<!")) fail(line_, "malformed markup declaration");
            if (starts_with("<?")) fail(line_, "processing instructions are not supported");
            if (starts_with("</")) {
                if (!parse_end_tag()) return;
                continue;
            }
            if (!depth() && saw_root) fail(line_, "more than one root element");
            if (!depth()) saw_root = true;
            if (!parse_start_tag()) return;
        }
        if (depth())
            fail(open_.back().line, "unclosed element \"" + open_.back().lexical_name + "\"");
        if (!saw_root) fail(line_, "document has no root element");
    }

private:
    struct OpenElement {
        QName name;
        std::string lexical_name;
        std::size_t ns_mark;
        int line;
    };

    std::string_view in_;
    const EventHandler& on_event_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::vector<OpenElement> open_;
    // namespace bindings as (prefix, uri), innermost last; frames delimited
    // by OpenElement::ns_mark
    std::vector<std::pair<std::string, std::string>> bindings_;
    bool aborted_ = false;

    std::size_t depth() const { return open_.size(); }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw WellFormednessError(line, msg);
    }

    char peek() const { return pos_ < in_.size() ? in_[pos_] : '\0'; }

    bool starts_with(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

    // Consumes one character with XML line-ending normalization: \r\n and
    // bare \r both come out as \n.
    char get() {
        char c = in_[pos_++];
        if (c == '\r') {
            if (pos_ < in_.size() && in_[pos_] == '\n') ++pos_;
            c = '\n';
        }
        if (c == '\n') ++line_;
        return c;
    }

    void expect(char c, const char* what) {
        if (pos_ >= in_.size() || peek() != c)
            fail(line_, std::string("expected '") + c + "' in " + what);
        get();
    }

    void skip_ws() {
        while (pos_ < in_.size() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
            get();
    }

    static bool name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
               static_cast<unsigned char>(c) >= 0x80;
    }
    static bool name_char(char c) {
        return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    }

    std::string read_ncname(const char* what) {
        if (pos_ >= in_.size() || !name_start(peek()))
            fail(line_, std::string("expected a name in ") + what);
        std::string out;
        while (pos_ < in_.size() && name_char(peek())) out += get();
        return out;
    }

    // prefix:local or plain local, split but unresolved.
    std::pair<std::string, std::string> read_raw_name(const char* what) {
        std::string first = read_ncname(what);
        if (peek() != ':') return {std::string(), first};
        get();
        std::string second = read_ncname(what);
        if (peek() == ':') fail(line_, "more than one ':' in name");
        return {first, second};
    }

    void append_utf8(std::string& out, unsigned long cp) {
        if (cp == 0 || cp > 0x10FFFF) fail(line_, "character reference out of range");
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    // Expands &name; and &#...; references. Characters produced here bypass
    // attribute-value normalization (per the XML rules for character refs).
    void read_reference(std::string& out) {
        int at = line_;
        get();  // '&'
        if (peek() == '#') {
            get();
            int base = 10;
            if (peek() == 'x' || peek() == 'X') {
                get();
                base = 16;
            }
            std::string digits;
            while (pos_ < in_.size() && peek() != ';') digits += get();
            if (pos_ >= in_.size() || digits.empty()) fail(at, "malformed character reference");
            get();  // ';'
            unsigned long cp = 0;
            for (char c : digits) {
                int d;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else if (base == 16 && c >= 'A' && c <= 'F') d = c - 'A' + 10;
                else fail(at, "malformed character reference");
                cp = cp * base + static_cast<unsigned long>(d);
                if (cp > 0x10FFFF) fail(at, "character reference out of range");
            }
            append_utf8(out, cp);
            return;
        }
        std::string name;
        while (pos_ < in_.size() && peek() != ';' && name.size() < 8) name += get();
        if (pos_ >= in_.size() || peek() != ';') fail(at, "malformed entity reference");
        get();
        if (name == "amp") out += '&';
        else if (name == "lt") out += '<';
        else if (name == "gt") out += '>';
        else if (name == "quot") out += '"';
        else if (name == "apos") out += '\'';
        else fail(at, "unknown entity \"&" + name + ";\"");
    }

    std::string read_text_run() {
        std::string out;
        while (pos_ < in_.size() && peek() != '<') {
            if (peek() == '&') read_reference(out);
            else out += get();
        }
        return out;
    }

    std::string read_attr_value() {
        char quote = peek();
        if (quote != '"' && quote != '\'') fail(line_, "attribute value must be quoted");
        get();
        std::string out;
        while (pos_ < in_.size() && peek() != quote) {
            if (peek() == '<') fail(line_, "'<' in attribute value");
            if (peek() == '&') {
                read_reference(out);
                continue;
            }
            char c = get();
            if (c == '\n' || c == '\t') c = ' ';  // attribute-value normalization
            out += c;
        }
        if (pos_ >= in_.size()) fail(line_, "unterminated attribute value");
        get();  // closing quote
        return out;
    }

    void skip_comment() {
        int at = line_;
        pos_ += 4;  // <!--
        while (pos_ < in_.size()) {
            if (starts_with("--")) {
                pos_ += 2;
                if (peek() != '>') fail(line_, "\"--\" not allowed inside comment");
                get();
                return;
            }
            get();
        }
        fail(at, "unterminated comment");
    }

    void parse_declaration() {
        if (!starts_with("<?xml")) return;
        std::size_t after = pos_ + 5;
        if (after < in_.size() && name_char(in_[after])) return;  // e.g. <?xmlfoo is not a declaration
        pos_ += 5;
        bool saw_version = false;
        while (true) {
            skip_ws();
            if (starts_with("?>")) {
                pos_ += 2;
                break;
            }
            if (pos_ >= in_.size()) fail(line_, "unterminated XML declaration");
            std::string key = read_ncname("XML declaration");
            skip_ws();
            expect('=', "XML declaration");
            skip_ws();
            std::string value = read_attr_value();
            if (key == "version") {
                if (value != "1.0") fail(line_, "unsupported XML version \"" + value + "\"");
                saw_version = true;
            } else if (key == "encoding") {
                std::string lower = value;
                for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                if (lower != "utf-8") fail(line_, "unsupported encoding \"" + value + "\" (UTF-8 only)");
                declared_encoding = value;
            } else {
                fail(line_, "unsupported XML declaration attribute \"" + key + "\"");
            }
        }
        if (!saw_version) fail(line_, "XML declaration without version");
    }

    std::optional<std::string> lookup(std::string_view prefix) const {
        if (prefix == "xml") return std::string(kns_xml);
        for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it)
            if (it->first == prefix) return it->second;
        if (prefix.empty()) return std::string();
        return std::nullopt;
    }

    QName resolve(const std::pair<std::string, std::string>& raw, bool is_attribute, int at) {
        const std::string& prefix = raw.first;
        const std::string& local = raw.second;
        if (is_attribute) {
            if (prefix.empty()) return QName("", local, "");
            if (prefix == "xmlns") return QName(std::string(kns_xmlns), local, prefix);
        } else if (prefix.empty()) {
            return QName(*lookup(""), local, "");
        }
        auto uri = lookup(prefix);
        if (!uri) fail(at, "undeclared namespace prefix \"" + prefix + "\"");
        return QName(*uri, local, prefix);
    }

    bool parse_start_tag() {
        int at = line_;
        get();  // '<'
        auto raw_name = read_raw_name("start tag");
        std::vector<std::pair<std::pair<std::string, std::string>, std::string>> raw_attrs;
        bool self_closing = false;
        while (true) {
            bool had_ws = pos_ < in_.size() &&
                          (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r');
            skip_ws();
            if (pos_ >= in_.size()) fail(at, "unterminated start tag");
            if (peek() == '>') {
                get();
                break;
            }
            if (starts_with("/>")) {
                pos_ += 2;
                self_closing = true;
                break;
            }
            if (!had_ws) fail(line_, "expected whitespace before attribute");
            auto name = read_raw_name("attribute");
            skip_ws();
            expect('=', "attribute");
            skip_ws();
            std::string value = read_attr_value();
            raw_attrs.emplace_back(std::move(name), std::move(value));
        }

        std::size_t mark = bindings_.size();
        for (const auto& [name, value] : raw_attrs) {
            if (name.first.empty() && name.second == "xmlns") {
                bindings_.emplace_back("", value);
            } else if (name.first == "xmlns") {
                if (value.empty()) fail(at, "cannot bind prefix \"" + name.second + "\" to an empty URI");
                bindings_.emplace_back(name.second, value);
            }
        }

        ParseEvent ev;
        ev.kind = ParseEvent::Kind::StartElement;
        ev.line = at;
        ev.name = resolve(raw_name, false, at);
        for (const auto& [name, value] : raw_attrs) {
            QName qn = (name.first.empty() && name.second == "xmlns")
                           ? QName(std::string(kns_xmlns), "xmlns", "")
                           : resolve(name, true, at);
            for (const XmlAttr& prev : ev.attributes)
                if (prev.name == qn)
                    fail(at, "duplicate attribute \"" + qn.lexical() + "\"");
            ev.attributes.push_back({std::move(qn), value});
        }
        for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it) {
            bool seen = false;
            for (const auto& [p, u] : ev.namespaces) seen = seen || p == it->first;
            if (!seen) ev.namespaces.emplace_back(it->first, it->second);
        }

        std::string lexical = raw_name.first.empty() ? raw_name.second
                                                     : raw_name.first + ":" + raw_name.second;
        if (!emit(ev)) return false;
        if (self_closing) {
            ParseEvent end;
            end.kind = ParseEvent::Kind::EndElement;
            end.name = ev.name;
            end.line = at;
            bindings_.resize(mark);
            return emit(end);
        }
        open_.push_back({ev.name, std::move(lexical), mark, at});
        return true;
    }

    bool parse_end_tag() {
        int at = line_;
        pos_ += 2;  // </
        auto raw = read_raw_name("end tag");
        skip_ws();
        expect('>', "end tag");
        std::string lexical = raw.first.empty() ? raw.second : raw.first + ":" + raw.second;
        if (open_.empty()) fail(at, "end tag \"" + lexical + "\" with no open element");
        if (lexical != open_.back().lexical_name)
            fail(at, "end tag \"" + lexical + "\" does not match open element \"" +
                         open_.back().lexical_name + "\"");
        ParseEvent ev;
        ev.kind = ParseEvent::Kind::EndElement;
        ev.name = open_.back().name;
        ev.line = at;
        bindings_.resize(open_.back().ns_mark);
        open_.pop_back();
        return emit(ev);
    }

    bool emit(const ParseEvent& ev) {
        if (!on_event_(ev)) {
            aborted_ = true;
            return false;
        }
        return true;
    }
};

}  // namespace detail

/// Streaming parse: events are delivered in document order and parser state
/// is bounded by element depth, not document size. The handler may return
/// false to stop parsing cleanly.
inline void parse_stream(std::string_view input, const EventHandler& handler) {
    detail::Tokenizer tok(input, handler);
    tok.run();
}

/// Replays parse events into an XmlDocument; usable with any balanced event
/// stream, not just the parser's.
class TreeBuilder {
public:
    void set_declared_encoding(std::string enc) { builder_.declared_encoding(std::move(enc)); }

    bool on_event(const ParseEvent& ev) {
        switch (ev.kind) {
            case ParseEvent::Kind::StartElement: {
                builder_.start_element(ev.name, ev.line);
                for (const XmlAttr& a : ev.attributes) builder_.attribute(a.name, a.value);
                break;
            }
            case ParseEvent::Kind::EndElement:
                builder_.end_element();
                break;
            case ParseEvent::Kind::Text:
                if (builder_.depth() > 0) builder_.text(ev.text, ev.line);
                break;
        }
        return true;
    }

    XmlDocument finish() { return builder_.finish(); }

private:
    XmlBuilder builder_;
};

/// Whole-document parse with namespaces resolved; throws WellFormednessError
/// with the offending line on malformed input.
inline XmlDocument parse_tree(std::string_view input) {
    TreeBuilder tree;
    EventHandler handler = [&](const ParseEvent& ev) { return tree.on_event(ev); };
    detail::Tokenizer tok(input, handler);
    tok.run();
    tree.set_declared_encoding(tok.declared_encoding);
    return tree.finish();
}

}  // namespace xmlkit
