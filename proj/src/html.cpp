#include "hwc/html.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_map>

#include "hwc/text.hpp"

namespace hwc::html {

namespace {

bool is_void_element(std::string_view tag) {
    static const std::array<std::string_view, 14> kVoid = {
        "area", "base", "br",   "col",  "embed",  "hr",    "img",
        "input", "link", "meta", "param", "source", "track", "wbr"};
    for (auto v : kVoid)
        if (tag == v) return true;
    return false;
}

bool is_raw_text_element(std::string_view tag) {
    return tag == "script" || tag == "style" || tag == "textarea" || tag == "title";
}

// Tags that implicitly close an open instance of themselves (and, for table
// parts, their smaller units).
bool closes_same(std::string_view tag) {
    return tag == "li" || tag == "option" || tag == "p" || tag == "tr" || tag == "td" ||
           tag == "th" || tag == "dt" || tag == "dd";
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

void append_cp_utf8(std::string& out, uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

const std::unordered_map<std::string, const char*>& named_entities() {
    static const std::unordered_map<std::string, const char*> kMap = {
        {"amp", "&"},        {"lt", "<"},         {"gt", ">"},
        {"quot", "\""},      {"apos", "'"},       {"nbsp", "\xC2\xA0"},
        {"copy", "\xC2\xA9"}, {"reg", "\xC2\xAE"}, {"trade", "\xE2\x84\xA2"},
        {"mdash", "\xE2\x80\x94"}, {"ndash", "\xE2\x80\x93"}, {"hellip", "\xE2\x80\xA6"},
        {"lsquo", "\xE2\x80\x98"}, {"rsquo", "\xE2\x80\x99"}, {"ldquo", "\xE2\x80\x9C"},
        {"rdquo", "\xE2\x80\x9D"}, {"euro", "\xE2\x82\xAC"},  {"pound", "\xC2\xA3"},
        {"yen", "\xC2\xA5"},       {"cent", "\xC2\xA2"},      {"middot", "\xC2\xB7"},
        {"bull", "\xE2\x80\xA2"},  {"laquo", "\xC2\xAB"},     {"raquo", "\xC2\xBB"},
    };
    return kMap;
}

struct Tokenizer {
    std::string_view in;
    size_t pos = 0;

    bool done() const { return pos >= in.size(); }
    char peek(size_t off = 0) const { return pos + off < in.size() ? in[pos + off] : '\0'; }

    bool starts_with_ci(std::string_view s) const {
        if (pos + s.size() > in.size()) return false;
        return text::equals_ci(in.substr(pos, s.size()), s);
    }
};

struct TagToken {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    bool closing = false;
    bool self_closing = false;
};

// Parses the tag at `t.pos` (which points at '<'). Returns nullopt when the
// '<' does not open a real tag; the caller then treats it as text.
std::optional<TagToken> parse_tag(Tokenizer& t) {
    size_t save = t.pos;
    ++t.pos;  // '<'
    TagToken tok;
    if (t.peek() == '/') {
        tok.closing = true;
        ++t.pos;
    }
    if (!std::isalpha(static_cast<unsigned char>(t.peek()))) {
        t.pos = save;
        return std::nullopt;
    }
    std::string name;
    while (!t.done() && is_name_char(t.peek())) name.push_back(t.in[t.pos++]);
    tok.name = text::to_lower_ascii(name);

    // attributes
    while (!t.done()) {
        while (!t.done() && std::isspace(static_cast<unsigned char>(t.peek()))) ++t.pos;
        if (t.done()) break;
        char c = t.peek();
        if (c == '>') {
            ++t.pos;
            return tok;
        }
        if (c == '/') {
            ++t.pos;
            if (t.peek() == '>') {
                ++t.pos;
                tok.self_closing = true;
                return tok;
            }
            continue;
        }
        // attribute name
        std::string aname;
        while (!t.done()) {
            char ac = t.peek();
            if (ac == '=' || ac == '>' || ac == '/' ||
                std::isspace(static_cast<unsigned char>(ac)))
                break;
            aname.push_back(t.in[t.pos++]);
        }
        if (aname.empty()) {
            ++t.pos;  // stray char, skip it
            continue;
        }
        std::string avalue;
        while (!t.done() && std::isspace(static_cast<unsigned char>(t.peek()))) ++t.pos;
        if (t.peek() == '=') {
            ++t.pos;
            while (!t.done() && std::isspace(static_cast<unsigned char>(t.peek()))) ++t.pos;
            char q = t.peek();
            if (q == '"' || q == '\'') {
                ++t.pos;
                while (!t.done() && t.peek() != q) avalue.push_back(t.in[t.pos++]);
                if (!t.done()) ++t.pos;
            } else {
                while (!t.done() && t.peek() != '>' &&
                       !std::isspace(static_cast<unsigned char>(t.peek())))
                    avalue.push_back(t.in[t.pos++]);
            }
        }
        tok.attrs.emplace_back(text::to_lower_ascii(aname), decode_entities(avalue));
    }
    return tok;  // input ended inside the tag; keep what we have
}

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        std::string_view body = s.substr(i + 1, semi - i - 1);
        if (!body.empty() && body[0] == '#') {
            uint32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (size_t k = 2; k < body.size() && ok; ++k) {
                    char c = body[k];
                    cp <<= 4;
                    if (c >= '0' && c <= '9') cp |= static_cast<uint32_t>(c - '0');
                    else if (c >= 'a' && c <= 'f') cp |= static_cast<uint32_t>(c - 'a' + 10);
                    else if (c >= 'A' && c <= 'F') cp |= static_cast<uint32_t>(c - 'A' + 10);
                    else ok = false;
                    if (cp > 0x10FFFF) ok = false;
                }
            } else {
                for (size_t k = 1; k < body.size() && ok; ++k) {
                    char c = body[k];
                    if (c < '0' || c > '9') { ok = false; break; }
                    cp = cp * 10 + static_cast<uint32_t>(c - '0');
                    if (cp > 0x10FFFF) ok = false;
                }
            }
            if (ok) {
                append_cp_utf8(out, cp);
                i = semi;
                continue;
            }
        } else {
            auto it = named_entities().find(std::string(body));
            if (it != named_entities().end()) {
                out += it->second;
                i = semi;
                continue;
            }
        }
        out.push_back('&');
    }
    return out;
}

Document parse(std::string_view html) {
    Document doc;
    doc.root = std::make_unique<Node>();
    doc.root->kind = Node::Kind::Document;

    std::vector<Node*> stack{doc.root.get()};
    Tokenizer t{html};

    auto add_text = [&](std::string_view raw) {
        if (raw.empty()) return;
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::Text;
        node->text = decode_entities(raw);
        node->parent = stack.back();
        stack.back()->children.push_back(std::move(node));
    };

    while (!t.done()) {
        if (t.peek() != '<') {
            size_t next = t.in.find('<', t.pos);
            if (next == std::string_view::npos) next = t.in.size();
            add_text(t.in.substr(t.pos, next - t.pos));
            t.pos = next;
            continue;
        }
        if (t.starts_with_ci("<!--")) {
            size_t end = t.in.find("-->", t.pos + 4);
            t.pos = end == std::string_view::npos ? t.in.size() : end + 3;
            continue;
        }
        if (t.peek(1) == '!' || t.peek(1) == '?') {
            size_t end = t.in.find('>', t.pos);
            t.pos = end == std::string_view::npos ? t.in.size() : end + 1;
            continue;
        }
        auto tok = parse_tag(t);
        if (!tok) {
            add_text(t.in.substr(t.pos, 1));
            ++t.pos;
            continue;
        }
        if (tok->closing) {
            // pop to the matching open element; ignore unmatched closers
            for (size_t i = stack.size(); i-- > 1;) {
                if (stack[i]->tag == tok->name) {
                    stack.resize(i);
                    break;
                }
            }
            continue;
        }
        if (closes_same(tok->name)) {
            std::string_view n = tok->name;
            for (size_t i = stack.size(); i-- > 1;) {
                std::string_view open = stack[i]->tag;
                bool should_close =
                    open == n || ((n == "td" || n == "th") && (open == "td" || open == "th")) ||
                    (n == "tr" && (open == "td" || open == "th")) ||
                    ((n == "dt" || n == "dd") && (open == "dt" || open == "dd"));
                if (should_close) {
                    stack.resize(i);
                    break;
                }
                // don't let the implied close escape a structural container
                if (open == "table" || open == "ul" || open == "ol" || open == "dl" ||
                    open == "form" || open == "div" || open == "body")
                    break;
            }
        }
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::Element;
        node->tag = tok->name;
        node->attrs = std::move(tok->attrs);
        node->parent = stack.back();
        Node* raw_node = node.get();
        stack.back()->children.push_back(std::move(node));

        if (tok->self_closing || is_void_element(raw_node->tag)) continue;

        if (is_raw_text_element(raw_node->tag)) {
            std::string close = "</" + raw_node->tag;
            size_t end = t.pos;
            while (end < t.in.size()) {
                size_t cand = t.in.find('<', end);
                if (cand == std::string_view::npos) {
                    end = t.in.size();
                    break;
                }
                Tokenizer probe{t.in, cand};
                if (probe.starts_with_ci(close)) {
                    end = cand;
                    break;
                }
                end = cand + 1;
            }
            std::string_view content = t.in.substr(t.pos, end - t.pos);
            if (raw_node->tag == "textarea" || raw_node->tag == "title") {
                // text content is meaningful for these
                auto tn = std::make_unique<Node>();
                tn->kind = Node::Kind::Text;
                tn->text = decode_entities(content);
                tn->parent = raw_node;
                raw_node->children.push_back(std::move(tn));
            }
            t.pos = end;
            if (t.pos < t.in.size()) {
                size_t gt = t.in.find('>', t.pos);
                t.pos = gt == std::string_view::npos ? t.in.size() : gt + 1;
            }
            continue;
        }
        stack.push_back(raw_node);
    }

    // index nodes in pre-order
    int counter = 0;
    std::function<void(Node*)> index = [&](Node* n) {
        n->doc_index = counter++;
        doc.nodes.push_back(n);
        for (auto& c : n->children) index(c.get());
    };
    index(doc.root.get());
    return doc;
}

const std::string* Node::attr(std::string_view name) const {
    for (const auto& [k, v] : attrs)
        if (k == name) return &v;
    return nullptr;
}

std::string Node::attr_or(std::string_view name, std::string_view fallback) const {
    const std::string* v = attr(name);
    return v ? *v : std::string(fallback);
}

void Document::for_each_element(const std::function<void(Node&)>& fn) const {
    for (Node* n : nodes)
        if (n->kind == Node::Kind::Element) fn(*n);
}

std::vector<Node*> Document::elements_by_tag(std::string_view tag) const {
    std::vector<Node*> out;
    for (Node* n : nodes)
        if (n->kind == Node::Kind::Element && n->tag == tag) out.push_back(n);
    return out;
}

namespace {

void collect_text(const Node& n, std::string& out, bool is_root) {
    if (n.kind == Node::Kind::Text) {
        out += n.text;
        out.push_back(' ');
        return;
    }
    // control/script text is not page text, unless the control itself is
    // the node being asked about
    if (!is_root && n.kind == Node::Kind::Element &&
        (n.tag == "script" || n.tag == "style" || n.tag == "select" || n.tag == "textarea" ||
         n.tag == "button" || n.tag == "option"))
        return;
    for (const auto& c : n.children) collect_text(*c, out, false);
}

}  // namespace

std::string inner_text(const Node& n) {
    std::string raw;
    collect_text(n, raw, true);
    return text::collapse_ws(raw);
}

std::string tag_path(const Node& n) {
    std::vector<const Node*> chain;
    for (const Node* cur = &n; cur && cur->kind == Node::Kind::Element; cur = cur->parent)
        chain.push_back(cur);
    std::string out;
    for (size_t i = chain.size(); i-- > 0;) {
        out += chain[i]->tag;
        if (i) out.push_back('/');
    }
    return out;
}

std::optional<std::string> sniff_meta_charset(std::string_view html) {
    // cheap scan over a prefix; meta charset sits in <head>
    Document doc = parse(std::string_view(html.substr(0, std::min<size_t>(html.size(), 4096))));
    for (Node* n : doc.nodes) {
        if (n->kind != Node::Kind::Element || n->tag != "meta") continue;
        if (const std::string* cs = n->attr("charset")) return text::to_lower_ascii(*cs);
        const std::string* equiv = n->attr("http-equiv");
        const std::string* content = n->attr("content");
        if (equiv && content && text::equals_ci(*equiv, "content-type")) {
            std::string lc = text::to_lower_ascii(*content);
            size_t p = lc.find("charset=");
            if (p != std::string::npos) {
                std::string cs = lc.substr(p + 8);
                size_t end = cs.find_first_of("; \t\"'");
                if (end != std::string::npos) cs.resize(end);
                if (!cs.empty()) return cs;
            }
        }
    }
    return std::nullopt;
}

std::string decode_body(std::string_view bytes, std::string_view declared_charset) {
    std::string charset = text::to_lower_ascii(declared_charset);
    if (charset.empty()) {
        if (auto sniffed = sniff_meta_charset(bytes)) charset = *sniffed;
    }
    if (charset == "iso-8859-1" || charset == "latin1" || charset == "latin-1")
        return text::latin1_to_utf8(bytes);
    if (charset == "windows-1252" || charset == "cp1252") return text::win1252_to_utf8(bytes);
    // utf-8, ascii, unknown, or absent: lossy UTF-8
    return text::sanitize_utf8(bytes);
}

}  // namespace hwc::html
