#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hwc::html {

// A deliberately small DOM: enough structure for form discovery, label
// association, and repeated-region detection. The parser is tolerant —
// any byte sequence yields a tree, never an exception.

struct Node {
    enum class Kind { Document, Element, Text };

    Kind kind = Kind::Element;
    std::string tag;                                          // elements; lowercased
    std::string text;                                         // text nodes; entities decoded
    std::vector<std::pair<std::string, std::string>> attrs;   // document order, names lowercased
    std::vector<std::unique_ptr<Node>> children;
    Node* parent = nullptr;
    int doc_index = 0;  // pre-order position

    const std::string* attr(std::string_view name) const;
    std::string attr_or(std::string_view name, std::string_view fallback = "") const;
    bool is_element(std::string_view t) const { return kind == Kind::Element && tag == t; }
};

struct Document {
    std::unique_ptr<Node> root;       // Kind::Document
    std::vector<Node*> nodes;         // pre-order, indexable by doc_index

    void for_each_element(const std::function<void(Node&)>& fn) const;
    std::vector<Node*> elements_by_tag(std::string_view tag) const;
};

Document parse(std::string_view html);

// Collapsed visible text of a subtree; script/style/select/textarea/button
// subtrees contribute nothing.
std::string inner_text(const Node& n);

// "html/body/table/tr" — tag names from the root down to this element.
std::string tag_path(const Node& n);

// &amp; &#nn; &#xhh; and the common named entities.
std::string decode_entities(std::string_view s);

// Charset declared via <meta charset> or <meta http-equiv="content-type">.
std::optional<std::string> sniff_meta_charset(std::string_view html);

// Decode a raw body to clean UTF-8: honors a declared charset when it is
// one we support (utf-8, ascii, iso-8859-1, windows-1252), otherwise treats
// the body as UTF-8 with lossy replacement.
std::string decode_body(std::string_view bytes, std::string_view declared_charset);

}  // namespace hwc::html
