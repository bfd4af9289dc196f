#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "hwc/html.hpp"

namespace hwc {

enum class HttpMethod { Get, Post };

// One fetched page. `url` is canonical absolute; `body` is clean UTF-8.
struct WebPage {
    std::string url;
    std::string body;
    std::chrono::system_clock::time_point fetched_at{};
    int status = 200;
};

enum class FormControl { TextBox, SelectList, Checkbox, Radio, Hidden, Submit };

struct FieldDomain {
    bool finite = false;
    std::vector<std::string> values;  // deduplicated, page order; finite only

    static FieldDomain infinite() { return {}; }
    static FieldDomain make_finite(std::vector<std::string> vals);
};

struct FormField {
    std::string name;   // submission parameter name, never empty
    std::string label;  // human label resolved from surrounding markup
    FormControl control = FormControl::TextBox;
    FieldDomain domain;
    std::optional<std::string> default_value;

    bool fillable() const {
        return control != FormControl::Hidden && control != FormControl::Submit;
    }
};

enum class FormKind { SingleAttribute, MultiAttribute };

struct SearchForm {
    std::string source_url;
    std::string action_url;  // absolute, resolved against source_url
    HttpMethod method = HttpMethod::Get;
    std::vector<FormField> fields;  // document order, hidden/submit included
    FormKind kind = FormKind::SingleAttribute;

    size_t fillable_count() const;
};

// One SearchForm per FORM element carrying at least one fillable field.
// Unparseable or formless pages yield an empty list; a note lands in
// `diagnostics` when given.
std::vector<SearchForm> detect_forms(const WebPage& page,
                                     std::vector<std::string>* diagnostics = nullptr);

// Label resolution precedence: <label for=id>, enclosing <label>, nearest
// preceding text in the same table row / block, placeholder, name.
std::string extract_field_label(const html::Document& doc, const html::Node& field);

// select -> finite over option values; textarea/text input -> infinite.
// Radio/checkbox groups are handled by detect_forms, which merges same-name
// controls before calling the group overload.
FieldDomain extract_field_domain(const html::Node& field);
FieldDomain extract_group_domain(const std::vector<const html::Node*>& group);

}  // namespace hwc
