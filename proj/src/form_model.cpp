#include "hwc/form_model.hpp"

#include <algorithm>
#include <unordered_set>

#include "hwc/text.hpp"
#include "hwc/url.hpp"

namespace hwc {

namespace {

using html::Node;

bool is_control_tag(const Node& n) {
    return n.kind == Node::Kind::Element &&
           (n.tag == "input" || n.tag == "select" || n.tag == "textarea" || n.tag == "button");
}

// Classified control, or nullopt for controls that never submit (reset,
// plain buttons, unnamed fields).
std::optional<FormControl> classify(const Node& n) {
    if (n.tag == "select") return FormControl::SelectList;
    if (n.tag == "textarea") return FormControl::TextBox;
    if (n.tag == "button") {
        std::string type = text::to_lower_ascii(n.attr_or("type", "submit"));
        if (type == "submit") return FormControl::Submit;
        return std::nullopt;
    }
    if (n.tag == "input") {
        std::string type = text::to_lower_ascii(n.attr_or("type", "text"));
        if (type == "hidden") return FormControl::Hidden;
        if (type == "submit" || type == "image") return FormControl::Submit;
        if (type == "checkbox") return FormControl::Checkbox;
        if (type == "radio") return FormControl::Radio;
        if (type == "reset" || type == "button") return std::nullopt;
        return FormControl::TextBox;  // text, search, email, number, ...
    }
    return std::nullopt;
}

std::string trim_label(std::string_view raw) {
    std::string s = text::collapse_ws(raw);
    while (!s.empty()) {
        char c = s.back();
        if (c == ':' || c == '*' || c == '?' || c == '!' || c == ';' || c == ',' || c == '.' ||
            c == '-')
            s.pop_back();
        else
            break;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

bool is_block_boundary(const Node& n) {
    return n.tag == "tr" || n.tag == "p" || n.tag == "div" || n.tag == "li" ||
           n.tag == "fieldset" || n.tag == "form" || n.tag == "table" || n.tag == "body";
}

bool subtree_contains(const Node& root, const Node& target) {
    for (const Node* cur = &target; cur; cur = cur->parent)
        if (cur == &root) return true;
    return false;
}

// Collects text nodes inside `scope` that precede `field` in document
// order. Text belonging to other controls, to labels of other fields, or
// to self-contained grids the field is not part of says nothing about it.
std::string nearest_preceding_text(const Node& scope, const Node& field) {
    std::string best;
    std::function<bool(const Node&)> walk = [&](const Node& n) -> bool {
        if (&n == &field) return true;  // stop: reached the control
        if (n.kind == Node::Kind::Text) {
            std::string t = trim_label(n.text);
            if (!t.empty()) best = std::move(t);
            return false;
        }
        if (n.kind == Node::Kind::Element) {
            if (n.tag == "select" || n.tag == "option" || n.tag == "button" ||
                n.tag == "script" || n.tag == "style" || n.tag == "textarea")
                return false;
            if ((n.tag == "label" || n.tag == "table") && !subtree_contains(n, field))
                return false;
        }
        for (const auto& c : n.children)
            if (walk(*c)) return true;
        return false;
    };
    walk(scope);
    return best;
}

const Node* enclosing_label(const Node& field) {
    for (const Node* cur = field.parent; cur && cur->kind == Node::Kind::Element;
         cur = cur->parent) {
        if (cur->tag == "label") return cur;
    }
    return nullptr;
}

const Node* label_scope(const Node& field) {
    const Node* block = nullptr;
    for (const Node* cur = field.parent; cur && cur->kind == Node::Kind::Element;
         cur = cur->parent) {
        if (cur->tag == "tr") return cur;  // row wins: cell text may sit in a sibling cell
        if (!block && is_block_boundary(*cur)) block = cur;
    }
    return block;
}

}  // namespace

FieldDomain FieldDomain::make_finite(std::vector<std::string> vals) {
    FieldDomain d;
    d.finite = true;
    std::unordered_set<std::string> seen;
    for (auto& v : vals)
        if (seen.insert(v).second) d.values.push_back(std::move(v));
    return d;
}

size_t SearchForm::fillable_count() const {
    return static_cast<size_t>(
        std::count_if(fields.begin(), fields.end(), [](const FormField& f) { return f.fillable(); }));
}

std::string extract_field_label(const html::Document& doc, const html::Node& field) {
    // 1. <label for=...> bound by id
    if (const std::string* id = field.attr("id"); id && !id->empty()) {
        for (Node* n : doc.nodes) {
            if (n->kind != Node::Kind::Element || n->tag != "label") continue;
            const std::string* f = n->attr("for");
            if (f && *f == *id) {
                std::string t = trim_label(html::inner_text(*n));
                if (!t.empty()) return t;
            }
        }
    }
    // 2. enclosing <label>
    if (const Node* lab = enclosing_label(field)) {
        std::string t = trim_label(html::inner_text(*lab));
        if (!t.empty()) return t;
    }
    // 3. nearest preceding text within the row or block
    if (const Node* scope = label_scope(field)) {
        std::string t = nearest_preceding_text(*scope, field);
        if (!t.empty()) return t;
    }
    // 4. placeholder
    if (const std::string* ph = field.attr("placeholder")) {
        std::string t = trim_label(*ph);
        if (!t.empty()) return t;
    }
    // 5. the parameter name itself
    return trim_label(field.attr_or("name"));
}

FieldDomain extract_field_domain(const html::Node& field) {
    if (field.is_element("select")) {
        std::vector<std::string> values;
        std::function<void(const Node&)> collect = [&](const Node& n) {
            if (n.is_element("option")) {
                if (const std::string* v = n.attr("value"))
                    values.push_back(*v);
                else
                    values.push_back(text::collapse_ws(html::inner_text(n)));
                return;
            }
            for (const auto& c : n.children) collect(*c);
        };
        collect(field);
        return FieldDomain::make_finite(std::move(values));
    }
    if (field.is_element("input")) {
        std::string type = text::to_lower_ascii(field.attr_or("type", "text"));
        if (type == "checkbox" || type == "radio")
            return FieldDomain::make_finite({field.attr_or("value", "on")});
    }
    return FieldDomain::infinite();
}

FieldDomain extract_group_domain(const std::vector<const html::Node*>& group) {
    std::vector<std::string> values;
    for (const Node* n : group) values.push_back(n->attr_or("value", "on"));
    return FieldDomain::make_finite(std::move(values));
}

std::vector<SearchForm> detect_forms(const WebPage& page, std::vector<std::string>* diagnostics) {
    std::vector<SearchForm> forms;
    html::Document doc = html::parse(page.body);
    std::vector<Node*> form_nodes = doc.elements_by_tag("form");
    if (form_nodes.empty()) {
        if (diagnostics && page.body.find('<') == std::string::npos && !page.body.empty())
            diagnostics->push_back("no markup found on " + page.url);
        return forms;
    }

    for (Node* fnode : form_nodes) {
        SearchForm form;
        form.source_url = page.url;
        std::string action = fnode->attr_or("action");
        form.action_url = action.empty() ? url::canonicalize(page.url)
                                         : url::resolve(page.url, action);
        form.method = text::equals_ci(fnode->attr_or("method", "get"), "post") ? HttpMethod::Post
                                                                               : HttpMethod::Get;

        // gather controls in document order
        std::vector<Node*> controls;
        std::function<void(Node&)> collect = [&](Node& n) {
            if (is_control_tag(n)) controls.push_back(&n);
            for (auto& c : n.children) collect(*c);
        };
        collect(*fnode);

        // radio/checkbox groups share a submission name; merge them into a
        // single finite-domain field anchored at the first control
        std::vector<std::vector<const Node*>> groups;
        std::vector<std::pair<std::string, FormControl>> group_keys;
        auto group_of = [&](const std::string& name, FormControl ctl) -> std::vector<const Node*>& {
            for (size_t i = 0; i < group_keys.size(); ++i)
                if (group_keys[i].first == name && group_keys[i].second == ctl) return groups[i];
            group_keys.emplace_back(name, ctl);
            groups.emplace_back();
            return groups.back();
        };

        std::unordered_set<std::string> grouped_done;
        for (Node* c : controls) {
            auto ctl = classify(*c);
            if (!ctl) continue;
            std::string name = c->attr_or("name");
            if (name.empty()) continue;  // unnamed controls never submit

            if (*ctl == FormControl::Radio || *ctl == FormControl::Checkbox)
                group_of(name, *ctl).push_back(c);
        }

        for (Node* c : controls) {
            auto ctl = classify(*c);
            if (!ctl) continue;
            std::string name = c->attr_or("name");
            if (name.empty()) continue;

            FormField field;
            field.name = name;
            field.control = *ctl;

            if (*ctl == FormControl::Radio || *ctl == FormControl::Checkbox) {
                std::string key = name + (*ctl == FormControl::Radio ? "\x01r" : "\x01c");
                if (!grouped_done.insert(key).second) continue;  // group already emitted
                const auto& group = group_of(name, *ctl);
                field.domain = extract_group_domain(group);
                field.label = extract_field_label(doc, *group.front());
                for (const Node* g : group) {
                    if (g->attr("checked")) {
                        field.default_value = g->attr_or("value", "on");
                        break;
                    }
                }
            } else if (*ctl == FormControl::SelectList) {
                field.domain = extract_field_domain(*c);
                field.label = extract_field_label(doc, *c);
                std::function<const Node*(const Node&)> selected = [&](const Node& n) -> const Node* {
                    if (n.is_element("option") && n.attr("selected")) return &n;
                    for (const auto& ch : n.children)
                        if (const Node* hit = selected(*ch)) return hit;
                    return nullptr;
                };
                if (const Node* sel = selected(*c))
                    field.default_value = sel->attr_or("value", text::collapse_ws(html::inner_text(*sel)));
                else if (!field.domain.values.empty())
                    field.default_value = field.domain.values.front();
            } else if (*ctl == FormControl::Hidden || *ctl == FormControl::Submit) {
                field.domain = FieldDomain::infinite();
                field.label = name;
                if (const std::string* v = c->attr("value")) field.default_value = *v;
            } else {  // text boxes / textarea
                field.domain = FieldDomain::infinite();
                field.label = extract_field_label(doc, *c);
                if (c->is_element("textarea")) {
                    std::string t = text::collapse_ws(html::inner_text(*c));
                    if (!t.empty()) field.default_value = t;
                } else if (const std::string* v = c->attr("value")) {
                    field.default_value = *v;
                }
            }
            form.fields.push_back(std::move(field));
        }

        size_t fillable = form.fillable_count();
        if (fillable == 0) {
            if (diagnostics)
                diagnostics->push_back("form without fillable fields skipped on " + page.url);
            continue;
        }
        form.kind = fillable >= 2 ? FormKind::MultiAttribute : FormKind::SingleAttribute;
        forms.push_back(std::move(form));
    }
    return forms;
}

}  // namespace hwc
