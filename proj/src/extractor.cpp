#include "hwc/extractor.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <unordered_map>

#include "hwc/text.hpp"

namespace hwc {

namespace {

using html::Node;

constexpr size_t kIsbn = 0, kTitle = 1, kAuthor = 2, kPublisher = 3, kKeywords = 4, kPrice = 5,
                 kAvailability = 6;

const std::array<const char*, DataRecord::kSlotCount> kSlotNames = {
    "isbn", "title", "author", "publisher", "keywords", "price", "availability"};

bool is_candidate_container(const Node& n) {
    return n.tag == "tr" || n.tag == "li" || n.tag == "div" || n.tag == "p" ||
           n.tag == "article" || n.tag == "section" || n.tag == "dl";
}

std::vector<const Node*> cell_children(const Node& n) {
    std::vector<const Node*> cells;
    bool table_row = n.tag == "tr";
    for (const auto& c : n.children) {
        if (c->kind != Node::Kind::Element) continue;
        if (table_row) {
            if (c->tag == "td" || c->tag == "th") cells.push_back(c.get());
        } else if (c->tag == "span" || c->tag == "div" || c->tag == "p" || c->tag == "dt" ||
                   c->tag == "dd" || c->tag == "li" || c->tag == "b" || c->tag == "strong" ||
                   c->tag == "em" || c->tag == "a" || c->tag == "td" || c->tag == "th") {
            cells.push_back(c.get());
        }
    }
    return cells;
}

bool is_header_node(const Node& n) {
    auto cells = cell_children(n);
    if (cells.empty()) return false;
    for (const Node* c : cells)
        if (c->tag != "th") return false;
    return true;
}

size_t index_among_same_tag(const Node& parent, const Node& cell) {
    size_t idx = 0;
    for (const auto& c : parent.children) {
        if (c->kind != Node::Kind::Element) continue;
        if (c.get() == &cell) return idx;
        if (c->tag == cell.tag) ++idx;
    }
    return idx;
}

const Node* child_by_tag_index(const Node& parent, const std::string& tag, size_t index) {
    size_t idx = 0;
    for (const auto& c : parent.children) {
        if (c->kind != Node::Kind::Element || c->tag != tag) continue;
        if (idx == index) return c.get();
        ++idx;
    }
    return nullptr;
}

struct Candidate {
    std::string signature;
    std::vector<const Node*> nodes;
};

// Groups repeating text-bearing containers by tag path and returns them
// ordered by (count desc, depth desc, first appearance). Header rows are
// label chrome, not data; they do not count as repetitions.
std::vector<Candidate> repetition_candidates(const html::Document& doc) {
    std::map<std::string, std::vector<const Node*>> groups;
    for (const Node* n : doc.nodes) {
        if (n->kind != Node::Kind::Element || !is_candidate_container(*n)) continue;
        if (is_header_node(*n)) continue;
        if (html::inner_text(*n).empty()) continue;
        groups[html::tag_path(*n)].push_back(n);
    }
    std::vector<Candidate> out;
    for (auto& [sig, nodes] : groups) out.push_back({sig, std::move(nodes)});
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
        size_t da = std::count(a.signature.begin(), a.signature.end(), '/');
        size_t db = std::count(b.signature.begin(), b.signature.end(), '/');
        if (da != db) return da > db;
        return a.nodes.front()->doc_index < b.nodes.front()->doc_index;
    });
    return out;
}

size_t max_repetition_count(const html::Document& doc) {
    auto cands = repetition_candidates(doc);
    return cands.empty() ? 0 : cands.front().nodes.size();
}

bool looks_like_isbn(std::string_view s) {
    size_t digits = 0;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c)))
            ++digits;
        else if (c != ' ' && c != '-')
            return false;
    }
    return digits == 13;
}

bool looks_like_price(std::string_view sv) {
    std::string s = text::collapse_ws(sv);
    if (s.empty()) return false;
    static const std::array<std::string_view, 7> kMarkers = {"$",  "\xE2\x82\xAC", "\xC2\xA3",
                                                             "\xE2\x82\xB9", "rs.", "usd", "inr"};
    std::string lc = text::to_lower_ascii(s);
    for (auto m : kMarkers) {
        if (lc.size() > m.size() && lc.compare(0, m.size(), m) == 0) {
            size_t p = m.size();
            while (p < lc.size() && lc[p] == ' ') ++p;
            if (p < lc.size() && std::isdigit(static_cast<unsigned char>(lc[p]))) return true;
        }
    }
    return false;
}

// "Writer: Hawkins, Jack" -> {"Writer", "Hawkins, Jack"}
std::optional<std::pair<std::string, std::string>> split_inline_label(const std::string& cell_text) {
    size_t colon = cell_text.find(':');
    if (colon == std::string::npos || colon == 0 || colon > 40) return std::nullopt;
    std::string label = text::collapse_ws(cell_text.substr(0, colon));
    std::string value = text::collapse_ws(cell_text.substr(colon + 1));
    if (label.empty()) return std::nullopt;
    return std::make_pair(label, value);
}

std::optional<size_t> availability_slot(std::string_view label) {
    std::string norm = normalize_phrase(label);
    if (norm == "availability" || norm == "status" || norm == "stock" || norm == "in stock")
        return kAvailability;
    return std::nullopt;
}

// Best concept for a header/label text under the active matcher, then the
// slot that concept names.
std::optional<size_t> map_label_to_slot(const std::string& label, const LabelLexicon& lexicon,
                                        const std::vector<std::string>& concepts, double threshold,
                                        MatcherMode mode) {
    double best = 0.0;
    const std::string* best_concept = nullptr;
    for (const auto& concept_label : concepts) {
        double s = score_label(label, concept_label, lexicon, mode);
        if (s > best) {
            best = s;
            best_concept = &concept_label;
        }
    }
    if (best_concept && best >= threshold)
        if (auto slot = slot_for_concept(*best_concept)) return slot;
    if (auto slot = availability_slot(label)) return slot;
    // a header that names a slot directly still counts, even when the
    // concept list omits it (e.g. a Price column)
    return slot_for_concept(label);
}

}  // namespace

std::optional<std::string>& DataRecord::slot(size_t i) {
    switch (i) {
        case kIsbn: return isbn;
        case kTitle: return title;
        case kAuthor: return author;
        case kPublisher: return publisher;
        case kKeywords: return keywords;
        case kPrice: return price;
        default: return availability;
    }
}

const std::optional<std::string>& DataRecord::slot(size_t i) const {
    return const_cast<DataRecord*>(this)->slot(i);
}

const char* DataRecord::slot_name(size_t i) {
    return kSlotNames[i];
}

std::string DataRecord::dedup_key() const {
    std::string key = text::fold_key(title ? *title : "");
    key += "\xC2\xA7";
    key += text::fold_key(author ? *author : "");
    return key;
}

std::optional<size_t> slot_for_concept(std::string_view concept_label) {
    static const std::unordered_map<std::string, size_t> kMap = {
        {"isbn", kIsbn},          {"title", kTitle},       {"subject", kTitle},
        {"author", kAuthor},      {"writer", kAuthor},     {"written", kAuthor},
        {"publisher", kPublisher}, {"published", kPublisher}, {"press", kPublisher},
        {"keywords", kKeywords},  {"keyword", kKeywords},  {"price", kPrice},
        {"cost", kPrice},         {"availability", kAvailability},
    };
    auto it = kMap.find(normalize_phrase(concept_label));
    if (it == kMap.end()) return std::nullopt;
    return it->second;
}

bool is_error_page(const WebPage& page, const ErrorPageConfig& config) {
    if (page.status >= 400) return true;
    for (const auto& phrase : config.phrases)
        if (text::contains_ci(page.body, phrase)) return true;
    html::Document doc = html::parse(page.body);
    return max_repetition_count(doc) < config.min_repetitions;
}

RecordTemplate detect_template(const WebPage& page, const LabelLexicon& lexicon,
                               const std::vector<std::string>& concepts, double threshold,
                               MatcherMode mode, size_t min_repetitions) {
    html::Document doc = html::parse(page.body);
    auto cands = repetition_candidates(doc);
    if (cands.empty() || cands.front().nodes.size() < min_repetitions)
        throw NoTemplateError("no region repeats " + std::to_string(min_repetitions) +
                              " times on " + page.url);
    const Candidate& winner = cands.front();

    RecordTemplate tmpl;
    tmpl.signature = winner.signature;

    // column headers: the th row under the repetitions' shared parent
    // (same table, or a thead) when one exists
    const Node* first_data = winner.nodes.front();
    std::vector<std::string> headers;
    if (first_data->parent) {
        const Node* scope = first_data->parent;
        if (scope->parent && scope->tag != "table") scope = scope->parent;
        std::function<void(const Node&)> find_th_row = [&](const Node& n) {
            if (!headers.empty()) return;
            if (n.kind == Node::Kind::Element && is_header_node(n)) {
                for (const Node* c : cell_children(n)) headers.push_back(html::inner_text(*c));
                return;
            }
            for (const auto& c : n.children) find_th_row(*c);
        };
        find_th_row(*scope);
    }

    auto cells = cell_children(*first_data);
    std::vector<bool> slot_taken(DataRecord::kSlotCount, false);
    for (size_t i = 0; i < cells.size(); ++i) {
        const Node* cell = cells[i];
        RecordTemplate::Field field;
        field.tag = cell->tag;
        field.child_index = index_among_same_tag(*first_data, *cell);

        std::string cell_text = html::inner_text(*cell);
        std::optional<size_t> slot;

        if (auto inline_lv = split_inline_label(cell_text)) {
            slot = map_label_to_slot(inline_lv->first, lexicon, concepts, threshold, mode);
            if (slot) field.inline_label = inline_lv->first;
        }
        if (!slot && i < headers.size() && !headers[i].empty()) {
            slot = map_label_to_slot(headers[i], lexicon, concepts, threshold, mode);
            if (!slot) tmpl.unmatched_labels.push_back(headers[i]);
        }
        if (!slot) {
            // value shape across a few repetitions
            std::vector<std::string> samples;
            for (const Node* n : winner.nodes) {
                if (const Node* c = child_by_tag_index(*n, field.tag, field.child_index)) {
                    std::string t = html::inner_text(*c);
                    if (!t.empty()) samples.push_back(std::move(t));
                }
                if (samples.size() >= 5) break;
            }
            if (!samples.empty()) {
                if (std::all_of(samples.begin(), samples.end(),
                                [](const std::string& s) { return looks_like_isbn(s); }))
                    slot = kIsbn;
                else if (std::all_of(samples.begin(), samples.end(),
                                     [](const std::string& s) { return looks_like_price(s); }))
                    slot = kPrice;
            }
        }
        if (!slot || slot_taken[*slot]) continue;
        slot_taken[*slot] = true;
        field.slot = *slot;
        tmpl.fields.push_back(std::move(field));
    }
    if (tmpl.fields.empty())
        throw NoTemplateError("repeating region carries no mappable cells on " + page.url,
                              std::move(tmpl.unmatched_labels));
    return tmpl;
}

std::vector<DataRecord> extract_records(const WebPage& page, const RecordTemplate& tmpl,
                                        std::vector<std::string>* diagnostics) {
    html::Document doc = html::parse(page.body);
    std::vector<DataRecord> records;
    std::string now = text::iso8601_utc(std::chrono::system_clock::now());
    for (const Node* n : doc.nodes) {
        if (n->kind != Node::Kind::Element || html::tag_path(*n) != tmpl.signature) continue;
        if (is_header_node(*n)) continue;
        DataRecord rec;
        rec.source_url = page.url;
        rec.extracted_at = now;
        for (const auto& field : tmpl.fields) {
            const Node* cell = child_by_tag_index(*n, field.tag, field.child_index);
            if (!cell) continue;
            std::string value = html::inner_text(*cell);
            if (field.inline_label) {
                auto lv = split_inline_label(value);
                // a cell whose label does not match is some other field
                if (!lv || !text::equals_ci(lv->first, *field.inline_label)) continue;
                value = lv->second;
            }
            value = text::collapse_ws(value);
            if (!value.empty()) rec.slot(field.slot) = value;
        }
        if (!rec.has_identity()) {
            if (diagnostics)
                diagnostics->push_back("record without title or isbn dropped on " + page.url);
            continue;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<DataRecord> filter_invalid(std::vector<DataRecord> records,
                                       const InvalidFilterConfig& config) {
    std::vector<DataRecord> kept;
    kept.reserve(records.size());
    for (auto& rec : records) {
        bool invalid = false;
        for (size_t i = 0; i < DataRecord::kSlotCount && !invalid; ++i) {
            const auto& v = rec.slot(i);
            if (!v) continue;
            for (const auto& phrase : config.phrases) {
                if (text::contains_ci(*v, phrase)) {
                    invalid = true;
                    break;
                }
            }
        }
        if (!invalid) kept.push_back(std::move(rec));
    }
    return kept;
}

}  // namespace hwc
