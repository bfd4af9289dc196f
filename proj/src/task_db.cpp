#include "hwc/task_db.hpp"

#include <algorithm>
#include <unordered_set>

#include "hwc/text.hpp"
#include "hwc/tsv.hpp"

namespace hwc {

namespace {

constexpr std::string_view kSourceCol = "@source";
constexpr std::string_view kFetchedCol = "@fetched";

}  // namespace

std::optional<size_t> TaskDatabase::concept_index(std::string_view label) const {
    for (size_t i = 0; i < concepts_.size(); ++i)
        if (text::equals_ci(concepts_[i].canonical_label, label)) return i;
    return std::nullopt;
}

size_t TaskDatabase::total_value_count() const {
    size_t n = 0;
    for (const auto& c : concepts_) n += c.values.size();
    return n;
}

bool TaskDatabase::known_value(const Concept& c, const std::string& value) const {
    std::string folded = text::fold_value(value);
    for (const auto& v : c.values)
        if (text::fold_value(v) == folded) return true;
    return false;
}

Concept& TaskDatabase::concept_or_create(std::string_view label) {
    if (auto idx = concept_index(label)) return concepts_[*idx];
    concepts_.push_back(Concept{std::string(label), {}, 0});
    for (auto& row : rows_) row.cells.resize(concepts_.size());
    return concepts_.back();
}

std::vector<std::string> TaskDatabase::lookup_values(std::string_view concept_label, size_t k) {
    auto idx = concept_index(concept_label);
    if (!idx) throw UnknownConceptError("unknown concept: " + std::string(concept_label));
    Concept& c = concepts_[*idx];
    std::vector<std::string> out;
    if (c.values.empty() || k == 0) return out;
    size_t n = std::min(k, c.values.size());
    out.reserve(n);
    for (size_t i = 0; i < n; ++i)
        out.push_back(c.values[(c.last_used_index + i) % c.values.size()]);
    c.last_used_index = (c.last_used_index + n) % c.values.size();
    return out;
}

size_t TaskDatabase::update(std::string_view concept_label,
                            const std::vector<std::string>& new_values,
                            const std::string& source_url, const std::string& fetched_at) {
    Concept& c = concept_or_create(concept_label);
    size_t col = *concept_index(concept_label);
    size_t inserted = 0;
    for (const auto& raw : new_values) {
        std::string value = text::collapse_ws(raw);
        if (value.empty() || known_value(c, value)) continue;
        c.values.push_back(value);
        TaskRow row;
        row.cells.assign(concepts_.size(), "");
        row.cells[col] = value;
        row.source_url = source_url;
        row.fetched_at = fetched_at;
        rows_.push_back(std::move(row));
        ++inserted;
    }
    return inserted;
}

void TaskDatabase::add_row(const std::vector<std::pair<std::string, std::string>>& label_values,
                           const std::string& source_url, const std::string& fetched_at) {
    for (const auto& [label, value] : label_values)
        if (!text::collapse_ws(value).empty()) concept_or_create(label);
    TaskRow row;
    row.cells.assign(concepts_.size(), "");
    row.source_url = source_url;
    row.fetched_at = fetched_at;
    for (const auto& [label, value] : label_values) {
        std::string v = text::collapse_ws(value);
        if (v.empty()) continue;
        size_t col = *concept_index(label);
        row.cells[col] = v;
        Concept& c = concepts_[col];
        if (!known_value(c, v)) c.values.push_back(v);
    }
    rows_.push_back(std::move(row));
}

TaskDatabase TaskDatabase::parse(std::string_view content, const std::string& origin) {
    TaskDatabase db;
    std::vector<std::pair<std::string, size_t>> pending_cursors;
    bool header_seen = false;
    size_t ncols = 0;
    int lineno = 0;
    for (const auto& line : tsv::split_lines(content)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto cells = tsv::parse_row(line);
            if (cells[0] == "#domain" && cells.size() >= 2) {
                db.domain_ = cells[1];
            } else if (cells[0] == "#cursor" && cells.size() >= 3) {
                pending_cursors.emplace_back(cells[1],
                                             static_cast<size_t>(std::stoull(cells[2])));
            }
            continue;
        }
        auto cells = tsv::parse_row(line);
        if (!header_seen) {
            header_seen = true;
            for (const auto& label : cells) {
                if (label == kSourceCol || label == kFetchedCol) continue;
                if (label.empty() || label[0] == '@')
                    throw TaskDbFormatError(origin + ":" + std::to_string(lineno) +
                                            ": bad concept label '" + label + "'");
                if (db.concept_index(label))
                    throw TaskDbFormatError(origin + ":" + std::to_string(lineno) +
                                            ": duplicate concept label '" + label + "'");
                db.concepts_.push_back(Concept{label, {}, 0});
            }
            ncols = db.concepts_.size();
            continue;
        }
        TaskRow row;
        row.cells.assign(ncols, "");
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i < ncols)
                row.cells[i] = cells[i];
            else if (i == ncols)
                row.source_url = cells[i];
            else if (i == ncols + 1)
                row.fetched_at = cells[i];
        }
        for (size_t i = 0; i < ncols; ++i) {
            if (row.cells[i].empty()) continue;
            Concept& c = db.concepts_[i];
            if (!db.known_value(c, row.cells[i])) c.values.push_back(row.cells[i]);
        }
        db.rows_.push_back(std::move(row));
    }
    if (!header_seen) throw TaskDbFormatError(origin + ": missing header row");
    for (const auto& [label, cursor] : pending_cursors) {
        if (auto idx = db.concept_index(label)) {
            Concept& c = db.concepts_[*idx];
            if (!c.values.empty()) c.last_used_index = cursor % c.values.size();
        }
    }
    return db;
}

TaskDatabase TaskDatabase::load_file(const std::string& path) {
    return parse(tsv::read_file(path), path);
}

std::string TaskDatabase::serialize() const {
    std::string out;
    out += tsv::format_row({"#domain", domain_});
    out.push_back('\n');
    for (const auto& c : concepts_) {
        if (c.last_used_index == 0) continue;
        out += tsv::format_row({"#cursor", c.canonical_label, std::to_string(c.last_used_index)});
        out.push_back('\n');
    }
    std::vector<std::string> header;
    for (const auto& c : concepts_) header.push_back(c.canonical_label);
    header.emplace_back(kSourceCol);
    header.emplace_back(kFetchedCol);
    out += tsv::format_row(header);
    out.push_back('\n');
    for (const auto& row : rows_) {
        std::vector<std::string> cells = row.cells;
        cells.resize(concepts_.size());
        cells.push_back(row.source_url);
        cells.push_back(row.fetched_at);
        out += tsv::format_row(cells);
        out.push_back('\n');
    }
    return out;
}

void TaskDatabase::save_file(const std::string& path) const {
    tsv::write_file(path, serialize());
}

bool TaskDatabase::operator==(const TaskDatabase& other) const {
    if (domain_ != other.domain_ || concepts_.size() != other.concepts_.size() ||
        rows_.size() != other.rows_.size())
        return false;
    for (size_t i = 0; i < concepts_.size(); ++i) {
        if (concepts_[i].canonical_label != other.concepts_[i].canonical_label ||
            concepts_[i].values != other.concepts_[i].values ||
            concepts_[i].last_used_index != other.concepts_[i].last_used_index)
            return false;
    }
    for (size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].cells != other.rows_[i].cells ||
            rows_[i].source_url != other.rows_[i].source_url ||
            rows_[i].fetched_at != other.rows_[i].fetched_at)
            return false;
    }
    return true;
}

TaskDatabase bootstrap(const std::vector<WebPage>& seed_pages, const LabelLexicon& lexicon,
                       double threshold, const std::string& domain_name, BootstrapStats* stats) {
    TaskDatabase db(domain_name);
    BootstrapStats local;
    BootstrapStats& st = stats ? *stats : local;

    std::vector<std::string> concepts = lexicon.canonical_labels();
    for (const WebPage& page : seed_pages) {
        RecordTemplate tmpl;
        try {
            tmpl = detect_template(page, lexicon, concepts, threshold);
        } catch (const NoTemplateError& e) {
            if (e.unmatched_labels.empty()) {
                st.diagnostics.push_back(e.what());
            } else {
                for (const auto& label : e.unmatched_labels)
                    st.diagnostics.push_back("label '" + label + "' on " + page.url +
                                             " maps to no concept; skipped");
            }
            continue;
        }
        for (const auto& label : tmpl.unmatched_labels)
            st.diagnostics.push_back("label '" + label + "' on " + page.url +
                                     " maps to no concept; skipped");
        std::vector<std::string> extract_diags;
        auto records = extract_records(page, tmpl, &extract_diags);
        for (auto& d : extract_diags) st.diagnostics.push_back(std::move(d));
        if (records.empty()) continue;

        std::string fetched = text::iso8601_utc(page.fetched_at);
        // column label = the lexicon canonical whose slot the cell filled
        for (const auto& rec : records) {
            std::vector<std::pair<std::string, std::string>> label_values;
            for (const auto& concept_label : concepts) {
                auto slot = slot_for_concept(concept_label);
                if (!slot) continue;
                const auto& v = rec.slot(*slot);
                if (v && !v->empty()) label_values.emplace_back(concept_label, *v);
            }
            if (label_values.empty()) continue;
            db.add_row(label_values, page.url, fetched);
            ++st.rows_inserted;
        }
        ++st.pages_used;
    }
    if (db.empty())
        throw EmptyBootstrapError("no values extracted from " +
                                  std::to_string(seed_pages.size()) + " seed page(s)");
    return db;
}

}  // namespace hwc
