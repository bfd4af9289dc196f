#include "hwc/form_filler.hpp"

#include <algorithm>
#include <set>

#include "hwc/text.hpp"

namespace hwc {

namespace {

bool is_placeholder_option(std::string_view value) {
    std::string folded = text::fold_value(value);
    return folded.empty() || folded == "any" || folded == "all" || folded == "--" ||
           folded == "-" || folded == "select" || folded == "choose";
}

// The finite-domain choice: the option scoring best against any stored
// value of the mapped concept; first non-placeholder option when nothing
// scores.
std::string choose_finite_value(const FormField& field, const std::string& concept_label,
                                const TaskDatabase& db, const LabelLexicon& lexicon) {
    const std::vector<std::string>* values = nullptr;
    if (auto idx = db.concept_index(concept_label)) values = &db.concepts()[*idx].values;

    double best_score = 0.0;
    const std::string* best_option = nullptr;
    const std::string* first_real = nullptr;
    for (const auto& option : field.domain.values) {
        if (is_placeholder_option(option)) continue;
        if (!first_real) first_real = &option;
        if (!values) continue;
        for (const auto& v : *values) {
            double s = score_label_match(option, v, lexicon);
            if (s > best_score) {
                best_score = s;
                best_option = &option;
            }
        }
    }
    if (best_option) return *best_option;
    if (first_real) return *first_real;
    return "";  // all placeholders: leave unconstrained
}

}  // namespace

std::string form_urlencode_value(std::string_view raw) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if ((u >= 'A' && u <= 'Z') || (u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') ||
            u == '-' || u == '_' || u == '.') {
            out.push_back(c);
        } else if (u == ' ') {
            out.push_back('+');
        } else {
            out.push_back('%');
            out.push_back(hex[u >> 4]);
            out.push_back(hex[u & 0xF]);
        }
    }
    return out;
}

std::string form_urlencode(const std::vector<std::pair<std::string, std::string>>& params) {
    std::string out;
    for (const auto& [name, value] : params) {
        if (!out.empty()) out.push_back('&');
        out += form_urlencode_value(name);
        out.push_back('=');
        out += form_urlencode_value(value);
    }
    return out;
}

std::vector<FilledForm> plan_fills(const SearchForm& form, const FieldMapping& mapping,
                                   TaskDatabase& db, const LabelLexicon& lexicon,
                                   size_t max_submissions) {
    if (mapping.empty())
        throw NoFillableMappingError("mapping covers no field of form at " + form.source_url);

    // split mapped fields by domain kind
    struct Mapped {
        size_t field_index;
        std::string concept_label;
    };
    std::vector<Mapped> free_text;
    std::vector<std::pair<size_t, std::string>> finite_choices;
    for (const auto& a : mapping.assignments) {
        const FormField& f = form.fields[a.field_index];
        if (!f.fillable()) continue;
        if (f.domain.finite)
            finite_choices.emplace_back(a.field_index,
                                        choose_finite_value(f, a.concept_label, db, lexicon));
        else
            free_text.push_back({a.field_index, a.concept_label});
    }
    if (free_text.empty() && finite_choices.empty())
        throw NoFillableMappingError("mapping covers no fillable field at " + form.source_url);

    std::vector<FilledForm> plans;
    std::set<std::vector<std::pair<size_t, std::string>>> seen;

    auto push_plan = [&](std::vector<std::pair<size_t, std::string>> assignment) {
        std::sort(assignment.begin(), assignment.end());
        if (!seen.insert(assignment).second) return false;
        FilledForm filled;
        filled.form = form;
        filled.assignments = std::move(assignment);
        filled.submission_plan_id = plans.size();
        plans.push_back(std::move(filled));
        return true;
    };

    // whole-row tuples first: every free-text concept filled from one row
    bool row_coherent = false;
    if (free_text.size() >= 2) {
        std::vector<size_t> cols;
        cols.reserve(free_text.size());
        bool all_known = true;
        for (const auto& m : free_text) {
            auto idx = db.concept_index(m.concept_label);
            if (!idx) {
                all_known = false;
                break;
            }
            cols.push_back(*idx);
        }
        if (all_known) {
            for (const TaskRow& row : db.rows()) {
                if (plans.size() >= max_submissions) break;
                bool covers = true;
                for (size_t col : cols) {
                    if (col >= row.cells.size() || row.cells[col].empty()) {
                        covers = false;
                        break;
                    }
                }
                if (!covers) continue;
                row_coherent = true;
                std::vector<std::pair<size_t, std::string>> assignment;
                for (size_t i = 0; i < free_text.size(); ++i)
                    assignment.emplace_back(free_text[i].field_index, row.cells[cols[i]]);
                for (const auto& [fi, v] : finite_choices) assignment.emplace_back(fi, v);
                push_plan(std::move(assignment));
            }
        }
    }

    // rotation per concept otherwise
    if (!row_coherent) {
        size_t longest = 1;
        for (const auto& m : free_text)
            if (auto idx = db.concept_index(m.concept_label))
                longest = std::max(longest, db.concepts()[*idx].values.size());
        size_t attempts_left = max_submissions + longest;

        while (plans.size() < max_submissions && attempts_left-- > 0) {
            std::vector<std::pair<size_t, std::string>> assignment;
            bool any_value = false;
            for (const auto& m : free_text) {
                std::vector<std::string> vals;
                try {
                    vals = db.lookup_values(m.concept_label, 1);
                } catch (const UnknownConceptError&) {
                }
                if (!vals.empty()) {
                    assignment.emplace_back(m.field_index, vals.front());
                    any_value = true;
                }
            }
            for (const auto& [fi, v] : finite_choices) {
                assignment.emplace_back(fi, v);
                if (!v.empty()) any_value = true;
            }
            if (!any_value) break;  // nothing to draw from
            push_plan(std::move(assignment));
            if (free_text.empty()) break;  // finite-only fills admit one distinct tuple
        }
    }
    return plans;
}

SubmissionRequest build_submission(const FilledForm& filled) {
    const SearchForm& form = filled.form;
    SubmissionRequest req;
    req.method = form.method;

    auto assigned = [&](size_t idx) -> const std::string* {
        for (const auto& [fi, v] : filled.assignments)
            if (fi == idx) return &v;
        return nullptr;
    };

    bool submit_included = false;
    for (size_t i = 0; i < form.fields.size(); ++i) {
        const FormField& f = form.fields[i];
        const std::string* value = assigned(i);
        switch (f.control) {
            case FormControl::Hidden:
                req.parameters.emplace_back(f.name, f.default_value.value_or(""));
                break;
            case FormControl::Submit:
                if (!submit_included) {
                    req.parameters.emplace_back(f.name, f.default_value.value_or(""));
                    submit_included = true;
                }
                break;
            case FormControl::TextBox:
                req.parameters.emplace_back(f.name, value ? *value : "");
                break;
            case FormControl::SelectList:
                req.parameters.emplace_back(f.name,
                                            value ? *value : f.default_value.value_or(""));
                break;
            case FormControl::Checkbox:
            case FormControl::Radio:
                // browsers submit these only when checked
                if (value)
                    req.parameters.emplace_back(f.name, *value);
                else if (f.default_value)
                    req.parameters.emplace_back(f.name, *f.default_value);
                break;
        }
    }

    std::string encoded = form_urlencode(req.parameters);
    if (req.method == HttpMethod::Get) {
        std::string base = form.action_url;
        size_t q = base.find('?');
        if (q != std::string::npos) base.resize(q);  // query replaced, as browsers do
        req.url = base + "?" + encoded;
    } else {
        req.url = form.action_url;
        req.body = std::move(encoded);
    }
    return req;
}

}  // namespace hwc
