#include "hwc/matcher.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "hwc/text.hpp"
#include "hwc/tsv.hpp"

namespace hwc {

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> kStop = {"the", "a",  "an", "of",
                                                          "by",  "in", "for"};
    return kStop;
}

}  // namespace

std::vector<std::string> normalize_label(std::string_view raw) {
    // punctuation separates tokens: "Title/Subject" -> title subject
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80 && !std::isalnum(u))
            cleaned.push_back(' ');
        else
            cleaned.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
    }
    std::vector<std::string> tokens;
    std::vector<std::string> kept;
    for (const auto& tok : text::split(cleaned, ' ')) {
        if (tok.empty()) continue;
        tokens.push_back(tok);
        if (!stopwords().count(tok)) kept.push_back(tok);
    }
    return kept.empty() ? tokens : kept;
}

std::string normalize_phrase(std::string_view raw) {
    std::string out;
    for (const auto& tok : normalize_label(raw)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

LabelLexicon LabelLexicon::parse(std::string_view content, const std::string& origin) {
    LabelLexicon lex;
    std::unordered_set<std::string> canon_seen;
    std::unordered_set<std::string> phrase_seen;
    int lineno = 0;
    for (const auto& line : tsv::split_lines(content)) {
        ++lineno;
        std::string_view sv = text::trim(line);
        if (sv.empty() || sv[0] == '#') continue;
        SynonymSet set;
        for (const auto& part : text::split(sv, '|')) {
            std::string_view phrase = text::trim(part);
            if (phrase.empty()) continue;
            if (set.canonical.empty()) set.canonical = std::string(phrase);
            std::string norm = normalize_phrase(phrase);
            if (norm.empty()) continue;
            if (std::find(set.phrases.begin(), set.phrases.end(), norm) != set.phrases.end())
                continue;
            if (!phrase_seen.insert(norm).second)
                throw LexiconError(origin + ":" + std::to_string(lineno) + ": phrase '" +
                                   std::string(phrase) + "' already belongs to another set");
            set.phrases.push_back(std::move(norm));
        }
        if (set.phrases.empty()) continue;
        if (!canon_seen.insert(text::fold_value(set.canonical)).second)
            throw LexiconError(origin + ":" + std::to_string(lineno) + ": duplicate canonical '" +
                               set.canonical + "'");
        lex.sets_.push_back(std::move(set));
    }
    return lex;
}

LabelLexicon LabelLexicon::load_file(const std::string& path) {
    return parse(tsv::read_file(path), path);
}

std::vector<std::string> LabelLexicon::canonical_labels() const {
    std::vector<std::string> out;
    out.reserve(sets_.size());
    for (const auto& s : sets_) out.push_back(s.canonical);
    return out;
}

std::optional<size_t> LabelLexicon::set_of(const std::string& normalized_phrase) const {
    for (size_t i = 0; i < sets_.size(); ++i) {
        const auto& ph = sets_[i].phrases;
        if (std::find(ph.begin(), ph.end(), normalized_phrase) != ph.end()) return i;
    }
    return std::nullopt;
}

namespace {

// Token set grown with every token of every phrase in any synonym set a
// token belongs to.
std::unordered_set<std::string> expand_tokens(const std::vector<std::string>& tokens,
                                              const LabelLexicon& lexicon) {
    std::unordered_set<std::string> out(tokens.begin(), tokens.end());
    for (const auto& tok : tokens) {
        if (auto set_idx = lexicon.set_of(tok)) {
            for (const auto& phrase : lexicon.sets()[*set_idx].phrases)
                for (const auto& t : text::split(phrase, ' '))
                    if (!t.empty()) out.insert(t);
        }
    }
    return out;
}

}  // namespace

double score_label_match(std::string_view a, std::string_view b, const LabelLexicon& lexicon) {
    std::vector<std::string> ta = normalize_label(a);
    std::vector<std::string> tb = normalize_label(b);
    if (ta.empty() || tb.empty()) return 0.0;

    std::string pa, pb;
    for (const auto& t : ta) { if (!pa.empty()) pa.push_back(' '); pa += t; }
    for (const auto& t : tb) { if (!pb.empty()) pb.push_back(' '); pb += t; }
    if (pa == pb) return 1.0;

    auto sa = lexicon.set_of(pa);
    auto sb = lexicon.set_of(pb);
    if (sa && sb && *sa == *sb) return 1.0;

    auto ea = expand_tokens(ta, lexicon);
    auto eb = expand_tokens(tb, lexicon);
    size_t inter = 0;
    for (const auto& t : ea)
        if (eb.count(t)) ++inter;
    size_t uni = ea.size() + eb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double score_label_exact(std::string_view a, std::string_view b) {
    std::string fa = text::fold_value(a);
    std::string fb = text::fold_value(b);
    if (fa.empty() || fb.empty()) return 0.0;
    return fa == fb ? 1.0 : 0.0;
}

double score_label(std::string_view a, std::string_view b, const LabelLexicon& lexicon,
                   MatcherMode mode) {
    return mode == MatcherMode::Semantic ? score_label_match(a, b, lexicon)
                                         : score_label_exact(a, b);
}

const FieldMapping::Assignment* FieldMapping::for_field(size_t field_index) const {
    for (const auto& a : assignments)
        if (a.field_index == field_index) return &a;
    return nullptr;
}

FieldMapping greedy_assign(const std::vector<std::vector<double>>& scores,
                           const std::vector<size_t>& field_indices,
                           const std::vector<std::string>& concepts, double threshold) {
    FieldMapping mapping;
    mapping.threshold = threshold;

    struct Cand {
        double score;
        size_t row;
        size_t col;
    };
    std::vector<Cand> cands;
    for (size_t r = 0; r < scores.size(); ++r)
        for (size_t c = 0; c < scores[r].size(); ++c)
            if (scores[r][c] >= threshold) cands.push_back({scores[r][c], r, c});

    std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.row != y.row) return x.row < y.row;
        return concepts[x.col] < concepts[y.col];
    });

    std::vector<bool> row_used(scores.size(), false);
    std::vector<bool> col_used(concepts.size(), false);
    for (const Cand& c : cands) {
        if (row_used[c.row] || col_used[c.col]) continue;
        row_used[c.row] = true;
        col_used[c.col] = true;
        mapping.assignments.push_back({field_indices[c.row], concepts[c.col], c.score});
    }
    std::sort(mapping.assignments.begin(), mapping.assignments.end(),
              [](const auto& a, const auto& b) { return a.field_index < b.field_index; });
    return mapping;
}

FieldMapping match_form(const SearchForm& form, const std::vector<std::string>& concepts,
                        const LabelLexicon& lexicon, double threshold, MatcherMode mode) {
    std::vector<size_t> field_indices;
    for (size_t i = 0; i < form.fields.size(); ++i)
        if (form.fields[i].fillable()) field_indices.push_back(i);

    std::vector<std::vector<double>> scores(field_indices.size(),
                                            std::vector<double>(concepts.size(), 0.0));
    for (size_t r = 0; r < field_indices.size(); ++r) {
        const FormField& f = form.fields[field_indices[r]];
        for (size_t c = 0; c < concepts.size(); ++c)
            scores[r][c] = score_label(f.label, concepts[c], lexicon, mode);
    }
    return greedy_assign(scores, field_indices, concepts, threshold);
}

}  // namespace hwc
