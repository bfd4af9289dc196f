#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hwc/form_model.hpp"

namespace hwc {

struct LexiconError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lowercase, strip punctuation, split on whitespace, drop a small stopword
// list — unless that would leave nothing. "Written by" -> ["written"].
std::vector<std::string> normalize_label(std::string_view raw);

// Tokens joined with single spaces; the canonical phrase form.
std::string normalize_phrase(std::string_view raw);

// Synonym sets loaded from a lexicon file:
//   one set per line, phrases separated by '|', first phrase canonical,
//   '#' starts a comment, blank lines ignored.
// Phrases are compared in normalized form; a phrase may appear in at most
// one set and canonical labels must be unique.
class LabelLexicon {
public:
    struct SynonymSet {
        std::string canonical;                 // as written in the file
        std::vector<std::string> phrases;      // normalized, canonical first
    };

    LabelLexicon() = default;
    static LabelLexicon parse(std::string_view content, const std::string& origin = "<memory>");
    static LabelLexicon load_file(const std::string& path);

    const std::vector<SynonymSet>& sets() const { return sets_; }
    std::vector<std::string> canonical_labels() const;
    std::optional<size_t> set_of(const std::string& normalized_phrase) const;

private:
    std::vector<SynonymSet> sets_;
};

// 1.0 on normalized equality or shared synonym set; otherwise Jaccard
// overlap of token sets expanded with per-token synonyms. Symmetric, in
// [0,1]; two labels that normalize to nothing score 0.
double score_label_match(std::string_view a, std::string_view b, const LabelLexicon& lexicon);

// Case-insensitive whitespace-trimmed equality; the no-semantics baseline.
double score_label_exact(std::string_view a, std::string_view b);

enum class MatcherMode { Semantic, Exact };

double score_label(std::string_view a, std::string_view b, const LabelLexicon& lexicon,
                   MatcherMode mode);

struct FieldMapping {
    struct Assignment {
        size_t field_index;         // index into SearchForm::fields
        std::string concept_label;
        double score;
    };
    std::vector<Assignment> assignments;
    double threshold = 0.0;

    bool empty() const { return assignments.empty(); }
    const Assignment* for_field(size_t field_index) const;
};

// Greedy assignment over an explicit score matrix (rows follow
// `field_indices`, columns follow `concepts`): repeatedly take the highest
// score at or above the threshold, ties broken by earlier field then
// lexicographically smaller concept label. Injective by construction.
FieldMapping greedy_assign(const std::vector<std::vector<double>>& scores,
                           const std::vector<size_t>& field_indices,
                           const std::vector<std::string>& concepts, double threshold);

// Scores every fillable field label against every concept label and runs
// the greedy assignment. An empty mapping means the form cannot be filled
// from this concept set.
FieldMapping match_form(const SearchForm& form, const std::vector<std::string>& concepts,
                        const LabelLexicon& lexicon, double threshold,
                        MatcherMode mode = MatcherMode::Semantic);

}  // namespace hwc
