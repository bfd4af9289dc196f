#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hwc/form_model.hpp"
#include "hwc/matcher.hpp"

namespace hwc {

struct NoTemplateError : std::runtime_error {
    explicit NoTemplateError(const std::string& what, std::vector<std::string> labels = {})
        : std::runtime_error(what), unmatched_labels(std::move(labels)) {}
    // header texts seen but mapped to nothing; lets callers explain the miss
    std::vector<std::string> unmatched_labels;
};

// One extracted result. Slots cover the book domain; availability carries
// stock/status text when the page exposes one.
struct DataRecord {
    std::optional<std::string> isbn;
    std::optional<std::string> title;
    std::optional<std::string> author;
    std::optional<std::string> publisher;
    std::optional<std::string> keywords;
    std::optional<std::string> price;
    std::optional<std::string> availability;
    std::string source_url;
    std::string extracted_at;

    // normalized(title) + '§' + normalized(author); the merge identity
    std::string dedup_key() const;
    bool has_identity() const { return (title && !title->empty()) || (isbn && !isbn->empty()); }

    std::optional<std::string>& slot(size_t i);
    const std::optional<std::string>& slot(size_t i) const;
    static constexpr size_t kSlotCount = 7;
    static const char* slot_name(size_t i);  // lowercase stable names
};

// Maps a concept label (or a result-page column header) onto a DataRecord
// slot index; nullopt when the label names no known slot.
std::optional<size_t> slot_for_concept(std::string_view concept_label);

struct ErrorPageConfig {
    std::vector<std::string> phrases = {"no results", "not found", "0 results", "error"};
    size_t min_repetitions = 3;
};

bool is_error_page(const WebPage& page, const ErrorPageConfig& config = {});

// The repeating region and how its sub-cells map to record slots.
struct RecordTemplate {
    struct Field {
        std::string tag;                         // cell tag, e.g. "td"
        size_t child_index = 0;                  // position among same-tag children
        size_t slot = 0;                         // DataRecord slot
        std::optional<std::string> inline_label; // "Writer" in "Writer: X" cells
    };
    std::string signature;       // tag path of the repeating node
    std::vector<Field> fields;
    std::vector<std::string> unmatched_labels;  // header texts that mapped to nothing
};

// Picks the tag-path signature with the highest repetition count (ties:
// deeper path, then first in document order) and associates sub-cells with
// record slots via header/inline label matching, falling back to value
// shape heuristics (13-digit cells -> isbn, currency-marked cells -> price).
// Throws NoTemplateError when nothing repeats at least min_repetitions times.
RecordTemplate detect_template(const WebPage& page, const LabelLexicon& lexicon,
                               const std::vector<std::string>& concepts, double threshold,
                               MatcherMode mode = MatcherMode::Semantic,
                               size_t min_repetitions = 3);

std::vector<DataRecord> extract_records(const WebPage& page, const RecordTemplate& tmpl,
                                        std::vector<std::string>* diagnostics = nullptr);

struct InvalidFilterConfig {
    std::vector<std::string> phrases = {"out of stock", "not available", "unavailable"};
};

// Order-preserving; drops records whose availability (or any populated
// slot) matches an invalid phrase.
std::vector<DataRecord> filter_invalid(std::vector<DataRecord> records,
                                       const InvalidFilterConfig& config = {});

}  // namespace hwc
