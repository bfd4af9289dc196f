#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hwc/extractor.hpp"
#include "hwc/form_model.hpp"
#include "hwc/matcher.hpp"

namespace hwc {

struct EmptyBootstrapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownConceptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TaskDbFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One column of the label-value table.
struct Concept {
    std::string canonical_label;
    std::vector<std::string> values;  // insertion order, unique under fold_value
    size_t last_used_index = 0;       // rotation cursor
};

// One value tuple with its provenance. Cells align with the concept
// columns; empty cells are legal.
struct TaskRow {
    std::vector<std::string> cells;
    std::string source_url;
    std::string fetched_at;
};

// The domain database that feeds form filling: concepts (columns), their
// value sets, and the source rows the values arrived in. Row grouping is
// kept because value tuples that arrived together make coherent queries.
//
// File format (tab-separated, backslash escapes, '#' directives):
//   #domain <TAB> books
//   #cursor <TAB> <label> <TAB> <index>     (only non-zero cursors)
//   header row of concept labels, then "@source" and "@fetched"
//   one row per value tuple
class TaskDatabase {
public:
    TaskDatabase() = default;
    explicit TaskDatabase(std::string domain_name) : domain_(std::move(domain_name)) {}

    static TaskDatabase parse(std::string_view content, const std::string& origin = "<memory>");
    static TaskDatabase load_file(const std::string& path);
    std::string serialize() const;
    void save_file(const std::string& path) const;

    const std::string& domain_name() const { return domain_; }
    const std::vector<Concept>& concepts() const { return concepts_; }
    const std::vector<TaskRow>& rows() const { return rows_; }
    std::optional<size_t> concept_index(std::string_view label) const;
    size_t total_value_count() const;
    bool empty() const { return total_value_count() == 0; }

    // Next k values in rotation for the concept, advancing its cursor;
    // returns all values when k exceeds the set size. Throws
    // UnknownConceptError.
    std::vector<std::string> lookup_values(std::string_view concept_label, size_t k);

    // Inserts values not yet present (under case/whitespace folding); an
    // unknown label creates the concept. Returns how many were new.
    size_t update(std::string_view concept_label, const std::vector<std::string>& new_values,
                  const std::string& source_url = "", const std::string& fetched_at = "");

    // Appends one aligned tuple, feeding each non-empty cell into its
    // concept's value set.
    void add_row(const std::vector<std::pair<std::string, std::string>>& label_values,
                 const std::string& source_url, const std::string& fetched_at);

    bool operator==(const TaskDatabase& other) const;

private:
    Concept& concept_or_create(std::string_view label);
    bool known_value(const Concept& c, const std::string& value) const;

    std::string domain_ = "books";
    std::vector<Concept> concepts_;
    std::vector<TaskRow> rows_;
};

struct BootstrapStats {
    size_t pages_used = 0;
    size_t rows_inserted = 0;
    std::vector<std::string> diagnostics;
};

// Builds a fresh database from already-fetched listing pages: repeated
// regions are detected, their labels mapped to lexicon concepts, and the
// cell values stored column-wise with row provenance. Throws
// EmptyBootstrapError when no value could be extracted at all.
TaskDatabase bootstrap(const std::vector<WebPage>& seed_pages, const LabelLexicon& lexicon,
                       double threshold, const std::string& domain_name,
                       BootstrapStats* stats = nullptr);

}  // namespace hwc
