#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hwc/form_model.hpp"
#include "hwc/matcher.hpp"
#include "hwc/task_db.hpp"

namespace hwc {

struct NoFillableMappingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A concrete choice of values for one submission.
struct FilledForm {
    SearchForm form;
    std::vector<std::pair<size_t, std::string>> assignments;  // field index -> value
    size_t submission_plan_id = 0;
};

struct SubmissionRequest {
    HttpMethod method = HttpMethod::Get;
    std::string url;  // final URL for GET (query attached), action for POST
    std::vector<std::pair<std::string, std::string>> parameters;  // document order
    std::string body;  // urlencoded, POST only
};

// application/x-www-form-urlencoded: space becomes '+', [A-Za-z0-9._-]
// pass through, the rest is %XX.
std::string form_urlencode_value(std::string_view raw);
std::string form_urlencode(const std::vector<std::pair<std::string, std::string>>& params);

// Plans up to max_submissions distinct fills for the mapped fields.
// Multi-field mappings draw whole tuples from database rows that cover
// every mapped free-text concept (queries stay internally consistent);
// when no such row exists — and always for single-field mappings — values
// rotate per concept. Finite-domain fields take the option closest to any
// stored value, skipping placeholder options such as "Any".
std::vector<FilledForm> plan_fills(const SearchForm& form, const FieldMapping& mapping,
                                   TaskDatabase& db, const LabelLexicon& lexicon,
                                   size_t max_submissions);

// Turns a fill into a request: parameters in document field order, hidden
// fields with their defaults, unassigned text boxes empty, at most one
// submit control.
SubmissionRequest build_submission(const FilledForm& filled);

}  // namespace hwc
