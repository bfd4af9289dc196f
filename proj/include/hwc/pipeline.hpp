#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hwc/extractor.hpp"
#include "hwc/fetcher.hpp"
#include "hwc/matcher.hpp"

namespace hwc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivisionDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class OutputMode { Human, Lines };

struct CrawlConfig {
    std::vector<std::string> seeds;
    std::string task_db_path;
    std::string repo_path;
    std::string lexicon_path;
    double threshold = 0.6;
    size_t max_submissions_per_form = 5;
    FetchPolicy fetch;
    MatcherMode matcher = MatcherMode::Semantic;
    std::string report_path;  // JSON report written here when non-empty
};

struct CrawlReport {
    size_t websites_visited = 0;
    size_t forms_found = 0;
    size_t forms_filled = 0;
    size_t total_pages = 0;    // response pages retrieved by submissions
    size_t valid_pages = 0;    // non-error pages yielding >= 1 surviving record
    size_t records_extracted = 0;  // surviving filters, before merging
    size_t records_inserted = 0;
    size_t duplicates_dropped = 0;
    size_t db_values_added = 0;

    struct SiteLog {
        std::string seed;
        std::vector<std::string> errors;
    };
    std::vector<SiteLog> site_logs;

    std::string to_json() const;
    static CrawlReport from_json(const std::string& content);
    void print(std::ostream& os, OutputMode mode) const;
};

// valid / total, exactly. Throws DivisionDomainError when total is zero.
double valid_page_ratio(size_t valid, size_t total);

// Test-support visibility into each submission of a crawl.
struct SubmissionTrace {
    std::string seed;
    std::string fingerprint;
    std::string response_url;
    std::vector<std::pair<std::string, std::string>> parameters;
    bool counted_valid = false;
    std::vector<DataRecord> kept_records;
};

// The full pass over every seed site: fetch the landing page, detect and
// match its forms, plan and submit fills, extract and filter records,
// merge them into the repository, and feed unseen values back into the
// task database. Site failures are logged, never fatal; ConfigError is.
CrawlReport crawl(const CrawlConfig& config, std::vector<SubmissionTrace>* trace = nullptr);

}  // namespace hwc
