#include "hwc/pipeline.hpp"

#include <iomanip>

#include <nlohmann/json.hpp>

#include "hwc/form_filler.hpp"
#include "hwc/repository.hpp"
#include "hwc/task_db.hpp"
#include "hwc/text.hpp"
#include "hwc/tsv.hpp"
#include "hwc/url.hpp"

namespace hwc {

namespace {

using nlohmann::json;

// Feed every surviving value back into the task database under the
// lexicon concept that owns the slot.
size_t feed_back(TaskDatabase& db, const std::vector<std::string>& concepts,
                 const std::vector<DataRecord>& records, const std::string& source_url) {
    size_t added = 0;
    std::string now = text::iso8601_utc(std::chrono::system_clock::now());
    for (const auto& concept_label : concepts) {
        auto slot = slot_for_concept(concept_label);
        if (!slot) continue;
        if (*slot == DataRecord::kSlotCount - 1) continue;  // availability is not a concept
        std::vector<std::string> values;
        for (const auto& rec : records)
            if (rec.slot(*slot)) values.push_back(*rec.slot(*slot));
        if (!values.empty()) added += db.update(concept_label, values, source_url, now);
    }
    return added;
}

}  // namespace

double valid_page_ratio(size_t valid, size_t total) {
    if (total == 0) throw DivisionDomainError("valid_page_ratio: total is zero");
    return static_cast<double>(valid) / static_cast<double>(total);
}

std::string CrawlReport::to_json() const {
    json j;
    j["websites_visited"] = websites_visited;
    j["forms_found"] = forms_found;
    j["forms_filled"] = forms_filled;
    j["total_pages"] = total_pages;
    j["valid_pages"] = valid_pages;
    j["records_extracted"] = records_extracted;
    j["records_inserted"] = records_inserted;
    j["duplicates_dropped"] = duplicates_dropped;
    j["db_values_added"] = db_values_added;
    json logs = json::array();
    for (const auto& log : site_logs) {
        json e;
        e["seed"] = log.seed;
        e["errors"] = log.errors;
        logs.push_back(e);
    }
    j["site_logs"] = logs;
    return j.dump();
}

CrawlReport CrawlReport::from_json(const std::string& content) {
    json j = json::parse(content);
    CrawlReport r;
    r.websites_visited = j.value("websites_visited", 0u);
    r.forms_found = j.value("forms_found", 0u);
    r.forms_filled = j.value("forms_filled", 0u);
    r.total_pages = j.value("total_pages", 0u);
    r.valid_pages = j.value("valid_pages", 0u);
    r.records_extracted = j.value("records_extracted", 0u);
    r.records_inserted = j.value("records_inserted", 0u);
    r.duplicates_dropped = j.value("duplicates_dropped", 0u);
    r.db_values_added = j.value("db_values_added", 0u);
    if (j.contains("site_logs")) {
        for (const auto& e : j["site_logs"]) {
            SiteLog log;
            log.seed = e.value("seed", "");
            if (e.contains("errors"))
                for (const auto& msg : e["errors"]) log.errors.push_back(msg.get<std::string>());
            r.site_logs.push_back(std::move(log));
        }
    }
    return r;
}

void CrawlReport::print(std::ostream& os, OutputMode mode) const {
    if (mode == OutputMode::Lines) {
        os << to_json() << "\n";
        return;
    }
    os << "websites visited:    " << websites_visited << "\n"
       << "forms found:         " << forms_found << "\n"
       << "forms filled:        " << forms_filled << "\n"
       << "pages retrieved:     " << total_pages << "\n"
       << "valid pages:         " << valid_pages << "\n";
    if (total_pages > 0)
        os << "valid-page ratio:    " << std::fixed << std::setprecision(6)
           << valid_page_ratio(valid_pages, total_pages) << std::defaultfloat << "\n";
    else
        os << "valid-page ratio:    n/a\n";
    os << "records extracted:   " << records_extracted << "\n"
       << "records inserted:    " << records_inserted << "\n"
       << "duplicates dropped:  " << duplicates_dropped << "\n"
       << "task-db values added: " << db_values_added << "\n";
    for (const auto& log : site_logs) {
        for (const auto& err : log.errors) os << "  [" << log.seed << "] " << err << "\n";
    }
}

CrawlReport crawl(const CrawlConfig& config, std::vector<SubmissionTrace>* trace) {
    if (config.seeds.empty()) throw ConfigError("no seed URLs configured");
    if (config.threshold < 0.0 || config.threshold > 1.0)
        throw ConfigError("threshold must lie in [0,1]");
    if (config.max_submissions_per_form == 0)
        throw ConfigError("max submissions per form must be positive");
    try {
        config.fetch.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("fetch policy: ") + e.what());
    }

    LabelLexicon lexicon;
    try {
        lexicon = LabelLexicon::load_file(config.lexicon_path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("lexicon: ") + e.what());
    }
    TaskDatabase db;
    try {
        db = TaskDatabase::load_file(config.task_db_path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("task database: ") + e.what());
    }
    if (db.empty()) throw ConfigError("task database holds no values; bootstrap first");
    if (config.repo_path.empty()) throw ConfigError("repository path missing");

    Repository repo = Repository::open(config.repo_path);
    Fetcher fetcher(config.fetch);
    std::vector<std::string> concepts = lexicon.canonical_labels();

    CrawlReport report;
    for (const std::string& raw_seed : config.seeds) {
        std::string seed = url::canonicalize(raw_seed);
        CrawlReport::SiteLog site_log;
        site_log.seed = seed;
        if (fetcher.visited().contains(seed)) {
            site_log.errors.push_back("seed already visited; skipped");
            report.site_logs.push_back(std::move(site_log));
            continue;
        }
        ++report.websites_visited;
        try {
            WebPage landing = fetcher.fetch_page(seed);
            std::vector<std::string> diags;
            std::vector<SearchForm> forms = detect_forms(landing, &diags);
            for (auto& d : diags) site_log.errors.push_back(std::move(d));
            report.forms_found += forms.size();

            for (const SearchForm& form : forms) {
                FieldMapping mapping =
                    match_form(form, concepts, lexicon, config.threshold, config.matcher);
                if (mapping.empty()) {
                    site_log.errors.push_back("no field of a form matched any concept");
                    continue;
                }
                std::vector<FilledForm> plans;
                try {
                    plans = plan_fills(form, mapping, db, lexicon,
                                       config.max_submissions_per_form);
                } catch (const NoFillableMappingError& e) {
                    site_log.errors.push_back(e.what());
                    continue;
                }
                if (plans.empty()) {
                    site_log.errors.push_back("no values available to fill a matched form");
                    continue;
                }
                ++report.forms_filled;

                for (const FilledForm& plan : plans) {
                    SubmissionRequest request = build_submission(plan);
                    std::string fp = Fetcher::fingerprint(request);
                    if (fetcher.visited().contains(fp)) continue;  // no revisit

                    WebPage response;
                    try {
                        response = fetcher.submit_form(request);
                    } catch (const std::runtime_error& e) {
                        site_log.errors.push_back(e.what());
                        continue;
                    }
                    ++report.total_pages;

                    SubmissionTrace entry;
                    entry.seed = seed;
                    entry.fingerprint = fp;
                    entry.response_url = response.url;
                    entry.parameters = request.parameters;

                    if (!is_error_page(response)) {
                        try {
                            RecordTemplate tmpl = detect_template(response, lexicon, concepts,
                                                                  config.threshold, config.matcher);
                            std::vector<std::string> ediags;
                            auto records = extract_records(response, tmpl, &ediags);
                            for (auto& d : ediags) site_log.errors.push_back(std::move(d));
                            auto kept = filter_invalid(std::move(records));
                            if (!kept.empty()) {
                                ++report.valid_pages;
                                entry.counted_valid = true;
                                report.records_extracted += kept.size();
                                MergeStats stats = repo.upsert(kept);
                                report.records_inserted += stats.inserted;
                                report.duplicates_dropped += stats.duplicates_dropped;
                                report.db_values_added +=
                                    feed_back(db, concepts, kept, response.url);
                                entry.kept_records = std::move(kept);
                            }
                        } catch (const NoTemplateError& e) {
                            site_log.errors.push_back(e.what());
                        }
                    }
                    if (trace) trace->push_back(std::move(entry));
                }
            }
        } catch (const std::runtime_error& e) {
            site_log.errors.push_back(e.what());
        }
        report.site_logs.push_back(std::move(site_log));
    }

    // persist; one retry then a logged failure
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            db.save_file(config.task_db_path);
            repo.save_as(config.repo_path);
            break;
        } catch (const std::runtime_error& e) {
            if (attempt == 1) {
                CrawlReport::SiteLog log;
                log.seed = "(store)";
                log.errors.push_back(e.what());
                report.site_logs.push_back(std::move(log));
            }
        }
    }
    if (!config.report_path.empty()) tsv::write_file(config.report_path, report.to_json() + "\n");
    return report;
}

}  // namespace hwc
