#include "hwc/cli.hpp"

#include <algorithm>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hwc/fetcher.hpp"
#include "hwc/fixture.hpp"
#include "hwc/pipeline.hpp"
#include "hwc/repository.hpp"
#include "hwc/task_db.hpp"
#include "hwc/text.hpp"
#include "hwc/tsv.hpp"

namespace hwc::cli {

namespace {

struct FetchFlags {
    long delay_ms = 1000;
    long timeout_ms = 10000;
    int retries = 2;
    int max_redirects = 5;
    std::string user_agent = "hwcrawl/0.1";
    bool no_robots = false;

    FetchPolicy to_policy() const {
        FetchPolicy policy;
        policy.per_host_delay = std::chrono::milliseconds(delay_ms);
        policy.timeout = std::chrono::milliseconds(timeout_ms);
        policy.max_retries = retries;
        policy.max_redirects = max_redirects;
        policy.user_agent = user_agent;
        policy.respect_robots = !no_robots;
        return policy;
    }
};

void add_fetch_flags(CLI::App* cmd, FetchFlags& flags) {
    cmd->add_option("--delay-ms", flags.delay_ms, "per-host politeness delay (ms)")
        ->envname("HWCRAWL_DELAY_MS");
    cmd->add_option("--timeout-ms", flags.timeout_ms, "request timeout (ms)")
        ->envname("HWCRAWL_TIMEOUT_MS");
    cmd->add_option("--retries", flags.retries, "retries after a failed request");
    cmd->add_option("--max-redirects", flags.max_redirects, "redirect hops to follow");
    cmd->add_option("--user-agent", flags.user_agent, "User-Agent header");
    cmd->add_flag("--no-robots", flags.no_robots, "ignore robots.txt (fixtures)");
}

std::vector<std::string> gather_seeds(const std::vector<std::string>& seeds,
                                      const std::string& seeds_file) {
    std::vector<std::string> out = seeds;
    if (!seeds_file.empty()) {
        for (const auto& line : tsv::split_lines(tsv::read_file(seeds_file))) {
            std::string_view sv = text::trim(line);
            if (sv.empty() || sv[0] == '#') continue;
            out.emplace_back(sv);
        }
    }
    return out;
}

void print_records_lines(std::ostream& os, const std::vector<DataRecord>& records) {
    for (const auto& rec : records) {
        nlohmann::json j;
        for (size_t i = 0; i < DataRecord::kSlotCount; ++i)
            if (rec.slot(i)) j[DataRecord::slot_name(i)] = *rec.slot(i);
        j["source"] = rec.source_url;
        j["extracted"] = rec.extracted_at;
        os << j.dump() << "\n";
    }
}

void print_records_table(std::ostream& os, const std::vector<DataRecord>& records) {
    if (records.empty()) {
        os << "(no matching records)\n";
        return;
    }
    std::vector<size_t> used;
    for (size_t i = 0; i < DataRecord::kSlotCount; ++i)
        if (std::any_of(records.begin(), records.end(),
                        [i](const DataRecord& r) { return r.slot(i).has_value(); }))
            used.push_back(i);
    std::vector<size_t> width(used.size());
    for (size_t c = 0; c < used.size(); ++c) {
        width[c] = std::string(DataRecord::slot_name(used[c])).size();
        for (const auto& rec : records)
            width[c] = std::max(width[c], rec.slot(used[c]).value_or("").size());
    }
    auto row = [&](const std::function<std::string(size_t)>& cell) {
        for (size_t c = 0; c < used.size(); ++c) {
            std::string v = cell(c);
            os << v << std::string(width[c] - v.size(), ' ');
            os << (c + 1 < used.size() ? "  " : "");
        }
        os << "\n";
    };
    row([&](size_t c) { return std::string(DataRecord::slot_name(used[c])); });
    row([&](size_t c) { return std::string(width[c], '-'); });
    for (const auto& rec : records)
        row([&](size_t c) { return rec.slot(used[c]).value_or(""); });
    os << records.size() << " record(s)\n";
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"domain-driven crawler for data behind HTML search forms"};
    app.set_config("--config");
    app.require_subcommand(1);

    std::string output_mode_name = "human";
    app.add_option("--output", output_mode_name, "output style: human or lines")
        ->check(CLI::IsMember({"human", "lines"}))
        ->envname("HWCRAWL_OUTPUT");

    // bootstrap ------------------------------------------------------------
    auto* boot = app.add_subcommand("bootstrap", "build a task database from seed listing pages");
    std::vector<std::string> boot_seeds;
    std::string boot_seeds_file, boot_lexicon, boot_out, boot_domain = "books";
    double boot_threshold = 0.6;
    FetchFlags boot_fetch;
    boot->add_option("--seed", boot_seeds, "seed listing URL (repeatable)");
    boot->add_option("--seeds-file", boot_seeds_file, "file with one seed URL per line");
    boot->add_option("--lexicon", boot_lexicon, "label lexicon file")->required();
    boot->add_option("--out", boot_out, "task database file to write")->required();
    boot->add_option("--domain", boot_domain, "domain name stored in the database");
    boot->add_option("--threshold", boot_threshold, "label match threshold");
    add_fetch_flags(boot, boot_fetch);

    // crawl ----------------------------------------------------------------
    auto* crawl_cmd = app.add_subcommand("crawl", "run the full pipeline over seed sites");
    std::vector<std::string> crawl_seeds;
    std::string crawl_seeds_file, crawl_task_db, crawl_repo, crawl_lexicon, crawl_report;
    std::string crawl_matcher = "semantic";
    double crawl_threshold = 0.6;
    long crawl_max_submissions = 5;
    FetchFlags crawl_fetch;
    crawl_cmd->add_option("--seed", crawl_seeds, "site URL (repeatable)");
    crawl_cmd->add_option("--seeds-file", crawl_seeds_file, "file with one site URL per line");
    crawl_cmd->add_option("--task-db", crawl_task_db, "task database file")->required();
    crawl_cmd->add_option("--repo", crawl_repo, "repository file")->required();
    crawl_cmd->add_option("--lexicon", crawl_lexicon, "label lexicon file")->required();
    crawl_cmd->add_option("--threshold", crawl_threshold, "label match threshold")
        ->envname("HWCRAWL_THRESHOLD");
    crawl_cmd->add_option("--max-submissions", crawl_max_submissions, "submissions per form");
    crawl_cmd->add_option("--matcher", crawl_matcher, "semantic or exact")
        ->check(CLI::IsMember({"semantic", "exact"}));
    crawl_cmd->add_option("--report", crawl_report, "write the crawl report (JSON) here");
    add_fetch_flags(crawl_cmd, crawl_fetch);

    // query ----------------------------------------------------------------
    auto* query_cmd = app.add_subcommand("query", "search the repository");
    std::string q_isbn, q_title, q_author, q_publisher, q_keywords, q_price, q_repo;
    query_cmd->add_option("--repo", q_repo, "repository file")->required();
    query_cmd->add_option("--isbn", q_isbn, "ISBN substring");
    query_cmd->add_option("--title", q_title, "title substring");
    query_cmd->add_option("--author", q_author, "author substring");
    query_cmd->add_option("--publisher", q_publisher, "publisher substring");
    query_cmd->add_option("--keywords", q_keywords, "keywords substring");
    query_cmd->add_option("--price", q_price, "price substring");

    // stats ----------------------------------------------------------------
    auto* stats_cmd = app.add_subcommand("stats", "print a saved crawl report");
    std::string stats_report;
    stats_cmd->add_option("--report", stats_report, "crawl report file")->required();

    // export ---------------------------------------------------------------
    auto* export_cmd = app.add_subcommand("export", "dump the repository to a file");
    std::string exp_repo, exp_out, exp_format = "dsv";
    export_cmd->add_option("--repo", exp_repo, "repository file")->required();
    export_cmd->add_option("--out", exp_out, "output file")->required();
    export_cmd->add_option("--format", exp_format, "dsv or lines")
        ->check(CLI::IsMember({"dsv", "lines"}));

    // fixtures ---------------------------------------------------------------
    auto* fixtures_cmd = app.add_subcommand("fixtures", "synthetic site harness");
    fixtures_cmd->require_subcommand(1);
    auto* serve_cmd = fixtures_cmd->add_subcommand("serve", "serve manifest sites over loopback");
    std::string serve_manifest;
    int serve_port = 8100;
    serve_cmd->add_option("--manifest", serve_manifest, "site manifest file")->required();
    serve_cmd->add_option("--port", serve_port, "port to bind on 127.0.0.1");
    auto* validate_cmd = fixtures_cmd->add_subcommand("validate", "check a manifest file");
    std::string validate_manifest;
    validate_cmd->add_option("--manifest", validate_manifest, "site manifest file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 convention
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    OutputMode mode = output_mode_name == "lines" ? OutputMode::Lines : OutputMode::Human;

    try {
        if (boot->parsed()) {
            auto seeds = gather_seeds(boot_seeds, boot_seeds_file);
            if (seeds.empty()) {
                std::cerr << "bootstrap: no seeds given\n";
                return 2;
            }
            LabelLexicon lexicon = LabelLexicon::load_file(boot_lexicon);
            Fetcher fetcher(boot_fetch.to_policy());
            std::vector<WebPage> pages;
            for (const auto& seed : seeds) {
                try {
                    pages.push_back(fetcher.fetch_page(seed));
                } catch (const std::runtime_error& e) {
                    std::cerr << "bootstrap: " << e.what() << "\n";
                }
            }
            BootstrapStats stats;
            TaskDatabase db = bootstrap(pages, lexicon, boot_threshold, boot_domain, &stats);
            db.save_file(boot_out);
            for (const auto& d : stats.diagnostics) std::cerr << "bootstrap: " << d << "\n";
            if (mode == OutputMode::Lines) {
                nlohmann::json j;
                j["pages_used"] = stats.pages_used;
                j["rows_inserted"] = stats.rows_inserted;
                j["values"] = db.total_value_count();
                j["concepts"] = db.concepts().size();
                std::cout << j.dump() << "\n";
            } else {
                std::cout << "task database written to " << boot_out << ": "
                          << db.concepts().size() << " concepts, " << db.total_value_count()
                          << " values from " << stats.pages_used << " page(s)\n";
            }
            return 0;
        }

        if (crawl_cmd->parsed()) {
            CrawlConfig config;
            config.seeds = gather_seeds(crawl_seeds, crawl_seeds_file);
            config.task_db_path = crawl_task_db;
            config.repo_path = crawl_repo;
            config.lexicon_path = crawl_lexicon;
            config.threshold = crawl_threshold;
            config.max_submissions_per_form = static_cast<size_t>(crawl_max_submissions);
            config.fetch = crawl_fetch.to_policy();
            config.matcher =
                crawl_matcher == "exact" ? MatcherMode::Exact : MatcherMode::Semantic;
            config.report_path = crawl_report;
            CrawlReport report = crawl(config);
            report.print(std::cout, mode);
            return 0;
        }

        if (query_cmd->parsed()) {
            Repository repo = Repository::open(q_repo);
            QueryCriteria criteria;
            if (!q_isbn.empty()) criteria.isbn = q_isbn;
            if (!q_title.empty()) criteria.title = q_title;
            if (!q_author.empty()) criteria.author = q_author;
            if (!q_publisher.empty()) criteria.publisher = q_publisher;
            if (!q_keywords.empty()) criteria.keywords = q_keywords;
            if (!q_price.empty()) criteria.price = q_price;
            std::vector<DataRecord> hits;
            try {
                hits = repo.query(criteria);
            } catch (const EmptyCriteriaError& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
            if (mode == OutputMode::Lines)
                print_records_lines(std::cout, hits);
            else
                print_records_table(std::cout, hits);
            return 0;
        }

        if (stats_cmd->parsed()) {
            CrawlReport report = CrawlReport::from_json(tsv::read_file(stats_report));
            report.print(std::cout, mode);
            return 0;
        }

        if (export_cmd->parsed()) {
            Repository repo = Repository::open(exp_repo);
            repo.export_to(exp_out, exp_format == "lines" ? Repository::ExportFormat::JsonLines
                                                          : Repository::ExportFormat::Dsv);
            std::cout << repo.size() << " record(s) written to " << exp_out << "\n";
            return 0;
        }

        if (validate_cmd->parsed()) {
            try {
                fixture::SiteManifest manifest = fixture::SiteManifest::load_file(validate_manifest);
                if (mode == OutputMode::Lines) {
                    nlohmann::json j;
                    j["sites"] = manifest.sites.size();
                    nlohmann::json names = nlohmann::json::array();
                    for (const auto& s : manifest.sites) names.push_back(s.name);
                    j["names"] = names;
                    std::cout << j.dump() << "\n";
                } else {
                    std::cout << "manifest OK: " << manifest.sites.size() << " site(s)\n";
                }
                return 0;
            } catch (const fixture::ManifestError& e) {
                std::cerr << e.what() << "\n";
                return 1;
            }
        }

        if (serve_cmd->parsed()) {
            fixture::SiteManifest manifest = fixture::SiteManifest::load_file(serve_manifest);
            fixture::FixtureServer server(std::move(manifest));
            int port = server.start(serve_port);
            std::cout << "serving " << server.manifest().sites.size() << " site(s) on "
                      << server.base_url() << "\n";
            for (const auto& site : server.manifest().sites)
                std::cout << "  " << site.name << ": http://127.0.0.1:" << port << site.mount
                          << "/\n";
            std::cout << "request log: " << server.base_url() << "/__log\n" << std::flush;
            while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace hwc::cli
