#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hwc::fixture {

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backing data for one synthetic site: header row of column names plus
// value rows, same tab-separated file format the task database uses.
struct Dataset {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    static Dataset load_file(const std::string& path);
    static Dataset parse(std::string_view content, const std::string& origin);
    std::optional<size_t> column_index(std::string_view name) const;
};

// Conjunctive case-insensitive substring filter; returns row indices in
// dataset order. Empty criteria values are ignored. This is the ground
// truth every search endpoint renders from.
std::vector<size_t> filter_rows(
    const Dataset& data,
    const std::vector<std::pair<std::string, std::string>>& column_criteria);

struct FixtureField {
    std::string name;
    std::string label;
    std::string column;                                       // dataset column it filters
    std::string control = "text";                             // "text" | "select"
    std::vector<std::pair<std::string, std::string>> options; // value, text
};

struct FixtureForm {
    std::string method = "get";
    std::string layout = "labels";  // labels | wrapped | table | placeholder | bare
    std::vector<FixtureField> fields;
    bool named_submit = false;
};

struct FixtureBehaviors {
    int redirect_hops = 0;
    int transient_failures = 0;
    std::vector<std::pair<std::string, int>> error_routes;  // route suffix -> status
    std::vector<std::string> unavailable_isbns;
};

struct FixtureSite {
    std::string name;
    std::string mount;  // path prefix, e.g. "/s1"
    FixtureForm form;
    std::string dataset_path;  // resolved absolute
    Dataset dataset;
    int results_per_page = 10;
    std::string result_layout = "table";  // table | blocks
    std::vector<std::pair<std::string, std::string>> result_labels;  // column -> header text
    bool seed_listing = false;
    FixtureBehaviors behaviors;

    std::string result_label_for(std::string_view column) const;
};

struct SiteManifest {
    std::vector<FixtureSite> sites;

    // Loads and validates; dataset paths resolve against the manifest's
    // directory. Throws ManifestError naming the offending site/field.
    static SiteManifest load_file(const std::string& path);
    static SiteManifest parse(std::string_view content, const std::string& base_dir,
                              const std::string& origin);
    const FixtureSite* site_by_name(std::string_view name) const;
};

struct RequestLogEntry {
    size_t seq = 0;
    std::chrono::steady_clock::time_point at{};
    std::string method;
    std::string path;
    std::vector<std::pair<std::string, std::string>> params;  // decoded, wire order
};

// Serves every manifest site from one loopback HTTP endpoint. Handlers are
// deterministic; the only mutable state is the per-site transient failure
// countdown and the request log.
class FixtureServer {
public:
    explicit FixtureServer(SiteManifest manifest);
    ~FixtureServer();

    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    // Binds 127.0.0.1 (an ephemeral port when port == 0) and serves on a
    // background thread. Returns the bound port.
    int start(int port = 0);
    void stop();

    int port() const { return port_; }
    std::string base_url() const;
    std::string site_url(std::string_view site_name) const;  // landing page

    std::vector<RequestLogEntry> log_snapshot() const;
    void clear_log();
    void reset_behaviors();  // restores transient failure counters

    const SiteManifest& manifest() const { return manifest_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SiteManifest manifest_;
    int port_ = 0;
};

// name=value pairs from an application/x-www-form-urlencoded string,
// decoded ('+' as space), wire order preserved.
std::vector<std::pair<std::string, std::string>> parse_urlencoded(std::string_view s);

std::string html_escape(std::string_view s);

}  // namespace hwc::fixture
