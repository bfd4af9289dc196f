#include "hwc/fixture.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hwc/text.hpp"
#include "hwc/tsv.hpp"

namespace hwc::fixture {

namespace {

using nlohmann::json;

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string url_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '+') {
            out.push_back(' ');
        } else if (c == '%' && i + 2 < s.size()) {
            int hi = hex_digit(s[i + 1]);
            int lo = hex_digit(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>((hi << 4) | lo));
                i += 2;
            } else {
                out.push_back(c);
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string url_encode_component(std::string_view raw) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if ((u >= 'A' && u <= 'Z') || (u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') ||
            u == '-' || u == '_' || u == '.') {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(hex[u >> 4]);
            out.push_back(hex[u & 0xF]);
        }
    }
    return out;
}

std::string encode_params(const std::vector<std::pair<std::string, std::string>>& params) {
    std::string out;
    for (const auto& [k, v] : params) {
        if (!out.empty()) out.push_back('&');
        out += url_encode_component(k);
        out.push_back('=');
        out += url_encode_component(v);
    }
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_urlencoded(std::string_view s) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '&') {
            std::string_view pair = s.substr(start, i - start);
            start = i + 1;
            if (pair.empty()) continue;
            size_t eq = pair.find('=');
            if (eq == std::string_view::npos)
                out.emplace_back(url_decode(pair), "");
            else
                out.emplace_back(url_decode(pair.substr(0, eq)), url_decode(pair.substr(eq + 1)));
        }
    }
    return out;
}

std::string html_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

Dataset Dataset::parse(std::string_view content, const std::string& origin) {
    Dataset data;
    bool header_seen = false;
    int lineno = 0;
    for (const auto& line : tsv::split_lines(content)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = tsv::parse_row(line);
        if (!header_seen) {
            header_seen = true;
            data.columns = std::move(cells);
            continue;
        }
        if (cells.size() > data.columns.size())
            throw ManifestError(origin + ":" + std::to_string(lineno) +
                                ": row has more cells than the header");
        cells.resize(data.columns.size());
        data.rows.push_back(std::move(cells));
    }
    if (!header_seen) throw ManifestError(origin + ": dataset has no header row");
    return data;
}

Dataset Dataset::load_file(const std::string& path) {
    return parse(tsv::read_file(path), path);
}

std::optional<size_t> Dataset::column_index(std::string_view name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (text::equals_ci(columns[i], name)) return i;
    return std::nullopt;
}

std::vector<size_t> filter_rows(
    const Dataset& data,
    const std::vector<std::pair<std::string, std::string>>& column_criteria) {
    std::vector<size_t> out;
    for (size_t r = 0; r < data.rows.size(); ++r) {
        bool match = true;
        for (const auto& [column, pattern] : column_criteria) {
            if (pattern.empty()) continue;
            auto col = data.column_index(column);
            if (!col || !text::contains_ci(data.rows[r][*col], pattern)) {
                match = false;
                break;
            }
        }
        if (match) out.push_back(r);
    }
    return out;
}

std::string FixtureSite::result_label_for(std::string_view column) const {
    for (const auto& [col, label] : result_labels)
        if (text::equals_ci(col, column)) return label;
    return std::string(column);
}

SiteManifest SiteManifest::parse(std::string_view content, const std::string& base_dir,
                                 const std::string& origin) {
    json root;
    try {
        root = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ManifestError(origin + ": " + e.what());
    }
    if (!root.is_object() || !root.contains("sites") || !root["sites"].is_array())
        throw ManifestError(origin + ": top level must be an object with a 'sites' array");

    SiteManifest manifest;
    for (const auto& js : root["sites"]) {
        FixtureSite site;
        site.name = js.value("name", "");
        site.mount = js.value("mount", "");
        auto where = [&](const std::string& field) {
            return origin + ": site '" + (site.name.empty() ? "?" : site.name) + "': " + field;
        };
        if (site.name.empty()) throw ManifestError(origin + ": site without a name");
        if (site.mount.empty() || site.mount[0] != '/' ||
            (site.mount.size() > 1 && site.mount.back() == '/'))
            throw ManifestError(where("mount must start with '/' and not end with one"));
        for (const auto& other : manifest.sites) {
            if (other.mount == site.mount) throw ManifestError(where("duplicate mount"));
            if (other.name == site.name) throw ManifestError(where("duplicate name"));
        }

        if (!js.contains("form") || !js["form"].is_object())
            throw ManifestError(where("missing form object"));
        const json& jf = js["form"];
        site.form.method = text::to_lower_ascii(jf.value("method", "get"));
        if (site.form.method != "get" && site.form.method != "post")
            throw ManifestError(where("form.method must be get or post"));
        site.form.layout = jf.value("layout", "labels");
        site.form.named_submit = jf.value("named_submit", false);
        if (!jf.contains("fields") || !jf["fields"].is_array() || jf["fields"].empty())
            throw ManifestError(where("form.fields must be a non-empty array"));
        for (const auto& jfield : jf["fields"]) {
            FixtureField field;
            field.name = jfield.value("name", "");
            field.label = jfield.value("label", "");
            field.column = jfield.value("column", "");
            field.control = jfield.value("control", "text");
            if (field.name.empty()) throw ManifestError(where("field without a name"));
            if (field.column.empty())
                throw ManifestError(where("field '" + field.name + "' without a column"));
            if (field.control != "text" && field.control != "select")
                throw ManifestError(where("field '" + field.name + "': unknown control"));
            for (const auto& f : site.form.fields)
                if (f.name == field.name)
                    throw ManifestError(where("duplicate field name '" + field.name + "'"));
            if (field.control == "select") {
                if (!jfield.contains("options") || !jfield["options"].is_array() ||
                    jfield["options"].empty())
                    throw ManifestError(where("select field '" + field.name + "' needs options"));
                for (const auto& jo : jfield["options"]) {
                    if (jo.is_string())
                        field.options.emplace_back(jo.get<std::string>(), jo.get<std::string>());
                    else
                        field.options.emplace_back(jo.value("value", ""), jo.value("text", ""));
                }
            }
            site.form.fields.push_back(std::move(field));
        }

        std::string dataset_rel = js.value("dataset", "");
        if (dataset_rel.empty()) throw ManifestError(where("missing dataset path"));
        std::filesystem::path p(dataset_rel);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        site.dataset_path = p.string();
        site.dataset = Dataset::load_file(site.dataset_path);

        for (const auto& field : site.form.fields)
            if (!site.dataset.column_index(field.column))
                throw ManifestError(where("field '" + field.name + "' filters unknown column '" +
                                          field.column + "'"));

        site.results_per_page = js.value("results_per_page", 10);
        if (site.results_per_page < 1)
            throw ManifestError(where("results_per_page must be positive"));
        site.result_layout = js.value("result_layout", "table");
        if (site.result_layout != "table" && site.result_layout != "blocks")
            throw ManifestError(where("result_layout must be table or blocks"));
        if (js.contains("result_labels")) {
            for (const auto& [col, label] : js["result_labels"].items()) {
                if (!site.dataset.column_index(col))
                    throw ManifestError(where("result_labels names unknown column '" + col + "'"));
                site.result_labels.emplace_back(col, label.get<std::string>());
            }
        }
        site.seed_listing = js.value("seed_listing", false);

        if (js.contains("behaviors")) {
            const json& jb = js["behaviors"];
            site.behaviors.redirect_hops = jb.value("redirect_hops", 0);
            site.behaviors.transient_failures = jb.value("transient_failures", 0);
            if (site.behaviors.redirect_hops < 0 || site.behaviors.redirect_hops > 8)
                throw ManifestError(where("redirect_hops out of range"));
            if (site.behaviors.transient_failures < 0)
                throw ManifestError(where("transient_failures must be >= 0"));
            if (jb.contains("error_routes")) {
                for (const auto& [route, status] : jb["error_routes"].items()) {
                    if (route.empty() || route[0] != '/')
                        throw ManifestError(where("error route must start with '/'"));
                    site.behaviors.error_routes.emplace_back(route, status.get<int>());
                }
            }
            if (jb.contains("unavailable_isbns"))
                for (const auto& i : jb["unavailable_isbns"])
                    site.behaviors.unavailable_isbns.push_back(i.get<std::string>());
        }
        manifest.sites.push_back(std::move(site));
    }
    if (manifest.sites.empty()) throw ManifestError(origin + ": no sites defined");
    return manifest;
}

SiteManifest SiteManifest::load_file(const std::string& path) {
    std::string dir = std::filesystem::path(path).parent_path().string();
    return parse(tsv::read_file(path), dir.empty() ? "." : dir, path);
}

const FixtureSite* SiteManifest::site_by_name(std::string_view name) const {
    for (const auto& s : sites)
        if (s.name == name) return &s;
    return nullptr;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

std::string page_head(const std::string& heading) {
    return "<html><head><title>catalog</title></head><body><h1>" + html_escape(heading) +
           "</h1>\n";
}

constexpr const char* kPageFoot = "</body></html>\n";

std::string render_input(const FixtureField& field, const std::string& id,
                         const std::string& placeholder) {
    if (field.control == "select") {
        std::ostringstream os;
        os << "<select" << (id.empty() ? "" : " id=\"" + id + "\"") << " name=\""
           << html_escape(field.name) << "\">";
        for (const auto& [value, label] : field.options)
            os << "<option value=\"" << html_escape(value) << "\">" << html_escape(label)
               << "</option>";
        os << "</select>";
        return os.str();
    }
    std::string out = "<input type=\"text\"";
    if (!id.empty()) out += " id=\"" + id + "\"";
    out += " name=\"" + html_escape(field.name) + "\"";
    if (!placeholder.empty()) out += " placeholder=\"" + html_escape(placeholder) + "\"";
    out += ">";
    return out;
}

std::string render_form(const FixtureSite& site) {
    const FixtureForm& form = site.form;
    std::ostringstream os;
    os << "<form method=\"" << form.method << "\" action=\"" << site.mount << "/search\">\n";
    if (form.layout == "table") os << "<table>\n";
    int id_counter = 0;
    for (const auto& field : form.fields) {
        std::string fid = "f" + std::to_string(id_counter++);
        if (form.layout == "table") {
            os << "<tr><td>" << html_escape(field.label) << "</td><td>"
               << render_input(field, "", "") << "</td></tr>\n";
        } else if (form.layout == "wrapped") {
            os << "<label>" << html_escape(field.label) << " " << render_input(field, "", "")
               << "</label><br>\n";
        } else if (form.layout == "placeholder") {
            os << render_input(field, "", field.label) << "<br>\n";
        } else if (form.layout == "bare") {
            os << render_input(field, "", "") << "<br>\n";
        } else {  // labels
            os << "<label for=\"" << fid << "\">" << html_escape(field.label) << "</label>"
               << render_input(field, fid, "") << "<br>\n";
        }
    }
    if (form.layout == "table") os << "</table>\n";
    if (form.named_submit)
        os << "<input type=\"submit\" name=\"go\" value=\"Search\">\n";
    else
        os << "<input type=\"submit\" value=\"Search\">\n";
    os << "</form>\n";
    return os.str();
}

bool row_unavailable(const FixtureSite& site, const std::vector<std::string>& row) {
    auto isbn_col = site.dataset.column_index("ISBN");
    if (!isbn_col) return false;
    for (const auto& isbn : site.behaviors.unavailable_isbns)
        if (row[*isbn_col] == isbn) return true;
    return false;
}

std::string render_rows(const FixtureSite& site, const std::vector<size_t>& row_indices,
                        bool full_listing) {
    const Dataset& data = site.dataset;
    bool with_availability = !site.behaviors.unavailable_isbns.empty() && !full_listing;
    std::ostringstream os;
    std::string layout = full_listing ? "table" : site.result_layout;
    if (layout == "table") {
        os << "<table>\n<tr>";
        for (const auto& col : data.columns)
            os << "<th>" << html_escape(full_listing ? col : site.result_label_for(col)) << "</th>";
        if (with_availability) os << "<th>Availability</th>";
        os << "</tr>\n";
        for (size_t r : row_indices) {
            os << "<tr>";
            for (const auto& cell : data.rows[r]) os << "<td>" << html_escape(cell) << "</td>";
            if (with_availability)
                os << "<td>" << (row_unavailable(site, data.rows[r]) ? "Out of stock" : "In stock")
                   << "</td>";
            os << "</tr>\n";
        }
        os << "</table>\n";
    } else {
        os << "<div class=\"hits\">\n";
        for (size_t r : row_indices) {
            os << "<div class=\"hit\">";
            for (size_t c = 0; c < data.columns.size(); ++c)
                os << "<span>" << html_escape(site.result_label_for(data.columns[c])) << ": "
                   << html_escape(data.rows[r][c]) << "</span> ";
            if (with_availability)
                os << "<span>Status: "
                   << (row_unavailable(site, data.rows[r]) ? "Out of stock" : "In stock")
                   << "</span>";
            os << "</div>\n";
        }
        os << "</div>\n";
    }
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// server

struct FixtureServer::Impl {
    httplib::Server server;
    std::thread worker;
    mutable std::mutex mutex;
    std::vector<RequestLogEntry> log;
    std::vector<int> failures_left;  // per site
    std::atomic<size_t> seq{0};

    void record(const std::string& method, const httplib::Request& req) {
        RequestLogEntry entry;
        entry.seq = seq++;
        entry.at = std::chrono::steady_clock::now();
        entry.method = method;
        entry.path = req.path;
        std::string query;
        size_t qpos = req.target.find('?');
        if (qpos != std::string::npos) query = req.target.substr(qpos + 1);
        if (method == "POST")
            entry.params = parse_urlencoded(req.body);
        else
            entry.params = parse_urlencoded(query);
        std::lock_guard<std::mutex> lock(mutex);
        log.push_back(std::move(entry));
    }
};

FixtureServer::FixtureServer(SiteManifest manifest)
    : impl_(std::make_unique<Impl>()), manifest_(std::move(manifest)) {
    impl_->failures_left.resize(manifest_.sites.size());
    reset_behaviors();
}

FixtureServer::~FixtureServer() {
    stop();
}

std::string FixtureServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
}

std::string FixtureServer::site_url(std::string_view site_name) const {
    const FixtureSite* site = manifest_.site_by_name(site_name);
    return site ? base_url() + site->mount + "/" : base_url() + "/";
}

std::vector<RequestLogEntry> FixtureServer::log_snapshot() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->log;
}

void FixtureServer::clear_log() {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    impl_->log.clear();
}

void FixtureServer::reset_behaviors() {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    for (size_t i = 0; i < manifest_.sites.size(); ++i)
        impl_->failures_left[i] = manifest_.sites[i].behaviors.transient_failures;
}

int FixtureServer::start(int port) {
    httplib::Server& srv = impl_->server;

    for (size_t site_idx = 0; site_idx < manifest_.sites.size(); ++site_idx) {
        const FixtureSite* site = &manifest_.sites[site_idx];

        auto landing = [this, site](const httplib::Request& req, httplib::Response& res) {
            impl_->record(req.method, req);
            res.set_content(page_head(site->name) + render_form(*site) + kPageFoot, "text/html");
        };
        srv.Get(site->mount, landing);
        srv.Get(site->mount + "/", landing);

        // search: optional transient failures, then an optional redirect
        // chain, then filtered results
        auto search = [this, site, site_idx](const httplib::Request& req, httplib::Response& res,
                                             int hop) {
            impl_->record(req.method, req);
            std::string query;
            size_t qpos = req.target.find('?');
            if (qpos != std::string::npos) query = req.target.substr(qpos + 1);
            auto params =
                req.method == "POST" ? parse_urlencoded(req.body) : parse_urlencoded(query);

            if (hop == 0) {
                bool fail = false;
                {
                    std::lock_guard<std::mutex> lock(impl_->mutex);
                    if (impl_->failures_left[site_idx] > 0) {
                        --impl_->failures_left[site_idx];
                        fail = true;
                    }
                }
                if (fail) {
                    res.status = 500;
                    res.set_content("temporary failure\n", "text/plain");
                    return;
                }
            }
            if (hop < site->behaviors.redirect_hops) {
                std::string loc = site->mount + "/search/hop/" + std::to_string(hop + 1);
                std::string encoded = encode_params(params);
                if (!encoded.empty()) loc += "?" + encoded;
                res.status = req.method == "POST" ? 303 : 302;
                res.set_header("Location", loc);
                return;
            }

            std::vector<std::pair<std::string, std::string>> criteria;
            for (const auto& field : site->form.fields) {
                for (const auto& [k, v] : params) {
                    if (k == field.name && !v.empty()) criteria.emplace_back(field.column, v);
                }
            }
            auto rows = filter_rows(site->dataset, criteria);
            if (rows.empty()) {
                res.set_content(page_head(site->name) +
                                    "<p>No results found for your query.</p>\n" + kPageFoot,
                                "text/html");
                return;
            }
            if (rows.size() > static_cast<size_t>(site->results_per_page))
                rows.resize(static_cast<size_t>(site->results_per_page));
            res.set_content(page_head(site->name) + render_rows(*site, rows, false) + kPageFoot,
                            "text/html");
        };
        srv.Get(site->mount + "/search", [search](const httplib::Request& req,
                                                  httplib::Response& res) { search(req, res, 0); });
        srv.Post(site->mount + "/search", [search](const httplib::Request& req,
                                                   httplib::Response& res) { search(req, res, 0); });
        for (int hop = 1; hop <= site->behaviors.redirect_hops; ++hop) {
            srv.Get(site->mount + "/search/hop/" + std::to_string(hop),
                    [search, hop](const httplib::Request& req, httplib::Response& res) {
                        search(req, res, hop);
                    });
        }

        if (site->seed_listing) {
            srv.Get(site->mount + "/all",
                    [this, site](const httplib::Request& req, httplib::Response& res) {
                        impl_->record(req.method, req);
                        std::vector<size_t> all(site->dataset.rows.size());
                        for (size_t i = 0; i < all.size(); ++i) all[i] = i;
                        res.set_content(
                            page_head(site->name) + render_rows(*site, all, true) + kPageFoot,
                            "text/html");
                    });
        }

        auto echo = [this](const httplib::Request& req, httplib::Response& res) {
            impl_->record(req.method, req);
            std::string query;
            size_t qpos = req.target.find('?');
            if (qpos != std::string::npos) query = req.target.substr(qpos + 1);
            auto params =
                req.method == "POST" ? parse_urlencoded(req.body) : parse_urlencoded(query);
            std::string out;
            for (const auto& [k, v] : params) out += k + "=" + v + "\n";
            res.set_content(out, "text/plain");
        };
        srv.Get(site->mount + "/echo", echo);
        srv.Post(site->mount + "/echo", echo);

        for (const auto& [route, status] : site->behaviors.error_routes) {
            srv.Get(site->mount + route,
                    [this, status = status](const httplib::Request& req, httplib::Response& res) {
                        impl_->record(req.method, req);
                        res.status = status;
                        res.set_content(page_head("oops") + "<p>Error: nothing here.</p>\n" +
                                            kPageFoot,
                                        "text/html");
                    });
        }
    }

    srv.Get("/__log", [this](const httplib::Request&, httplib::Response& res) {
        std::string out;
        auto entries = log_snapshot();
        auto t0 = entries.empty() ? std::chrono::steady_clock::time_point{} : entries.front().at;
        for (const auto& e : entries) {
            nlohmann::json j;
            j["seq"] = e.seq;
            j["t_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(e.at - t0).count();
            j["method"] = e.method;
            j["path"] = e.path;
            nlohmann::json params = nlohmann::json::array();
            for (const auto& [k, v] : e.params) params.push_back({{"name", k}, {"value", v}});
            j["params"] = params;
            out += j.dump();
            out.push_back('\n');
        }
        res.set_content(out, "application/jsonl");
    });

    if (port == 0) {
        port_ = impl_->server.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw std::runtime_error("fixture server: cannot bind a port");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port))
            throw std::runtime_error("fixture server: cannot bind port " + std::to_string(port));
        port_ = port;
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    while (!impl_->server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    return port_;
}

void FixtureServer::stop() {
    if (impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

}  // namespace hwc::fixture
