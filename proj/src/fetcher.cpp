#include "hwc/fetcher.hpp"

#include <thread>

#include <httplib.h>

#include "hwc/html.hpp"
#include "hwc/text.hpp"
#include "hwc/url.hpp"

namespace hwc {

void FetchPolicy::validate() const {
    if (per_host_delay.count() <= 0) throw std::invalid_argument("per_host_delay must be positive");
    if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (max_redirects < 0) throw std::invalid_argument("max_redirects must be >= 0");
}

bool VisitedSet::insert_if_new(const std::string& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    return seen_.insert(key).second;
}

bool VisitedSet::contains(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return seen_.count(key) > 0;
}

size_t VisitedSet::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return seen_.size();
}

Fetcher::Fetcher(FetchPolicy policy) : policy_(std::move(policy)) {
    policy_.validate();
}

std::string Fetcher::fingerprint(const SubmissionRequest& request) {
    std::string fp = request.method == HttpMethod::Post ? "POST " : "GET ";
    fp += url::canonicalize(request.url);
    if (request.method == HttpMethod::Post) {
        fp.push_back('?');
        fp += form_urlencode(request.parameters);
    }
    return fp;
}

void Fetcher::wait_politely(const std::string& host_key) {
    while (true) {
        std::chrono::steady_clock::time_point wake;
        {
            std::lock_guard<std::mutex> lock(hosts_mutex_);
            auto now = std::chrono::steady_clock::now();
            auto it = next_allowed_.find(host_key);
            if (it == next_allowed_.end() || it->second <= now) {
                // reserve the slot so parallel workers queue behind us
                next_allowed_[host_key] = now + policy_.per_host_delay;
                return;
            }
            wake = it->second;
        }
        std::this_thread::sleep_until(wake);
    }
}

void Fetcher::mark_complete(const std::string& host_key) {
    std::lock_guard<std::mutex> lock(hosts_mutex_);
    next_allowed_[host_key] = std::chrono::steady_clock::now() + policy_.per_host_delay;
}

Fetcher::RawResponse Fetcher::request_once(const std::string& raw_url, HttpMethod method,
                                           const std::string& body) {
    auto parsed = url::parse(raw_url);
    if (!parsed) throw NetworkError("bad URL: " + raw_url);

    std::string host_key = parsed->host + ":" + std::to_string(parsed->effective_port());
    wait_politely(host_key);

    httplib::Client client(parsed->scheme + "://" + parsed->host + ":" +
                           std::to_string(parsed->effective_port()));
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(policy_.timeout) -
                 std::chrono::duration_cast<std::chrono::microseconds>(secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(false);  // the redirect walk is ours
    client.set_url_encode(false);       // the target is already percent-encoded
    httplib::Headers headers{{"User-Agent", policy_.user_agent}};

    std::string target = parsed->path;
    if (!parsed->query.empty()) target += "?" + parsed->query;

    httplib::Result result = method == HttpMethod::Post
                                 ? client.Post(target, headers, body,
                                               "application/x-www-form-urlencoded")
                                 : client.Get(target, headers);
    mark_complete(host_key);

    if (!result) {
        auto err = result.error();
        std::string what = "request to " + raw_url + " failed: " + httplib::to_string(err);
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write)
            throw TimeoutError(what);
        throw NetworkError(what);
    }
    RawResponse out;
    out.status = result->status;
    out.body = result->body;
    if (result->has_header("Location")) out.location = result->get_header_value("Location");
    if (result->has_header("Content-Type")) out.content_type = result->get_header_value("Content-Type");
    return out;
}

Fetcher::RawResponse Fetcher::request_with_retries(const std::string& url, HttpMethod method,
                                                   const std::string& body) {
    int attempts = policy_.max_retries + 1;
    for (int attempt = 1;; ++attempt) {
        try {
            RawResponse res = request_once(url, method, body);
            if (res.status >= 500 && attempt < attempts) continue;
            return res;
        } catch (const NetworkError&) {
            if (attempt >= attempts) throw;
        }
    }
}

namespace {

std::string charset_of(const std::string& content_type) {
    std::string lc = hwc::text::to_lower_ascii(content_type);
    size_t p = lc.find("charset=");
    if (p == std::string::npos) return "";
    std::string cs = lc.substr(p + 8);
    size_t end = cs.find_first_of("; \t\"'");
    if (end != std::string::npos) cs.resize(end);
    return cs;
}

}  // namespace

WebPage Fetcher::run(const std::string& start_url, HttpMethod method, const std::string& body) {
    std::string current = url::canonicalize(start_url);
    std::string current_body = body;
    HttpMethod current_method = method;

    if (policy_.respect_robots && !robots_allows(current))
        throw RobotsDeniedError("robots.txt forbids " + current);

    int redirects = 0;
    while (true) {
        RawResponse res = request_with_retries(current, current_method, current_body);
        if (res.status >= 300 && res.status < 400 && !res.location.empty()) {
            if (++redirects > policy_.max_redirects)
                throw TooManyRedirectsError("redirect limit exceeded at " + current);
            current = url::resolve(current, res.location);
            // 301/302/303 downgrade to GET; 307/308 keep the method
            if (res.status != 307 && res.status != 308) {
                current_method = HttpMethod::Get;
                current_body.clear();
            }
            continue;
        }
        WebPage page;
        page.url = current;
        page.status = res.status;
        page.fetched_at = std::chrono::system_clock::now();
        page.body = html::decode_body(res.body, charset_of(res.content_type));
        visited_.insert_if_new(page.url);
        return page;
    }
}

WebPage Fetcher::fetch_page(const std::string& url) {
    return run(url, HttpMethod::Get, "");
}

WebPage Fetcher::submit_form(const SubmissionRequest& request) {
    WebPage page = run(request.url, request.method, request.body);
    visited_.insert_if_new(fingerprint(request));
    return page;
}

bool Fetcher::robots_allows(const std::string& raw_url) {
    auto parsed = url::parse(raw_url);
    if (!parsed) return true;
    std::string host_key = parsed->host + ":" + std::to_string(parsed->effective_port());

    std::vector<std::string>* rules = nullptr;
    {
        std::lock_guard<std::mutex> lock(robots_mutex_);
        auto it = robots_disallow_.find(host_key);
        if (it != robots_disallow_.end()) rules = &it->second;
    }
    if (!rules) {
        std::vector<std::string> disallow;
        try {
            std::string robots_url = parsed->scheme + "://" + parsed->host_port() + "/robots.txt";
            RawResponse res = request_with_retries(robots_url, HttpMethod::Get, "");
            if (res.status == 200) {
                bool applies = false;
                for (const auto& line : text::split(res.body, '\n')) {
                    std::string_view sv = text::trim(line);
                    size_t hash = sv.find('#');
                    if (hash != std::string_view::npos) sv = text::trim(sv.substr(0, hash));
                    if (sv.empty()) continue;
                    size_t colon = sv.find(':');
                    if (colon == std::string_view::npos) continue;
                    std::string key = text::to_lower_ascii(text::trim(sv.substr(0, colon)));
                    std::string value(text::trim(sv.substr(colon + 1)));
                    if (key == "user-agent") {
                        applies = value == "*" || text::contains_ci(policy_.user_agent, value);
                    } else if (key == "disallow" && applies && !value.empty()) {
                        disallow.push_back(value);
                    }
                }
            }
        } catch (const std::exception&) {
            // unreachable robots.txt means no restrictions
        }
        std::lock_guard<std::mutex> lock(robots_mutex_);
        rules = &robots_disallow_.emplace(host_key, std::move(disallow)).first->second;
    }
    for (const auto& prefix : *rules)
        if (parsed->path.rfind(prefix, 0) == 0) return false;
    return true;
}

}  // namespace hwc
