#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "hwc/form_filler.hpp"
#include "hwc/form_model.hpp"

namespace hwc {

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TimeoutError : NetworkError {
    using NetworkError::NetworkError;
};
struct TooManyRedirectsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RobotsDeniedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FetchPolicy {
    std::chrono::milliseconds per_host_delay{1000};
    int max_retries = 2;
    std::chrono::milliseconds timeout{10000};
    int max_redirects = 5;
    std::string user_agent = "hwcrawl/0.1";
    bool respect_robots = true;

    void validate() const;  // throws std::invalid_argument
};

// Canonical URLs and submission fingerprints already processed.
class VisitedSet {
public:
    // Returns true when the key was new.
    bool insert_if_new(const std::string& key);
    bool contains(const std::string& key) const;
    size_t size() const;

private:
    mutable std::mutex mutex_;
    std::unordered_set<std::string> seen_;
};

// HTTP/1.1 client with per-host politeness, bounded retries, and an
// explicit redirect walk. Safe to call from several workers; the delay
// bookkeeping and the visited set are the serialized points.
class Fetcher {
public:
    explicit Fetcher(FetchPolicy policy);

    // Follows at most max_redirects hops, retries transport errors and
    // 5xx answers, and returns the final page (its URL is the canonical
    // final location). Throws NetworkError, TimeoutError,
    // TooManyRedirectsError, or RobotsDeniedError.
    WebPage fetch_page(const std::string& url);
    WebPage submit_form(const SubmissionRequest& request);

    VisitedSet& visited() { return visited_; }
    const FetchPolicy& policy() const { return policy_; }

    // "METHOD canonical-url?params" — the revisit identity of a submission.
    static std::string fingerprint(const SubmissionRequest& request);

private:
    struct RawResponse {
        int status = 0;
        std::string body;
        std::string location;
        std::string content_type;
    };

    RawResponse request_once(const std::string& url, HttpMethod method, const std::string& body);
    RawResponse request_with_retries(const std::string& url, HttpMethod method,
                                     const std::string& body);
    WebPage run(const std::string& url, HttpMethod method, const std::string& body);
    void wait_politely(const std::string& host_key);
    void mark_complete(const std::string& host_key);
    bool robots_allows(const std::string& url);

    FetchPolicy policy_;
    VisitedSet visited_;
    std::mutex hosts_mutex_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_allowed_;
    std::mutex robots_mutex_;
    std::map<std::string, std::vector<std::string>> robots_disallow_;
};

}  // namespace hwc
