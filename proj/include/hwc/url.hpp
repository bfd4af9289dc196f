#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace hwc::url {

// Decomposed http(s) URL. Fragments are dropped on parse; scheme and host
// are stored lowercased; a port equal to the scheme default is stored as -1.
struct Url {
    std::string scheme;
    std::string host;
    int port = -1;
    std::string path;   // always begins with '/'
    std::string query;  // without '?', may be empty

    std::string canonical() const;
    std::string host_port() const;
    int effective_port() const;
};

std::optional<Url> parse(std::string_view raw);

// Canonical absolute form, or the input untouched when it does not parse.
std::string canonicalize(std::string_view raw);

// RFC 3986 reference resolution for the subset of forms a crawler meets:
// absolute URLs, protocol-relative, absolute paths, relative paths, and
// bare query strings. Returns canonical absolute form.
std::string resolve(std::string_view base, std::string_view ref);

std::string remove_dot_segments(std::string_view path);

}  // namespace hwc::url
