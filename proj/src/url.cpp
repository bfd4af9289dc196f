#include "hwc/url.hpp"

#include <cstdlib>

#include "hwc/text.hpp"

namespace hwc::url {

namespace {

int default_port(std::string_view scheme) {
    if (scheme == "http") return 80;
    if (scheme == "https") return 443;
    return -1;
}

}  // namespace

int Url::effective_port() const {
    return port > 0 ? port : default_port(scheme);
}

std::string Url::host_port() const {
    std::string out = host;
    if (port > 0) {
        out.push_back(':');
        out += std::to_string(port);
    }
    return out;
}

std::string Url::canonical() const {
    std::string out = scheme;
    out += "://";
    out += host_port();
    out += path.empty() ? "/" : path;
    if (!query.empty()) {
        out.push_back('?');
        out += query;
    }
    return out;
}

std::optional<Url> parse(std::string_view raw) {
    raw = text::trim(raw);
    size_t scheme_end = raw.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
    Url u;
    u.scheme = text::to_lower_ascii(raw.substr(0, scheme_end));
    if (u.scheme != "http" && u.scheme != "https") return std::nullopt;

    std::string_view rest = raw.substr(scheme_end + 3);
    size_t frag = rest.find('#');
    if (frag != std::string_view::npos) rest = rest.substr(0, frag);

    size_t authority_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, authority_end);
    if (authority.empty()) return std::nullopt;

    size_t colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        std::string_view port_sv = authority.substr(colon + 1);
        char* end = nullptr;
        std::string port_s(port_sv);
        long port = std::strtol(port_s.c_str(), &end, 10);
        if (end != port_s.c_str() && *end == '\0' && port > 0 && port < 65536) {
            u.host = text::to_lower_ascii(authority.substr(0, colon));
            u.port = static_cast<int>(port);
        } else {
            return std::nullopt;
        }
    } else {
        u.host = text::to_lower_ascii(authority);
    }
    if (u.host.empty()) return std::nullopt;
    if (u.port == default_port(u.scheme)) u.port = -1;

    if (authority_end == std::string_view::npos) {
        u.path = "/";
        return u;
    }
    rest = rest.substr(authority_end);
    size_t qpos = rest.find('?');
    if (qpos == std::string_view::npos) {
        u.path = rest.empty() ? "/" : std::string(rest);
    } else {
        u.path = qpos == 0 ? "/" : std::string(rest.substr(0, qpos));
        u.query = std::string(rest.substr(qpos + 1));
    }
    if (u.path.empty() || u.path[0] != '/') u.path.insert(u.path.begin(), '/');
    u.path = remove_dot_segments(u.path);
    return u;
}

std::string canonicalize(std::string_view raw) {
    auto u = parse(raw);
    return u ? u->canonical() : std::string(raw);
}

std::string remove_dot_segments(std::string_view path) {
    std::string out;
    std::string_view in = path;
    while (!in.empty()) {
        if (in.starts_with("../")) {
            in.remove_prefix(3);
        } else if (in.starts_with("./")) {
            in.remove_prefix(2);
        } else if (in.starts_with("/./")) {
            in.remove_prefix(2);
        } else if (in == "/.") {
            in = "/";
        } else if (in.starts_with("/../") || in == "/..") {
            in.remove_prefix(3);
            if (in.empty()) in = "/";
            size_t slash = out.rfind('/');
            out.resize(slash == std::string::npos ? 0 : slash);
        } else if (in == "." || in == "..") {
            break;
        } else {
            size_t next = in.find('/', 1);
            out += in.substr(0, next);
            in = next == std::string_view::npos ? std::string_view{} : in.substr(next);
        }
    }
    return out.empty() ? "/" : out;
}

std::string resolve(std::string_view base, std::string_view ref) {
    ref = text::trim(ref);
    size_t frag = ref.find('#');
    if (frag != std::string_view::npos) ref = ref.substr(0, frag);

    if (ref.find("://") != std::string_view::npos) return canonicalize(ref);

    auto b = parse(base);
    if (!b) return std::string(ref);

    if (ref.empty()) return b->canonical();

    if (ref.starts_with("//")) {
        std::string abs = b->scheme + ":" + std::string(ref);
        return canonicalize(abs);
    }

    Url out = *b;
    if (ref[0] == '?') {
        out.query = std::string(ref.substr(1));
        return out.canonical();
    }
    out.query.clear();
    size_t qpos = ref.find('?');
    std::string_view ref_path = ref;
    if (qpos != std::string_view::npos) {
        out.query = std::string(ref.substr(qpos + 1));
        ref_path = ref.substr(0, qpos);
    }
    if (!ref_path.empty() && ref_path[0] == '/') {
        out.path = remove_dot_segments(ref_path);
    } else if (ref_path.empty()) {
        out.path = b->path;
    } else {
        // merge with the base path's directory
        std::string merged = b->path;
        size_t slash = merged.rfind('/');
        merged.resize(slash == std::string::npos ? 0 : slash + 1);
        merged += ref_path;
        out.path = remove_dot_segments(merged);
    }
    return out.canonical();
}

}  // namespace hwc::url
