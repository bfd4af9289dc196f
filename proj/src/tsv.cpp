#include "hwc/tsv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hwc::tsv {

std::string escape_field(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_field(std::string_view escaped) {
    std::string out;
    out.reserve(escaped.size());
    for (size_t i = 0; i < escaped.size(); ++i) {
        char c = escaped[i];
        if (c == '\\' && i + 1 < escaped.size()) {
            char n = escaped[++i];
            switch (n) {
                case '\\': out.push_back('\\'); break;
                case 't': out.push_back('\t'); break;
                case 'n': out.push_back('\n'); break;
                case 'r': out.push_back('\r'); break;
                default:
                    out.push_back(c);
                    out.push_back(n);
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string format_row(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back('\t');
        out += escape_field(cells[i]);
    }
    return out;
}

std::vector<std::string> parse_row(std::string_view line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            out.push_back(unescape_field(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view content) {
    std::vector<std::string> lines;
    size_t start = 0;
    for (size_t i = 0; i < content.size(); ++i) {
        if (content[i] == '\n') {
            size_t end = i;
            if (end > start && content[end - 1] == '\r') --end;
            lines.emplace_back(content.substr(start, end - start));
            start = i + 1;
        }
    }
    if (start < content.size()) {
        std::string_view last = content.substr(start);
        if (!last.empty() && last.back() == '\r') last.remove_suffix(1);
        lines.emplace_back(last);
    }
    return lines;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace hwc::tsv
