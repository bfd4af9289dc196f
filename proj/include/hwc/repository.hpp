#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hwc/extractor.hpp"

namespace hwc {

struct StorageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyCriteriaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MergeStats {
    size_t inserted = 0;
    size_t duplicates_dropped = 0;
};

// Per-slot substring patterns, conjunctive. isbn/title/author/publisher/
// keywords/price in slot order; availability is not queryable.
struct QueryCriteria {
    std::optional<std::string> isbn;
    std::optional<std::string> title;
    std::optional<std::string> author;
    std::optional<std::string> publisher;
    std::optional<std::string> keywords;
    std::optional<std::string> price;

    bool empty() const;
    const std::optional<std::string>& slot(size_t i) const;
};

// The integrated record store. Records merge by dedup key; a duplicate
// enriches the existing record field-wise instead of replacing it. Backed
// by one tab-separated file rewritten on save (compaction on every write
// keeps the file canonical at these volumes).
class Repository {
public:
    Repository() = default;

    // Loads the file when it exists; a missing file is an empty store.
    static Repository open(const std::string& path);
    static Repository parse(std::string_view content, const std::string& origin = "<memory>");

    MergeStats upsert(const std::vector<DataRecord>& records);

    // Case-insensitive substring match per criterion, all criteria must
    // hold; insertion order. Throws EmptyCriteriaError when no criterion
    // is set.
    std::vector<DataRecord> query(const QueryCriteria& criteria) const;

    enum class ExportFormat { Dsv, JsonLines };
    std::string serialize(ExportFormat format = ExportFormat::Dsv) const;
    void export_to(const std::string& path, ExportFormat format) const;
    static Repository import_json_lines(const std::string& path);

    void save() const;  // throws StorageError
    void save_as(const std::string& path) const;

    size_t size() const { return records_.size(); }
    const std::vector<DataRecord>& records() const { return records_; }
    bool structurally_equal(const Repository& other) const;

private:
    std::vector<DataRecord> records_;
    std::unordered_map<std::string, size_t> by_key_;
    std::string path_;
};

}  // namespace hwc
