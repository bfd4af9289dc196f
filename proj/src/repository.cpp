#include "hwc/repository.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hwc/text.hpp"
#include "hwc/tsv.hpp"

namespace hwc {

namespace {

using nlohmann::json;

std::vector<std::string> record_cells(const DataRecord& r) {
    std::vector<std::string> cells;
    for (size_t i = 0; i < DataRecord::kSlotCount; ++i) cells.push_back(r.slot(i).value_or(""));
    cells.push_back(r.source_url);
    cells.push_back(r.extracted_at);
    return cells;
}

std::vector<std::string> header_cells() {
    std::vector<std::string> cells;
    for (size_t i = 0; i < DataRecord::kSlotCount; ++i) cells.emplace_back(DataRecord::slot_name(i));
    cells.emplace_back("@source");
    cells.emplace_back("@extracted");
    return cells;
}

}  // namespace

bool QueryCriteria::empty() const {
    for (size_t i = 0; i < 6; ++i) {
        const auto& c = slot(i);
        if (c && !c->empty()) return false;
    }
    return true;
}

const std::optional<std::string>& QueryCriteria::slot(size_t i) const {
    switch (i) {
        case 0: return isbn;
        case 1: return title;
        case 2: return author;
        case 3: return publisher;
        case 4: return keywords;
        default: return price;
    }
}

Repository Repository::open(const std::string& path) {
    Repository repo;
    repo.path_ = path;
    if (std::filesystem::exists(path)) {
        repo = parse(tsv::read_file(path), path);
        repo.path_ = path;
    }
    return repo;
}

Repository Repository::parse(std::string_view content, const std::string& origin) {
    Repository repo;
    bool header_seen = false;
    int lineno = 0;
    for (const auto& line : tsv::split_lines(content)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cells = tsv::parse_row(line);
        if (!header_seen) {
            header_seen = true;
            continue;  // fixed column set; header is for humans and diffs
        }
        DataRecord rec;
        for (size_t i = 0; i < DataRecord::kSlotCount && i < cells.size(); ++i)
            if (!cells[i].empty()) rec.slot(i) = cells[i];
        if (cells.size() > DataRecord::kSlotCount) rec.source_url = cells[DataRecord::kSlotCount];
        if (cells.size() > DataRecord::kSlotCount + 1)
            rec.extracted_at = cells[DataRecord::kSlotCount + 1];
        if (!rec.has_identity())
            throw StorageError(origin + ":" + std::to_string(lineno) +
                               ": record lacks title and isbn");
        repo.by_key_.emplace(rec.dedup_key(), repo.records_.size());
        repo.records_.push_back(std::move(rec));
    }
    return repo;
}

MergeStats Repository::upsert(const std::vector<DataRecord>& records) {
    MergeStats stats;
    for (const DataRecord& rec : records) {
        auto it = by_key_.find(rec.dedup_key());
        if (it == by_key_.end()) {
            by_key_.emplace(rec.dedup_key(), records_.size());
            records_.push_back(rec);
            ++stats.inserted;
        } else {
            // enrich: fill holes, keep what we had
            DataRecord& existing = records_[it->second];
            for (size_t i = 0; i < DataRecord::kSlotCount; ++i) {
                if (!existing.slot(i) && rec.slot(i)) existing.slot(i) = rec.slot(i);
            }
            ++stats.duplicates_dropped;
        }
    }
    return stats;
}

std::vector<DataRecord> Repository::query(const QueryCriteria& criteria) const {
    if (criteria.empty()) throw EmptyCriteriaError("query needs at least one criterion");
    std::vector<DataRecord> out;
    for (const DataRecord& rec : records_) {
        bool match = true;
        for (size_t i = 0; i < 6 && match; ++i) {
            const auto& pat = criteria.slot(i);
            if (!pat || pat->empty()) continue;
            const auto& val = rec.slot(i);
            if (!val || !text::contains_ci(*val, *pat)) match = false;
        }
        if (match) out.push_back(rec);
    }
    return out;
}

std::string Repository::serialize(ExportFormat format) const {
    if (format == ExportFormat::Dsv) {
        std::string out = tsv::format_row(header_cells());
        out.push_back('\n');
        for (const DataRecord& rec : records_) {
            out += tsv::format_row(record_cells(rec));
            out.push_back('\n');
        }
        return out;
    }
    std::string out;
    for (const DataRecord& rec : records_) {
        json j;
        for (size_t i = 0; i < DataRecord::kSlotCount; ++i)
            if (rec.slot(i)) j[DataRecord::slot_name(i)] = *rec.slot(i);
        j["source"] = rec.source_url;
        j["extracted"] = rec.extracted_at;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

void Repository::export_to(const std::string& path, ExportFormat format) const {
    try {
        tsv::write_file(path, serialize(format));
    } catch (const std::runtime_error& e) {
        throw StorageError(e.what());
    }
}

Repository Repository::import_json_lines(const std::string& path) {
    Repository repo;
    std::string content;
    try {
        content = tsv::read_file(path);
    } catch (const std::runtime_error& e) {
        throw StorageError(e.what());
    }
    for (const auto& line : tsv::split_lines(content)) {
        if (text::trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw StorageError(path + ": bad line: " + line);
        DataRecord rec;
        for (size_t i = 0; i < DataRecord::kSlotCount; ++i) {
            auto it = j.find(DataRecord::slot_name(i));
            if (it != j.end() && it->is_string()) rec.slot(i) = it->get<std::string>();
        }
        if (j.contains("source")) rec.source_url = j["source"].get<std::string>();
        if (j.contains("extracted")) rec.extracted_at = j["extracted"].get<std::string>();
        repo.by_key_.emplace(rec.dedup_key(), repo.records_.size());
        repo.records_.push_back(std::move(rec));
    }
    return repo;
}

void Repository::save() const {
    if (path_.empty()) throw StorageError("repository has no backing path");
    save_as(path_);
}

void Repository::save_as(const std::string& path) const {
    try {
        tsv::write_file(path, serialize(ExportFormat::Dsv));
    } catch (const std::runtime_error& e) {
        throw StorageError(e.what());
    }
}

bool Repository::structurally_equal(const Repository& other) const {
    if (records_.size() != other.records_.size()) return false;
    for (size_t i = 0; i < records_.size(); ++i) {
        const DataRecord& a = records_[i];
        const DataRecord& b = other.records_[i];
        for (size_t s = 0; s < DataRecord::kSlotCount; ++s)
            if (a.slot(s) != b.slot(s)) return false;
        if (a.source_url != b.source_url || a.extracted_at != b.extracted_at) return false;
    }
    return true;
}

}  // namespace hwc
