#include <doctest.h>

#include <random>

#include "hwc/fixture.hpp"
#include "hwc/repository.hpp"
#include "hwc/tsv.hpp"

#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace hwc;
using test_support::TempDir;
using test_support::fixture_path;

namespace {

DataRecord rec(const std::string& title, const std::string& author, const std::string& isbn = "",
               const std::string& publisher = "") {
    DataRecord r;
    if (!title.empty()) r.title = title;
    if (!author.empty()) r.author = author;
    if (!isbn.empty()) r.isbn = isbn;
    if (!publisher.empty()) r.publisher = publisher;
    r.source_url = "http://site.test/";
    r.extracted_at = "2026-08-11T00:00:00Z";
    return r;
}

std::vector<DataRecord> seed_records() {
    auto data = fixture::Dataset::load_file(fixture_path("data/seed_books.tsv"));
    std::vector<DataRecord> out;
    for (const auto& row : data.rows) {
        DataRecord r = rec(row[1], row[2], row[0], row[3]);
        if (!row[4].empty()) r.keywords = row[4];
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

TEST_CASE("upsert inserts then drops duplicates") {
    Repository repo;
    auto records = seed_records();
    REQUIRE(records.size() == 13);

    MergeStats first = repo.upsert(records);
    CHECK(first.inserted == 13);
    CHECK(first.duplicates_dropped == 0);
    CHECK(repo.size() == 13);

    MergeStats second = repo.upsert(records);
    CHECK(second.inserted == 0);
    CHECK(second.duplicates_dropped == 13);
    CHECK(repo.size() == 13);
    CHECK(first.inserted + first.duplicates_dropped == records.size());

    SUBCASE("the shared-isbn pair stays two records") {
        QueryCriteria c;
        c.isbn = "9780340734209";
        auto hits = repo.query(c);
        CHECK(hits.size() == 2);
    }
}

TEST_CASE("duplicates enrich missing fields without replacing") {
    Repository repo;
    DataRecord sparse = rec("One Title", "One Author");
    repo.upsert({sparse});
    DataRecord fuller = rec("One  TITLE", "one author", "9781111111111", "Some House");
    fuller.price = "$5";
    MergeStats stats = repo.upsert({fuller});
    CHECK(stats.inserted == 0);
    CHECK(stats.duplicates_dropped == 1);
    REQUIRE(repo.size() == 1);
    const DataRecord& merged = repo.records()[0];
    CHECK(merged.title == "One Title");  // original spelling kept
    CHECK(merged.isbn == "9781111111111");
    CHECK(merged.publisher == "Some House");
    CHECK(merged.price == "$5");
}

TEST_CASE("query semantics") {
    Repository repo;
    repo.upsert(seed_records());

    SUBCASE("substring, case-insensitive") {
        QueryCriteria c;
        c.title = "jungle";
        auto hits = repo.query(c);
        REQUIRE(hits.size() == 4);  // Lipstick, Second, The jungle boo, The Jungle Dur
        CHECK(*hits[0].title == "Lipstick Jungle");
        CHECK(*hits[3].title == "The Jungle Dur");
    }
    SUBCASE("conjunctive criteria") {
        QueryCriteria c;
        c.title = "jungle";
        c.author = "hawkins";
        auto hits = repo.query(c);
        REQUIRE(hits.size() == 1);
        CHECK(*hits[0].title == "The Jungle Dur");
    }
    SUBCASE("empty criteria raise") {
        QueryCriteria c;
        CHECK_THROWS_AS(repo.query(c), EmptyCriteriaError);
        c.title = "";
        CHECK_THROWS_AS(repo.query(c), EmptyCriteriaError);
    }
    SUBCASE("missing field never matches") {
        QueryCriteria c;
        c.publisher = "acade";
        for (const auto& r : repo.query(c)) REQUIRE(r.publisher.has_value());
    }
}

TEST_CASE("query equals a linear scan oracle on random data") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> word(0, 25);
    auto random_word = [&](int len) {
        std::string s;
        for (int i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + word(rng)));
        return s;
    };

    Repository repo;
    std::vector<DataRecord> all;
    for (int i = 0; i < 1000; ++i) {
        DataRecord r = rec(random_word(3) + " " + random_word(4), random_word(5),
                           std::to_string(9780000000000 + i), random_word(4));
        all.push_back(r);
    }
    repo.upsert(all);
    const auto& stored = repo.records();

    std::uniform_int_distribution<int> which(0, 5), len(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        QueryCriteria c;
        int slot_id = which(rng);
        std::string pattern = random_word(len(rng));
        switch (slot_id) {
            case 0: c.isbn = pattern; break;
            case 1: c.title = pattern; break;
            case 2: c.author = pattern; break;
            case 3: c.publisher = pattern; break;
            case 4: c.keywords = pattern; break;
            default: c.price = pattern; break;
        }
        if (trial % 2) c.title = c.title.value_or(random_word(2));

        std::vector<size_t> expected;
        for (size_t i = 0; i < stored.size(); ++i) {
            bool match = true;
            for (size_t s = 0; s < 6; ++s) {
                const auto& pat = c.slot(s);
                if (!pat || pat->empty()) continue;
                const auto& val = stored[i].slot(s);
                if (!val || !test_oracles::contains_ci_reference(*val, *pat)) match = false;
            }
            if (match) expected.push_back(i);
        }
        auto got = repo.query(c);
        REQUIRE(got.size() == expected.size());
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(got[i].dedup_key() == stored[expected[i]].dedup_key());
    }
}

TEST_CASE("persistence round trips") {
    TempDir tmp;
    std::string path = tmp.path("repo.tsv");
    Repository repo = Repository::open(path);
    repo.upsert(seed_records());
    repo.save();

    Repository loaded = Repository::open(path);
    CHECK(loaded.structurally_equal(repo));

    // canonical file re-saves byte for byte
    std::string bytes = tsv::read_file(path);
    loaded.save_as(path);
    CHECK(tsv::read_file(path) == bytes);

    SUBCASE("an empty repository exports to a header-only file") {
        Repository empty;
        std::string out = tmp.path("empty.tsv");
        empty.export_to(out, Repository::ExportFormat::Dsv);
        auto lines = tsv::split_lines(tsv::read_file(out));
        REQUIRE(lines.size() == 1);
        CHECK(lines[0].find("title") != std::string::npos);
    }
    SUBCASE("json-lines export reimports structurally equal") {
        std::string out = tmp.path("repo.jsonl");
        repo.export_to(out, Repository::ExportFormat::JsonLines);
        Repository back = Repository::import_json_lines(out);
        CHECK(back.structurally_equal(repo));
        auto lines = tsv::split_lines(tsv::read_file(out));
        CHECK(lines.size() == repo.size());
    }
    SUBCASE("dsv export row count matches the store") {
        std::string out = tmp.path("dump.tsv");
        repo.export_to(out, Repository::ExportFormat::Dsv);
        CHECK(tsv::split_lines(tsv::read_file(out)).size() == repo.size() + 1);
    }
}

TEST_CASE("upsert idempotence leaves the store unchanged") {
    Repository a, b;
    auto records = seed_records();
    a.upsert(records);
    b.upsert(records);
    b.upsert(records);
    CHECK(a.structurally_equal(b));
}

TEST_CASE("storage errors surface") {
    Repository repo;
    repo.upsert(seed_records());
    CHECK_THROWS_AS(repo.save(), StorageError);  // no backing path
    CHECK_THROWS_AS(repo.save_as("/nonexistent-dir-zzz/repo.tsv"), StorageError);
}
