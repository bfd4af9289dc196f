#include <doctest.h>

#include <set>

#include "hwc/fixture.hpp"
#include "hwc/task_db.hpp"
#include "hwc/tsv.hpp"

#include "support/helpers.hpp"

using namespace hwc;
using test_support::TempDir;
using test_support::fixture_path;
using test_support::make_page;

namespace {

LabelLexicon book_lexicon() {
    return LabelLexicon::load_file(fixture_path("lexicon_books.txt"));
}

// test-side table rendering of a dataset file
std::string render_listing(const std::string& dataset_file) {
    auto data = fixture::Dataset::load_file(fixture_path(dataset_file));
    std::string out = "<html><body><table><tr>";
    for (const auto& col : data.columns) out += "<th>" + col + "</th>";
    out += "</tr>";
    for (const auto& row : data.rows) {
        out += "<tr>";
        for (const auto& cell : row) out += "<td>" + fixture::html_escape(cell) + "</td>";
        out += "</tr>";
    }
    out += "</table></body></html>";
    return out;
}

TaskDatabase seed_db() {
    LabelLexicon lex = book_lexicon();
    return bootstrap({make_page(render_listing("data/seed_books.tsv"), "http://seed.test/all")},
                     lex, 0.6, "books");
}

}  // namespace

TEST_CASE("bootstrap from the seed listing") {
    BootstrapStats stats;
    LabelLexicon lex = book_lexicon();
    TaskDatabase db =
        bootstrap({make_page(render_listing("data/seed_books.tsv"), "http://seed.test/all")}, lex,
                  0.6, "books", &stats);

    CHECK(db.domain_name() == "books");
    CHECK(stats.pages_used == 1);
    CHECK(stats.rows_inserted == 13);
    REQUIRE(db.concepts().size() == 5);
    CHECK(db.concepts()[0].canonical_label == "ISBN");
    CHECK(db.concepts()[1].canonical_label == "Title");
    CHECK(db.concepts()[2].canonical_label == "Author");
    CHECK(db.concepts()[3].canonical_label == "Published By");
    CHECK(db.concepts()[4].canonical_label == "Keywords");

    auto author_idx = db.concept_index("Author");
    REQUIRE(author_idx.has_value());
    const auto& authors = db.concepts()[*author_idx].values;
    CHECK(std::find(authors.begin(), authors.end(), "Kolata, Gina") != authors.end());
    CHECK(std::find(authors.begin(), authors.end(), "P.Galvin") != authors.end());
    // "Committee on" appears in two rows but is stored once
    CHECK(std::count(authors.begin(), authors.end(), "Committee on") == 1);
    CHECK(authors.size() == 12);

    // a second copy of the same page adds nothing new value-wise
    TaskDatabase db2 = bootstrap({make_page(render_listing("data/seed_books.tsv"), "http://a/"),
                                  make_page(render_listing("data/seed_books.tsv"), "http://b/")},
                                 lex, 0.6, "books");
    CHECK(db2.total_value_count() == db.total_value_count());
}

TEST_CASE("bootstrap failure modes") {
    LabelLexicon lex = book_lexicon();
    CHECK_THROWS_AS(bootstrap({}, lex, 0.6, "books"), EmptyBootstrapError);

    // labels that map to no concept: diagnostics, then EmptyBootstrap
    std::string alien =
        "<html><body><table><tr><th>Zorp</th><th>Blick</th></tr>"
        "<tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr>"
        "<tr><td>e</td><td>f</td></tr></table></body></html>";
    BootstrapStats stats;
    CHECK_THROWS_AS(bootstrap({make_page(alien)}, lex, 0.6, "books", &stats),
                    EmptyBootstrapError);
    CHECK(stats.diagnostics.size() >= 2);  // one per unmappable label

    // pages without any repeating region
    BootstrapStats stats2;
    CHECK_THROWS_AS(
        bootstrap({make_page("<p>nothing here</p>")}, lex, 0.6, "books", &stats2),
        EmptyBootstrapError);
    CHECK(stats2.diagnostics.size() == 1);
}

TEST_CASE("lookup rotation") {
    TaskDatabase db = seed_db();
    SUBCASE("first author after a fresh load") {
        auto vals = db.lookup_values("Author", 1);
        REQUIRE(vals.size() == 1);
        CHECK(vals[0] == "Committee on");
    }
    SUBCASE("k = 0") { CHECK(db.lookup_values("Author", 0).empty()); }
    SUBCASE("k beyond the set returns each value once") {
        size_t n = db.concepts()[*db.concept_index("Author")].values.size();
        auto vals = db.lookup_values("Author", n + 3);
        CHECK(vals.size() == n);
        CHECK(std::set<std::string>(vals.begin(), vals.end()).size() == n);
    }
    SUBCASE("rotation fairness: |values| single lookups hit each value once") {
        size_t n = db.concepts()[*db.concept_index("Title")].values.size();
        std::set<std::string> seen;
        for (size_t i = 0; i < n; ++i) {
            auto vals = db.lookup_values("Title", 1);
            REQUIRE(vals.size() == 1);
            CHECK(seen.insert(vals[0]).second);
        }
        CHECK(seen.size() == n);
    }
    SUBCASE("wrap around continues from the cursor") {
        db.lookup_values("Author", 10);
        auto tail = db.lookup_values("Author", 4);  // 12 authors: positions 10,11,0,1
        REQUIRE(tail.size() == 4);
        CHECK(tail[2] == "Committee on");
    }
    CHECK_THROWS_AS(db.lookup_values("Nope", 1), UnknownConceptError);
}

TEST_CASE("update") {
    TaskDatabase db = seed_db();
    size_t before = db.total_value_count();

    SUBCASE("existing value inserts nothing") {
        CHECK(db.update("Author", {"Kolata, Gina"}) == 0);
        CHECK(db.update("Author", {"  kolata,   GINA "}) == 0);  // folded duplicate
        CHECK(db.total_value_count() == before);
    }
    SUBCASE("new value lands with provenance") {
        CHECK(db.update("Author", {"Yashwant Singh"}, "http://site.test/r", "2026-01-01T00:00:00Z") ==
              1);
        auto vals = db.concepts()[*db.concept_index("Author")].values;
        CHECK(vals.back() == "Yashwant Singh");
        CHECK(db.rows().back().source_url == "http://site.test/r");
    }
    SUBCASE("idempotence: the second identical update is a no-op") {
        std::vector<std::string> batch = {"New One", "New Two"};
        CHECK(db.update("Keywords", batch) == 2);
        TaskDatabase snapshot = db;
        CHECK(db.update("Keywords", batch) == 0);
        CHECK(db == snapshot);
    }
    SUBCASE("unknown concept creates a column") {
        CHECK_FALSE(db.concept_index("Price").has_value());
        CHECK(db.update("Price", {"$10", "$12", "$10"}) == 2);
        REQUIRE(db.concept_index("Price").has_value());
        CHECK(db.lookup_values("Price", 1) == std::vector<std::string>{"$10"});
        // old rows padded to the new width
        for (const auto& row : db.rows()) CHECK(row.cells.size() == db.concepts().size());
    }
    SUBCASE("set-difference oracle on a batch of unseen authors") {
        std::vector<std::string> unseen;
        for (int i = 0; i < 10; ++i) unseen.push_back("Fresh Author " + std::to_string(i));
        std::set<std::string> pre;
        for (const auto& v : db.concepts()[*db.concept_index("Author")].values)
            pre.insert(v);
        size_t expected = 0;
        for (const auto& v : unseen)
            if (!pre.count(v)) ++expected;
        CHECK(db.update("Author", unseen) == expected);
        CHECK(expected == 10);
        auto all = db.lookup_values("Author", 100);
        for (const auto& v : unseen)
            CHECK(std::find(all.begin(), all.end(), v) != all.end());
    }
}

TEST_CASE("file round trips") {
    TempDir tmp;
    TaskDatabase db = seed_db();
    db.lookup_values("Author", 3);  // advance a cursor so it must persist
    db.update("Price", {"Rs. 250"}, "http://u.test/", "2026-02-02T02:02:02Z");

    std::string path = tmp.path("taskdb.tsv");
    db.save_file(path);

    TaskDatabase loaded = TaskDatabase::load_file(path);
    CHECK(loaded == db);

    // canonical files re-save byte for byte
    std::string first = tsv::read_file(path);
    loaded.save_file(path);
    CHECK(tsv::read_file(path) == first);
}

TEST_CASE("task db parse errors") {
    CHECK_THROWS_AS(TaskDatabase::parse(""), TaskDbFormatError);
    CHECK_THROWS_AS(TaskDatabase::parse("A\tA\n"), TaskDbFormatError);
    CHECK_THROWS_AS(TaskDatabase::parse("A\t@bad\n"), TaskDbFormatError);
}
