#include <doctest.h>

#include <set>

#include "hwc/form_filler.hpp"

#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace hwc;
using test_support::fixture_path;
using test_support::make_page;

namespace {

LabelLexicon book_lexicon() {
    return LabelLexicon::load_file(fixture_path("lexicon_books.txt"));
}

TaskDatabase small_db() {
    TaskDatabase db("books");
    db.add_row({{"Title", "Information Te"}, {"Author", "Committee on"}, {"Published By", "National Acade"}},
               "http://seed/", "t0");
    db.add_row({{"Title", "Cybersecurity"}, {"Author", "Computer Scie"}}, "http://seed/", "t0");
    db.add_row({{"Title", "The jungle boo"}, {"Author", "Franklin W Dix"}, {"Published By", "Coronet Books"}},
               "http://seed/", "t0");
    db.add_row({{"Title", "The Love Affair"}, {"Author", "Hunter, Jillian"}, {"Published By", "Ivy Books"}},
               "http://seed/", "t0");
    return db;
}

SearchForm single_box_form() {
    auto forms = detect_forms(
        make_page("<form action=\"/find\"><label for=q>Title</label><input id=q name=q></form>",
                  "http://site.test/"));
    REQUIRE(forms.size() == 1);
    return forms[0];
}

SearchForm two_box_form() {
    auto forms = detect_forms(make_page(
        "<form method=post action=\"/find\">"
        "<label for=a>Title</label><input id=a name=title>"
        "<label for=b>Written by</label><input id=b name=author>"
        "<input type=submit name=go value=Find></form>",
        "http://site.test/"));
    REQUIRE(forms.size() == 1);
    return forms[0];
}

FieldMapping map_for(const SearchForm& form, const LabelLexicon& lex) {
    return match_form(form, {"ISBN", "Title", "Author", "Published By", "Keywords"}, lex, 0.6);
}

}  // namespace

TEST_CASE("urlencoding") {
    CHECK(form_urlencode_value("jungle") == "jungle");
    CHECK(form_urlencode_value("C++ & Java") == "C%2B%2B+%26+Java");
    CHECK(form_urlencode({{"q", "jungle"}}) == "q=jungle");
    CHECK(form_urlencode({{"a", "1"}, {"b", "two words"}}) == "a=1&b=two+words");

    SUBCASE("matches the reference implementation on random bytes") {
        std::mt19937 rng(99);
        std::uniform_int_distribution<int> len(0, 40), byte(0, 255);
        for (int trial = 0; trial < 500; ++trial) {
            std::string s;
            int n = len(rng);
            for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(byte(rng)));
            CHECK(form_urlencode_value(s) == test_oracles::urlencode_reference(s));
        }
    }
}

TEST_CASE("single-attribute plans rotate distinct values") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db = small_db();
    SearchForm form = single_box_form();
    auto plans = plan_fills(form, map_for(form, lex), db, lex, 3);
    REQUIRE(plans.size() == 3);
    std::set<std::string> values;
    for (const auto& p : plans) {
        REQUIRE(p.assignments.size() == 1);
        values.insert(p.assignments[0].second);
    }
    CHECK(values == std::set<std::string>{"Information Te", "Cybersecurity", "The jungle boo"});
    // rotation oracle: the next single lookup continues where planning stopped
    CHECK(db.lookup_values("Title", 1) == std::vector<std::string>{"The Love Affair"});
}

TEST_CASE("plan distinctness caps at the value supply") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db = small_db();
    SearchForm form = single_box_form();
    auto plans = plan_fills(form, map_for(form, lex), db, lex, 50);
    CHECK(plans.size() == 4);  // only four stored titles
    std::set<std::vector<std::pair<size_t, std::string>>> tuples;
    for (const auto& p : plans) CHECK(tuples.insert(p.assignments).second);
}

TEST_CASE("empty mapping raises") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db = small_db();
    SearchForm form = single_box_form();
    FieldMapping empty;
    CHECK_THROWS_AS(plan_fills(form, empty, db, lex, 3), NoFillableMappingError);
}

TEST_CASE("multi-attribute plans stay row coherent") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db = small_db();
    SearchForm form = two_box_form();
    auto plans = plan_fills(form, map_for(form, lex), db, lex, 5);
    REQUIRE(plans.size() == 4);

    // every plan's values sit in one bootstrap row
    for (const auto& p : plans) {
        REQUIRE(p.assignments.size() == 2);
        std::string title, author;
        for (const auto& [idx, value] : p.assignments) {
            if (form.fields[idx].name == "title") title = value;
            else author = value;
        }
        size_t title_col = *db.concept_index("Title");
        size_t author_col = *db.concept_index("Author");
        bool found = false;
        for (const auto& row : db.rows())
            if (row.cells[title_col] == title && row.cells[author_col] == author) found = true;
        CHECK(found);
    }
    CHECK(plans[0].assignments[0].second == "Information Te");
    CHECK(plans[0].assignments[1].second == "Committee on");
}

TEST_CASE("rotation fallback when no row covers every mapped concept") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db("books");
    // titles and authors arrive from different sources: no shared rows
    db.update("Title", {"T1", "T2"});
    db.update("Author", {"A1", "A2"});
    SearchForm form = two_box_form();
    auto plans = plan_fills(form, map_for(form, lex), db, lex, 2);
    REQUIRE(plans.size() == 2);
    for (const auto& p : plans) REQUIRE(p.assignments.size() == 2);
    CHECK(plans[0].assignments[0].second == "T1");
    CHECK(plans[0].assignments[1].second == "A1");
    CHECK(plans[1].assignments[0].second == "T2");
    CHECK(plans[1].assignments[1].second == "A2");
}

TEST_CASE("finite domains take the option nearest a stored value") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db = small_db();
    auto forms = detect_forms(make_page(
        "<form action=\"/f\"><label for=t>Title</label><input id=t name=t>"
        "<label for=p>Publisher</label>"
        "<select id=p name=p><option value=\"\">Any</option>"
        "<option value=\"ivy books\">Ivy Books</option>"
        "<option value=\"other house\">Other House</option></select></form>",
        "http://site.test/"));
    REQUIRE(forms.size() == 1);
    auto plans = plan_fills(forms[0], map_for(forms[0], lex), db, lex, 2);
    REQUIRE(!plans.empty());
    for (const auto& p : plans) {
        const std::string* select_value = nullptr;
        for (const auto& [idx, value] : p.assignments)
            if (forms[0].fields[idx].control == FormControl::SelectList) select_value = &value;
        REQUIRE(select_value);
        CHECK(*select_value == "ivy books");  // matches stored "Ivy Books", skips "Any"
        // domain safety
        const auto& domain = forms[0].fields[1].domain.values;
        CHECK(std::find(domain.begin(), domain.end(), *select_value) != domain.end());
    }
}

TEST_CASE("all-placeholder select is left unconstrained") {
    LabelLexicon lex = book_lexicon();
    TaskDatabase db = small_db();
    auto forms = detect_forms(make_page(
        "<form action=\"/f\"><label for=p>Publisher</label>"
        "<select id=p name=p><option value=\"\">Any</option><option value=\"--\">--</option>"
        "</select><label for=t>Title</label><input id=t name=t></form>",
        "http://site.test/"));
    auto plans = plan_fills(forms[0], map_for(forms[0], lex), db, lex, 1);
    REQUIRE(plans.size() == 1);
    for (const auto& [idx, value] : plans[0].assignments)
        if (forms[0].fields[idx].control == FormControl::SelectList) CHECK(value.empty());
}

TEST_CASE("build_submission GET") {
    SearchForm form = single_box_form();
    FilledForm filled;
    filled.form = form;
    filled.assignments = {{0, "jungle"}};
    SubmissionRequest req = build_submission(filled);
    CHECK(req.method == HttpMethod::Get);
    CHECK(req.url == "http://site.test/find?q=jungle");
    CHECK(req.body.empty());

    filled.assignments = {{0, "C++ & Java"}};
    CHECK(build_submission(filled).url == "http://site.test/find?q=C%2B%2B+%26+Java");
}

TEST_CASE("build_submission POST keeps document order and one submit") {
    SearchForm form = two_box_form();
    FilledForm filled;
    filled.form = form;
    filled.assignments = {{1, "Franklin W Dix"}, {0, "The jungle boo"}};
    SubmissionRequest req = build_submission(filled);
    CHECK(req.method == HttpMethod::Post);
    CHECK(req.url == "http://site.test/find");
    REQUIRE(req.parameters.size() == 3);
    CHECK(req.parameters[0] == std::pair<std::string, std::string>{"title", "The jungle boo"});
    CHECK(req.parameters[1] == std::pair<std::string, std::string>{"author", "Franklin W Dix"});
    CHECK(req.parameters[2] == std::pair<std::string, std::string>{"go", "Find"});
    CHECK(req.body == "title=The+jungle+boo&author=Franklin+W+Dix&go=Find");
}

TEST_CASE("unassigned fields: text empty, hidden defaults, checkbox omitted") {
    auto forms = detect_forms(make_page(
        "<form action=\"/f\"><input type=hidden name=sid value=7>"
        "<input name=a><input name=b>"
        "<input type=checkbox name=c value=x>"
        "<input type=submit name=go value=Run></form>",
        "http://site.test/"));
    REQUIRE(forms.size() == 1);
    FilledForm filled;
    filled.form = forms[0];
    size_t a_idx = 1;
    CHECK(forms[0].fields[a_idx].name == "a");
    filled.assignments = {{a_idx, "val"}};
    SubmissionRequest req = build_submission(filled);
    std::string query = req.url.substr(req.url.find('?') + 1);
    CHECK(query == "sid=7&a=val&b=&go=Run");
}

TEST_CASE("GET replaces an existing action query string") {
    auto forms = detect_forms(
        make_page("<form action=\"/find?keep=no\"><input name=q></form>", "http://site.test/"));
    FilledForm filled;
    filled.form = forms[0];
    filled.assignments = {{0, "x"}};
    CHECK(build_submission(filled).url == "http://site.test/find?q=x");
}
