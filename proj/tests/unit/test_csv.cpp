#include "pairscore/csv.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace pairscore;
using namespace pairscore::csv;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> records(const std::string& text) {
    std::istringstream in(text);
    Reader r(in);
    Record rec;
    std::vector<std::vector<std::string>> out;
    while (r.next(rec)) out.push_back(rec.fields);
    return out;
}

const std::string kFixtures = PAIRSCORE_FIXTURE_DIR;

}  // namespace

TEST_CASE("reader splits plain and quoted fields") {
    const auto rs = records("a,b,c\n\"x, y\",\"say \"\"hi\"\"\",\n\"multi\nline\",2,3\r\nlast,,");
    REQUIRE(rs.size() == 4);
    CHECK(rs[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rs[1] == std::vector<std::string>{"x, y", "say \"hi\"", ""});
    CHECK(rs[2] == std::vector<std::string>{"multi\nline", "2", "3"});
    CHECK(rs[3] == std::vector<std::string>{"last", "", ""});
}

TEST_CASE("reader reports the starting line of each record") {
    std::istringstream in("h\n\"a\nb\"\nc\n");
    Reader r(in);
    Record rec;
    std::vector<std::size_t> lines;
    while (r.next(rec)) lines.push_back(rec.line);
    CHECK(lines == std::vector<std::size_t>{1, 2, 4});
}

TEST_CASE("unterminated quote is an error") {
    CHECK_THROWS_AS(records("\"open,1\n"), ValidationError);
}

TEST_CASE("escape quotes only when needed and round-trips through the reader") {
    CHECK(escape("plain") == "plain");
    CHECK(escape("a,b") == "\"a,b\"");
    CHECK(escape("q\"") == "\"q\"\"\"");
    CHECK(escape("l\nf") == "\"l\nf\"");
    const std::vector<std::string> fields{"", "a,b", "\"", "x\r\ny", "plain"};
    std::ostringstream out;
    write_record(out, fields);
    const auto back = records(out.str());
    REQUIRE(back.size() == 1);
    CHECK(back[0] == fields);
}

TEST_CASE("week_monday coarsens to the ISO week's Monday") {
    CHECK(week_monday(0) == "1969-12-29");           // Thursday 1970-01-01
    CHECK(week_monday(1704067200) == "2024-01-01");  // Monday midnight
    CHECK(week_monday(1705276799) == "2024-01-08");  // Sunday 23:59:59
    CHECK(week_monday(1709208000) == "2024-02-26");  // leap day
    CHECK(week_monday(-1) == "1969-12-29");
}

TEST_CASE("parse_date") {
    CHECK(parse_date("2024-01-01") == 1704067200);
    CHECK(parse_date("1970-01-01") == 0);
    for (const char* bad : {"2024-1-01", "2024-02-30", "2024/01/01", "abcd-ef-gh", ""}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_date(bad), ValidationError);
    }
}

TEST_CASE("week_monday is idempotent on parsed Mondays") {
    for (Timestamp t = 1700000000; t < 1700000000 + 40 * 86400; t += 3 * 3600 + 17) {
        const auto monday = week_monday(t);
        CHECK(week_monday(parse_date(monday)) == monday);
        CHECK(parse_date(monday) <= t);
        CHECK(t - parse_date(monday) < 7 * 86400);
    }
}

TEST_CASE("write_public sorts rows and uses criterion names") {
    std::vector<PublicRow> rows{
        {"bob", "v1", "v2", 2, 10, 1, "2024-01-01"},
        {"alice", "v3", "v1", 10, 100, 3, "2024-01-08"},
        {"alice", "v1", "v2", 3, 0, 0, "2024-01-01"},
        {"alice", "v1", "v2", 1, 50, 2, "2024-01-01"},
    };
    std::ostringstream out;
    write_public(out, rows);
    CHECK(out.str() ==
          "public_username,video_a,video_b,criteria,score,confidence,week_date\n"
          "alice,v1,v2,Should be largely recommended,50,2,2024-01-01\n"
          "alice,v1,v2,Important and actionable,0,0,2024-01-01\n"
          "alice,v3,v1,Entertaining and relaxing,100,3,2024-01-08\n"
          "bob,v1,v2,Reliable and not misleading,10,1,2024-01-01\n");
}

TEST_CASE("read_public rejects bad rows with their line numbers") {
    std::ifstream in(kFixtures + "/bad_rows.csv");
    const auto parsed = read_public(in);
    CHECK(parsed.rows.size() == 3);
    REQUIRE(parsed.rejected.size() == 2);
    CHECK(parsed.rejected[0].line == 3);
    CHECK(parsed.rejected[1].line == 5);
    CHECK(parsed.rows[0].first == 2);
    CHECK(parsed.rows[2].second.public_username == "carol");
}

TEST_CASE("read_public row checks") {
    const std::string header = std::string(kPublicHeader) + "\n";
    auto rejected = [&](const std::string& row) {
        std::istringstream in(header + row + "\n");
        return read_public(in).rejected.size() == 1;
    };
    CHECK(rejected("a,v1,v2,Layman-friendly,50,3,2024-01-02"));   // Tuesday
    CHECK(rejected("a,v1,v2,Layman-friendly,50,4,2024-01-01"));
    CHECK(rejected("a,v1,v2,Layman-friendly,-1,3,2024-01-01"));
    CHECK(rejected("a,v1,v1,Layman-friendly,50,3,2024-01-01"));
    CHECK(rejected("a,v1,v2,Layman-friendly,50,3"));
    CHECK(rejected("a,v1,v2,layman-friendly,50,3,2024-01-01"));
    CHECK(rejected(",v1,v2,Layman-friendly,50,3,2024-01-01"));
    CHECK(rejected("a,v1,v2,Layman-friendly,5x,3,2024-01-01"));
    CHECK_FALSE(rejected("a,v1,v2,Layman-friendly,50,3,2024-01-01"));
}

TEST_CASE("header handling") {
    std::istringstream empty(std::string(kPublicHeader) + "\n");
    const auto p = read_public(empty);
    CHECK(p.rows.empty());
    CHECK(p.rejected.empty());

    std::istringstream wrong("user,video_a,video_b,criteria,score,confidence,week_date\n");
    CHECK_THROWS_AS(read_public(wrong), ValidationError);
    std::istringstream nothing("");
    CHECK_THROWS_AS(read_public(nothing), ValidationError);
}

TEST_CASE("fixture file round-trips through read and write byte for byte") {
    const auto text = slurp(kFixtures + "/comparisons.csv");
    std::istringstream in(text);
    const auto parsed = read_public(in);
    CHECK(parsed.rejected.empty());
    std::vector<PublicRow> rows;
    for (const auto& [_, r] : parsed.rows) rows.push_back(r);
    std::ostringstream out;
    write_public(out, rows);
    CHECK(out.str() == text);
}

TEST_CASE("to_public_row drops metadata and coarsens time") {
    Comparison c;
    c.contributor = {"alice"};
    c.entity_a = {"v1"};
    c.entity_b = {"v2"};
    c.criterion = Criterion(7);
    c.slider = 12;
    c.confidence = 2;
    c.submitted_at = 1704240000;
    c.response_time_ms = 4321;
    c.slider_trajectory = {{0, 50}, {120, 12}};
    const auto r = to_public_row(c);
    CHECK(r == PublicRow{"alice", "v1", "v2", 7, 12, 2, "2024-01-01"});
}
