#include "pairscore/csv.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <tuple>

namespace pairscore::csv {

bool Reader::next(Record& out) {
    out.fields.clear();
    out.line = line_;
    if (in_.peek() == std::char_traits<char>::eof()) return false;

    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    while (true) {
        const int ch = in_.get();
        if (ch == std::char_traits<char>::eof()) {
            if (quoted) throw ValidationError("unterminated quoted field at line " + std::to_string(out.line));
            out.fields.push_back(std::move(field));
            return true;
        }
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_started_quoted) {
            quoted = true;
            field_started_quoted = true;
        } else if (c == ',') {
            out.fields.push_back(std::move(field));
            field.clear();
            field_started_quoted = false;
        } else if (c == '\r' && in_.peek() == '\n') {
            // swallowed; the '\n' ends the record
        } else if (c == '\n') {
            ++line_;
            out.fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

std::string week_monday(Timestamp t) {
    using namespace std::chrono;
    const sys_days day = floor<days>(sys_seconds{seconds{t}});
    const sys_days monday = day - (weekday{day} - Monday);
    const year_month_day ymd{monday};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Timestamp parse_date(std::string_view ymd_text) {
    using namespace std::chrono;
    auto number = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        const char* first = ymd_text.data() + pos;
        auto [p, ec] = std::from_chars(first, first + len, v);
        if (ec != std::errc{} || p != first + len) throw ValidationError("malformed date");
        return v;
    };
    if (ymd_text.size() != 10 || ymd_text[4] != '-' || ymd_text[7] != '-') {
        throw ValidationError("malformed date: " + std::string(ymd_text));
    }
    const year_month_day ymd{year{number(0, 4)}, month{static_cast<unsigned>(number(5, 2))},
                             day{static_cast<unsigned>(number(8, 2))}};
    if (!ymd.ok()) throw ValidationError("invalid date: " + std::string(ymd_text));
    return sys_seconds{sys_days{ymd}}.time_since_epoch().count();
}

bool export_order(const PublicRow& l, const PublicRow& r) {
    return std::tie(l.public_username, l.video_a, l.video_b, l.criterion) <
           std::tie(r.public_username, r.video_a, r.video_b, r.criterion);
}

void write_public(std::ostream& out, std::vector<PublicRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), export_order);
    out << kPublicHeader << '\n';
    for (const auto& r : rows) {
        write_record(out, {r.public_username, r.video_a, r.video_b,
                           std::string(criterion_name(r.criterion)), std::to_string(r.score),
                           std::to_string(r.confidence), r.week_date});
    }
}

namespace {

int parse_int(const std::string& s, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
        throw ValidationError(std::string("malformed ") + what + ": '" + s + "'");
    }
    return v;
}

PublicRow parse_row(const Record& rec) {
    if (rec.fields.size() != 7) {
        throw ValidationError("expected 7 fields, found " + std::to_string(rec.fields.size()));
    }
    PublicRow row;
    row.public_username = rec.fields[0];
    row.video_a = rec.fields[1];
    row.video_b = rec.fields[2];
    row.criterion = Criterion::from_name(rec.fields[3]).id();
    row.score = parse_int(rec.fields[4], "score");
    row.confidence = parse_int(rec.fields[5], "confidence");
    row.week_date = rec.fields[6];
    if (row.public_username.empty()) throw ValidationError("empty username");
    if (row.video_a.empty() || row.video_b.empty()) throw ValidationError("empty video id");
    if (row.video_a == row.video_b) throw ValidationError("video compared with itself");
    if (row.score < kSliderMin || row.score > kSliderMax) {
        throw ValidationError("score out of range 0..100: " + std::to_string(row.score));
    }
    if (row.confidence < 0 || row.confidence > kConfidenceMax) {
        throw ValidationError("confidence out of range 0..3: " + std::to_string(row.confidence));
    }
    if (week_monday(parse_date(row.week_date)) != row.week_date) {
        throw ValidationError("week_date is not a Monday: " + row.week_date);
    }
    return row;
}

}  // namespace

ParsedPublic read_public(std::istream& in) {
    Reader reader(in);
    Record rec;
    if (!reader.next(rec)) throw ValidationError("missing header");
    std::string header;
    for (std::size_t i = 0; i < rec.fields.size(); ++i) {
        if (i) header += ',';
        header += rec.fields[i];
    }
    if (header != kPublicHeader) throw ValidationError("unexpected header: " + header);

    ParsedPublic out;
    while (reader.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        try {
            out.rows.emplace_back(rec.line, parse_row(rec));
        } catch (const ValidationError& e) {
            out.rejected.push_back({rec.line, e.what()});
        }
    }
    return out;
}

PublicRow to_public_row(const Comparison& c) {
    return {c.contributor.value, c.entity_a.value, c.entity_b.value, c.criterion.id(),
            c.slider, c.confidence, week_monday(c.submitted_at)};
}

}  // namespace pairscore::csv
