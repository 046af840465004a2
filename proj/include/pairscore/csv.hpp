#pragma once

#include "pairscore/core.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pairscore::csv {

// ---------------------------------------------------------------------------
// RFC 4180 records

struct Record {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

/// Reads comma-separated records; quoted fields may hold commas, doubled
/// quotes and line breaks. Accepts "\n" and "\r\n" terminators.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// False at end of input. Throws ValidationError on an unterminated quote.
    bool next(Record& out);

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_record(std::ostream& out, const std::vector<std::string>& fields);

// ---------------------------------------------------------------------------
// Public comparison dataset

inline constexpr std::string_view kPublicHeader =
    "public_username,video_a,video_b,criteria,score,confidence,week_date";

struct PublicRow {
    std::string public_username;
    std::string video_a;
    std::string video_b;
    int criterion = kDefaultCriterion;
    int score = 50;
    int confidence = 3;
    std::string week_date;  // YYYY-MM-DD, always a Monday

    friend auto operator<=>(const PublicRow&, const PublicRow&) = default;
};

/// Monday (UTC) of the ISO week containing t, as YYYY-MM-DD.
std::string week_monday(Timestamp t);
/// Midnight UTC of a YYYY-MM-DD date. Throws ValidationError if malformed.
Timestamp parse_date(std::string_view ymd);

/// Export order: username, entity_a, entity_b, criterion id.
bool export_order(const PublicRow& l, const PublicRow& r);

void write_public(std::ostream& out, std::vector<PublicRow> rows);

struct RowError {
    std::size_t line = 0;
    std::string reason;

    friend bool operator==(const RowError&, const RowError&) = default;
};

struct ParsedPublic {
    std::vector<std::pair<std::size_t, PublicRow>> rows;  // (line, row)
    std::vector<RowError> rejected;
};

/// Throws ValidationError if the header does not match; malformed rows are
/// reported and skipped.
ParsedPublic read_public(std::istream& in);

/// A comparison as it would appear in the public dataset.
PublicRow to_public_row(const Comparison& c);

}  // namespace pairscore::csv
