#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace crimesim::csv {

/// Minimal RFC 4180 reader: comma separated, optional double-quoted fields,
/// header row mandatory. Blank lines are skipped; a UTF-8 BOM is ignored.
class Reader {
public:
    Reader(std::istream& in, std::string source);

    /// Reads the header and checks it against `expected` (exact, in order).
    void expect_header(const std::vector<std::string>& expected);

    /// Reads the header without validating it.
    const std::vector<std::string>& read_header();

    /// Reads the next record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number of the record last returned by next().
    std::size_t line() const noexcept { return line_; }
    const std::string& source() const noexcept { return source_; }
    const std::vector<std::string>& header() const noexcept { return header_; }

    [[noreturn]] void fail(const std::string& what) const;

private:
    bool read_record(std::vector<std::string>& fields);

    std::istream& in_;
    std::string source_;
    std::vector<std::string> header_;
    std::size_t line_ = 0;
    std::size_t next_line_ = 1;
};

// Field parsers; all throw ParseError tagged with the reader's line.
double to_double(const Reader& r, std::string_view field, std::string_view column);
std::int64_t to_int(const Reader& r, std::string_view field, std::string_view column);
bool to_flag(const Reader& r, std::string_view field, std::string_view column);

/// Shortest round-trip representation of a double.
std::string format(double v);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace crimesim::csv
