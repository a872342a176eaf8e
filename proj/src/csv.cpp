#include "crimesim/csv.hpp"

#include <charconv>
#include <cmath>

#include "crimesim/error.hpp"

namespace crimesim::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

void Reader::fail(const std::string& what) const { throw ParseError(source_, line_, what); }

bool Reader::read_record(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    while (true) {
        if (!std::getline(in_, line)) return false;
        line_ = next_line_++;
        if (line_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) break;
    }

    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i == line.size()) {
            if (quoted) {
                // Quoted field spanning a newline.
                std::string more;
                if (!std::getline(in_, more)) fail("unterminated quoted field");
                ++next_line_;
                if (!more.empty() && more.back() == '\r') more.pop_back();
                line += '\n';
                line += more;
                continue;
            }
            fields.push_back(was_quoted ? field : std::string(trim(field)));
            break;
        }
        char c = line[i++];
        if (quoted) {
            if (c == '"') {
                if (i < line.size() && line[i] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            field.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? field : std::string(trim(field)));
            field.clear();
            was_quoted = false;
        } else {
            field += c;
        }
    }
    return true;
}

const std::vector<std::string>& Reader::read_header() {
    if (!read_record(header_)) {
        line_ = 1;
        fail("missing header row");
    }
    return header_;
}

void Reader::expect_header(const std::vector<std::string>& expected) {
    read_header();
    if (header_ != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        fail("expected header '" + want + "'");
    }
}

bool Reader::next(std::vector<std::string>& fields) {
    if (!read_record(fields)) return false;
    if (!header_.empty() && fields.size() != header_.size())
        fail("expected " + std::to_string(header_.size()) + " fields, got " +
             std::to_string(fields.size()));
    return true;
}

double to_double(const Reader& r, std::string_view field, std::string_view column) {
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        r.fail("column '" + std::string(column) + "': not a number: '" + std::string(field) + "'");
    return v;
}

std::int64_t to_int(const Reader& r, std::string_view field, std::string_view column) {
    std::int64_t v = 0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end)
        r.fail("column '" + std::string(column) + "': not an integer: '" + std::string(field) + "'");
    return v;
}

bool to_flag(const Reader& r, std::string_view field, std::string_view column) {
    if (field == "0") return false;
    if (field == "1") return true;
    r.fail("column '" + std::string(column) + "': expected 0 or 1, got '" + std::string(field) + "'");
}

std::string format(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace crimesim::csv
