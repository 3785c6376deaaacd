#include "epipanel/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "epipanel/errors.hpp"

namespace epipanel {

namespace {

// Splits the full text into records, honouring quotes (which may contain
// newlines). Returns rows of raw cells with 1-based starting line numbers.
std::vector<CsvRow> tokenize(const std::string& text, const std::string& name) {
    std::vector<CsvRow> out;
    CsvRow row;
    std::string cell;
    bool in_quotes = false;
    bool row_started = false;
    long line = 1;
    row.line = 1;

    auto end_cell = [&] {
        row.cells.push_back(std::move(cell));
        cell.clear();
    };
    auto end_row = [&] {
        if (row_started || !row.cells.empty() || !cell.empty()) {
            end_cell();
            out.push_back(std::move(row));
            row = CsvRow{};
        }
        row.line = line;
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                cell += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell.empty())
                    throw ParseError(name, line, "quote inside unquoted field");
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_cell();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                end_row();
                break;
            default:
                cell += c;
                row_started = true;
        }
    }
    if (in_quotes) throw ParseError(name, line, "unterminated quoted field");
    end_row();
    return out;
}

}  // namespace

CsvReader CsvReader::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
}

CsvReader CsvReader::from_string(const std::string& text, const std::string& name) {
    CsvReader r;
    r.name_ = name;
    auto rows = tokenize(text, name);
    if (rows.empty()) throw ParseError(name, 0, "empty file");
    r.header_ = rows.front().cells;
    r.rows_.assign(rows.begin() + 1, rows.end());
    return r;
}

void CsvReader::skip_preamble_until(const std::string& required) {
    if (std::find(header_.begin(), header_.end(), required) != header_.end()) return;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& cells = rows_[i].cells;
        if (std::find(cells.begin(), cells.end(), required) != cells.end()) {
            header_ = cells;
            rows_.erase(rows_.begin(), rows_.begin() + i + 1);
            return;
        }
    }
    throw ParseError(name_, 0, "no header row containing column '" + required + "'");
}

std::size_t CsvReader::column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw ParseError(name_, 1, "missing column '" + name + "'");
}

bool CsvReader::has_column(const std::string& name) const {
    return std::find(header_.begin(), header_.end(), name) != header_.end();
}

std::optional<double> CsvReader::number_at(const CsvRow& row, std::size_t col) const {
    const std::string& s = text_at(row, col);
    if (s.empty() || s == "NA" || s == "NaN") return std::nullopt;
    // Google Trends exports write "<1" for suppressed low values.
    if (s == "<1") return 0.5;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    double v = 0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError(name_, row.line, "not a number: '" + s + "'");
    return v;
}

const std::string& CsvReader::text_at(const CsvRow& row, std::size_t col) const {
    static const std::string empty;
    if (col >= row.cells.size()) return empty;
    return row.cells[col];
}

void CsvWriter::comment(const std::string& text) { os_ << "# " << text << "\n"; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        const std::string& c = cells[i];
        if (c.find_first_of(",\"\n") != std::string::npos) {
            os_ << '"';
            for (char ch : c) {
                if (ch == '"') os_ << '"';
                os_ << ch;
            }
            os_ << '"';
        } else {
            os_ << c;
        }
    }
    os_ << "\n";
}

std::string CsvWriter::format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace epipanel
