#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epipanel {

/// One parsed CSV row plus its 1-based line number in the source file.
struct CsvRow {
    std::vector<std::string> cells;
    long line = 0;
};

/// Minimal RFC 4180 reader: quoted fields, embedded commas/quotes/newlines,
/// CRLF tolerant. Rows and the header keep source line numbers for error
/// reporting.
class CsvReader {
public:
    /// Reads the whole file. `skip_preamble` drops leading lines until one is
    /// found whose first cell matches a column of interest (Google Trends
    /// exports carry a two-line banner).
    static CsvReader from_file(const std::string& path);
    static CsvReader from_string(const std::string& text, const std::string& name = "<string>");

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<CsvRow>& rows() const { return rows_; }
    const std::string& name() const { return name_; }

    /// Column index by name; throws ParseError naming the file when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    /// Re-interprets row `r`'s cell in column `c`; empty cell -> nullopt,
    /// non-numeric -> ParseError with the row's line number.
    std::optional<double> number_at(const CsvRow& row, std::size_t col) const;
    const std::string& text_at(const CsvRow& row, std::size_t col) const;

    /// Drops leading non-tabular banner lines until a row containing
    /// `required` as a cell is seen; that row becomes the header.
    void skip_preamble_until(const std::string& required);

private:
    std::string name_;
    std::vector<std::string> header_;
    std::vector<CsvRow> rows_;
};

/// Deterministic CSV writer. Floats are rendered with std::to_chars
/// (shortest round-trip form) so identical inputs yield identical bytes.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    /// Lines starting with "# " before the header; used for run metadata.
    void comment(const std::string& text);
    void row(const std::vector<std::string>& cells);

    static std::string format_double(double v);

private:
    std::ostream& os_;
};

}  // namespace epipanel
