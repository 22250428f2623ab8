#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsent {

// RFC 4180 parsing: quoted fields may contain commas, doubled quotes and
// newlines; rows may end in LF or CRLF.
class CsvReader {
public:
    explicit CsvReader(std::string content);

    static CsvReader from_file(const std::filesystem::path& p);

    // Returns false at end of input.
    bool next_row(std::vector<std::string>& fields);

    std::size_t row_number() const { return row_; } // 1-based, rows consumed

private:
    std::string content_;
    std::size_t pos_ = 0;
    std::size_t row_ = 0;
};

// Header-aware wrapper. Column lookup is by exact header name.
class CsvTable {
public:
    static CsvTable from_file(const std::filesystem::path& p);
    static CsvTable from_string(std::string content, std::string where = "<string>");

    const std::vector<std::string>& header() const { return header_; }
    std::size_t num_rows() const { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

    std::optional<std::size_t> find_column(std::string_view name) const;
    // Fails with a data error naming the file when the column is missing.
    std::size_t require_column(std::string_view name) const;

    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

private:
    std::string where_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

class CsvWriter {
public:
    void write_row(const std::vector<std::string>& fields);
    const std::string& str() const { return out_; }

    static std::string escape(std::string_view field);

private:
    std::string out_;
};

} // namespace newsent
