#include "newsent/csv.hpp"

#include "newsent/util.hpp"

namespace newsent {

CsvReader::CsvReader(std::string content) : content_(std::move(content)) {}

CsvReader CsvReader::from_file(const std::filesystem::path& p) {
    return CsvReader(read_file(p));
}

bool CsvReader::next_row(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= content_.size()) return false;
    std::string field;
    bool in_quotes = false;
    while (pos_ < content_.size()) {
        char c = content_[pos_];
        if (in_quotes) {
            if (c == '"') {
                if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
                    field += '"';
                    pos_ += 2;
                } else {
                    in_quotes = false;
                    ++pos_;
                }
            } else {
                field += c;
                ++pos_;
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
            ++pos_;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++pos_;
        } else if (c == '\n' || c == '\r') {
            ++pos_;
            if (c == '\r' && pos_ < content_.size() && content_[pos_] == '\n') ++pos_;
            fields.push_back(std::move(field));
            ++row_;
            return true;
        } else {
            field += c;
            ++pos_;
        }
    }
    fields.push_back(std::move(field));
    ++row_;
    return true;
}

CsvTable CsvTable::from_file(const std::filesystem::path& p) {
    return from_string(read_file(p), p.string());
}

CsvTable CsvTable::from_string(std::string content, std::string where) {
    CsvTable t;
    t.where_ = std::move(where);
    CsvReader r(std::move(content));
    std::vector<std::string> fields;
    if (!r.next_row(fields)) fail_data("empty csv: " + t.where_);
    t.header_ = fields;
    while (r.next_row(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing blank line
        if (fields.size() != t.header_.size())
            fail_data(t.where_ + ": row " + std::to_string(r.row_number()) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(t.header_.size()));
        t.rows_.push_back(fields);
    }
    return t;
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const {
    auto c = find_column(name);
    if (!c) fail_data(where_ + ": missing column '" + std::string(name) + "'");
    return *c;
}

std::string CsvWriter::escape(std::string_view field) {
    bool needs = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs = true;
            break;
        }
    }
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ += ',';
        out_ += escape(fields[i]);
    }
    out_ += '\n';
}

} // namespace newsent
