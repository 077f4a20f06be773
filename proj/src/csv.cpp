#include "sfl/csv.hpp"

#include <fmt/format.h>

#include <cmath>

namespace sfl {

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    // fmt is locale-independent unless 'L' is requested.
    return fmt::format("{:.12g}", value);
}

std::string join_indices(const std::vector<std::size_t>& values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(sep);
        out += std::to_string(values[i]);
    }
    return out;
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
    for (auto name : names) cell(name);
    end_row();
}

void CsvWriter::separator() {
    if (row_started_) out_ << ',';
    row_started_ = true;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    separator();
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << text;
        return *this;
    }
    out_ << '"';
    for (char c : text) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
    return *this;
}

CsvWriter& CsvWriter::cell(double value) {
    separator();
    out_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t value) {
    separator();
    out_ << value;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

}  // namespace sfl
