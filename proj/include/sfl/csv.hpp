#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sfl {

// RFC-4180 style writer: header row, '.' decimal point, no locale.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> names);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double value);
    CsvWriter& cell(std::int64_t value);
    CsvWriter& cell(std::uint64_t value);
    CsvWriter& cell(int value) { return cell(static_cast<std::int64_t>(value)); }
    void end_row();

private:
    void separator();

    std::ostream& out_;
    bool row_started_ = false;
};

std::string format_double(double value);
std::string join_indices(const std::vector<std::size_t>& values, char sep = ';');

}  // namespace sfl
