#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hbmsim {

/// Buffered CSV writer with stable number formatting, so identical runs
/// produce identical bytes.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& cell(const std::string& value);
    CsvWriter& cell(std::int64_t value);
    CsvWriter& cell(std::uint64_t value);
    CsvWriter& cell(int value) { return cell(static_cast<std::int64_t>(value)); }
    CsvWriter& cell(double value);
    void end_row();

    const std::string& str() const { return buffer_; }
    void write_file(const std::string& path) const;

    static std::string format_double(double value);

private:
    std::size_t columns_ = 0;
    std::size_t row_cells_ = 0;
    std::string buffer_;
};

} // namespace hbmsim
