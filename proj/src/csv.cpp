#include "hbmsim/csv.hpp"

#include <cstdio>
#include <fstream>

#include "hbmsim/errors.hpp"

namespace hbmsim {

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw ConfigError("csv needs at least one column");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

CsvWriter& CsvWriter::cell(const std::string& value) {
    if (row_cells_ > 0) buffer_ += ',';
    buffer_ += value;
    ++row_cells_;
    return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t value) { return cell(std::to_string(value)); }
CsvWriter& CsvWriter::cell(std::uint64_t value) { return cell(std::to_string(value)); }
CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

void CsvWriter::end_row() {
    if (row_cells_ != columns_) {
        throw ConsistencyError("csv row has " + std::to_string(row_cells_) + " cells, header has " +
                               std::to_string(columns_));
    }
    buffer_ += '\n';
    row_cells_ = 0;
}

std::string CsvWriter::format_double(double value) {
    char out[64];
    std::snprintf(out, sizeof(out), "%.9g", value);
    return out;
}

void CsvWriter::write_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!os) throw IoError("short write to " + path);
}

} // namespace hbmsim
