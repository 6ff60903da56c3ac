#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "hbmsim/errors.hpp"
#include "hbmsim/sgd.hpp"

namespace hbmsim {

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char bytes[4];
    is.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void validate_samples(const Dataset& dataset, const std::string& origin) {
    for (const float v : dataset.samples) {
        if (!std::isfinite(v) || v < -1.0f || v > 1.0f) {
            throw IoError(origin + ": sample value " + std::to_string(v) +
                          " outside [-1, 1]");
        }
    }
}

} // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_u32(os, static_cast<std::uint32_t>(dataset.m));
    write_u32(os, static_cast<std::uint32_t>(dataset.n));
    write_u32(os, static_cast<std::uint32_t>(dataset.kind));
    os.write(reinterpret_cast<const char*>(dataset.samples.data()),
             static_cast<std::streamsize>(dataset.samples.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(dataset.labels.data()),
             static_cast<std::streamsize>(dataset.labels.size() * sizeof(float)));
    if (!os) throw IoError("short write to " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    Dataset dataset;
    dataset.m = read_u32(is);
    dataset.n = read_u32(is);
    const std::uint32_t kind = read_u32(is);
    if (!is || dataset.m == 0 || dataset.n == 0 || kind > 1) {
        throw IoError(path + ": malformed dataset header");
    }
    dataset.kind = static_cast<LabelKind>(kind);
    dataset.samples.resize(dataset.m * dataset.n);
    dataset.labels.resize(dataset.m);
    is.read(reinterpret_cast<char*>(dataset.samples.data()),
            static_cast<std::streamsize>(dataset.samples.size() * sizeof(float)));
    is.read(reinterpret_cast<char*>(dataset.labels.data()),
            static_cast<std::streamsize>(dataset.labels.size() * sizeof(float)));
    if (!is) throw IoError(path + ": truncated dataset body");
    validate_samples(dataset, path);
    return dataset;
}

Dataset import_delimited(const std::string& path, char delimiter, LabelKind kind) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    Dataset dataset;
    dataset.kind = kind;
    std::string line;
    std::size_t features = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<float> values;
        while (std::getline(row, cell, delimiter)) {
            try {
                values.push_back(std::stof(cell));
            } catch (const std::exception&) {
                throw IoError(path + ": cannot parse '" + cell + "' as a float");
            }
        }
        if (values.size() < 2) {
            throw IoError(path + ": each row needs a label and at least one feature");
        }
        if (features == 0) {
            features = values.size() - 1;
        } else if (values.size() - 1 != features) {
            throw IoError(path + ": ragged row with " + std::to_string(values.size() - 1) +
                          " features, expected " + std::to_string(features));
        }
        dataset.labels.push_back(values[0]);
        dataset.samples.insert(dataset.samples.end(), values.begin() + 1, values.end());
        ++dataset.m;
    }
    dataset.n = features;
    if (dataset.m == 0) throw IoError(path + ": no rows");
    validate_samples(dataset, path);
    return dataset;
}

} // namespace hbmsim
