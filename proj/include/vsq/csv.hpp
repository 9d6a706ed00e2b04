#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace vsq {

// Round-trip-exact formatting ({:.17g}); "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

// Comma-separated writer with a fixed header; every row must match the header width.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::vector<std::string> header);

    void row(std::span<const double> values);
    void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
    void close();

private:
    std::string path_;
    std::ofstream os_;
    std::size_t width_;
};

}  // namespace vsq
