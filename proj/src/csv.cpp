#include "vsq/csv.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace vsq {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), os_(path, std::ios::binary | std::ios::trunc), width_(header.size()) {
    if (!os_) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t k = 0; k < header.size(); ++k) os_ << (k ? "," : "") << header[k];
    os_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != width_) throw std::logic_error("csv row width does not match the header of " + path_);
    for (std::size_t k = 0; k < values.size(); ++k) os_ << (k ? "," : "") << format_number(values[k]);
    os_ << '\n';
}

void CsvWriter::close() {
    os_.close();
    if (!os_) throw std::runtime_error("write failed for " + path_);
}

}  // namespace vsq
