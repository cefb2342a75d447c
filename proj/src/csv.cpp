#include "dpnash/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace dpnash {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& schema, int version,
                     const std::vector<std::string>& columns)
    : f_(path, std::ios::binary), ncols_(columns.size()) {
    if (!f_) throw std::runtime_error("cannot open for writing: " + path);
    f_ << "# " << schema << " v" << version << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) f_ << (i ? "," : "") << columns[i];
    f_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_) throw std::logic_error("csv row width != header width");
    for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
    f_ << "\n";
}

void CsvWriter::close() { f_.close(); }

}  // namespace dpnash
