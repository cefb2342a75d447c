#pragma once

// Tiny CSV writer: versioned schema header line, UTF-8, LF endings, '.'
// decimal separator, doubles at %.12g.

#include <fstream>
#include <string>
#include <vector>

namespace dpnash {

std::string fmt_g(double v);  // %.12g

class CsvWriter {
  public:
    // Writes "# <schema> v<version>" followed by the header row.
    CsvWriter(const std::string& path, const std::string& schema, int version,
              const std::vector<std::string>& columns);

    void row(const std::vector<std::string>& cells);
    void close();

  private:
    std::ofstream f_;
    std::size_t ncols_;
};

}  // namespace dpnash
