#pragma once

#include <string>
#include <vector>

#include "jackfilter/errors.hpp"

namespace jackfilter {

/// 17-significant-digit decimal, enough to round-trip a double exactly.
std::string format_double(double v);

double parse_double(const std::string& s, const std::string& context);

/// Writes content to path via a temp file and rename, so a failed run never
/// leaves a partial output behind.
void atomic_write(const std::string& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;  // 1-based source line per row
};

/// Comma-separated with a mandatory header row; `#` lines and blanks are
/// ignored. Throws ParseError with the offending line number.
CsvTable read_csv(const std::string& path);

}  // namespace jackfilter
