#pragma once

#include <string>
#include <vector>

#include "riesz/linalg.hpp"

namespace riesz::io {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has no header row
  std::vector<RealVector> columns;
};

/// Numeric CSV with an optional header row; '#' lines are comments.
CsvTable read_csv(const std::string& path);

/// Round-trip precision ("%.17g"), '\n' line endings, byte-stable.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<RealVector>& columns);

void write_text(const std::string& path, const std::string& content);

std::string format_double(double value);

}  // namespace riesz::io
