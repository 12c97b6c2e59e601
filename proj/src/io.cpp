#include "riesz/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace riesz::io {

namespace {

bool parse_double(std::string_view token, double& out) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LabError(ErrorCode::IoFailure, "cannot open '" + path + "'");
  CsvTable table;
  std::vector<std::vector<double>> cols;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && parse_double(cells[i], row[i]);
    if (!numeric) {
      if (cols.empty() && table.header.empty()) {
        table.header = cells;
        continue;
      }
      throw LabError(ErrorCode::IoFailure, fmt::format("{}:{}: non-numeric row", path, line_no));
    }
    if (cols.empty()) cols.resize(row.size());
    if (row.size() != cols.size()) {
      throw LabError(ErrorCode::IoFailure, fmt::format("{}:{}: ragged row", path, line_no));
    }
    for (std::size_t i = 0; i < row.size(); ++i) cols[i].push_back(row[i]);
  }
  for (auto& c : cols) table.columns.push_back(Eigen::Map<RealVector>(c.data(), static_cast<Eigen::Index>(c.size())));
  return table;
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<RealVector>& columns) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c](r));
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw LabError(ErrorCode::IoFailure, "cannot write '" + path + "'");
  f << content;
  if (!f) throw LabError(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

}  // namespace riesz::io
