#include "adjscore/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace adjscore::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) {
    fields.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

bool CsvTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw std::runtime_error("unknown column '" + name + "'");
  }
  return values[static_cast<size_t>(it - columns.begin())];
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open CSV file '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw std::runtime_error("CSV file '" + path +
                             "' is empty or lacks a header row");
  }
  CsvTable table;
  table.columns = split_line(line);
  table.values.assign(table.columns.size(), {});

  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != table.columns.size()) {
      throw std::runtime_error("CSV file '" + path + "' row " +
                               std::to_string(row) + ": expected " +
                               std::to_string(table.columns.size()) +
                               " fields, got " +
                               std::to_string(fields.size()));
    }
    for (size_t c = 0; c < fields.size(); ++c) {
      char* end = nullptr;
      const double value = std::strtod(fields[c].c_str(), &end);
      if (fields[c].empty() || end != fields[c].c_str() + fields[c].size()) {
        throw std::runtime_error("CSV file '" + path + "' row " +
                                 std::to_string(row) + ", column '" +
                                 table.columns[c] +
                                 "': cannot parse numeric value '" +
                                 fields[c] + "'");
      }
      table.values[c].push_back(value);
    }
  }
  if (table.rows() == 0) {
    throw std::runtime_error("CSV file '" + path + "' contains no data rows");
  }
  return table;
}

Matrix build_design(const CsvTable& table,
                    const std::vector<std::string>& column_names,
                    bool intercept) {
  const Index n = table.rows();
  const Index p = static_cast<Index>(column_names.size()) + (intercept ? 1 : 0);
  Matrix design(n, p);
  Index col = 0;
  if (intercept) design.col(col++).setOnes();
  for (const std::string& name : column_names) {
    const std::vector<double>& values = table.column(name);
    design.col(col++) = Eigen::Map<const Vector>(values.data(), n);
  }
  return design;
}

}  // namespace adjscore::io
