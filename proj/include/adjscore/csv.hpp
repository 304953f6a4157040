#pragma once

#include <string>
#include <vector>

#include "adjscore/cumulants.hpp"

namespace adjscore::io {

// Header-row CSV with numeric body, stored column-major.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // values[c][row]

  Index rows() const { return values.empty() ? 0 : values[0].size(); }
  bool has_column(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
};

// Parses a CSV file; malformed input raises std::runtime_error with the
// file name and the offending row/column.
CsvTable read_csv(const std::string& path);

// Design matrix from named columns, optionally prefixed by an intercept.
Matrix build_design(const CsvTable& table,
                    const std::vector<std::string>& column_names,
                    bool intercept);

}  // namespace adjscore::io
