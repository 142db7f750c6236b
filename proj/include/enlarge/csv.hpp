#pragma once

#include <string>
#include <vector>

#include "enlarge/reg_types.hpp"

namespace enlarge {

/// Numeric table read from CSV.  A header row is required; rows with
/// missing or non-numeric fields are dropped and counted.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
  int dropped_rows = 0;
};

CsvTable read_csv(const std::string& path);

/// Splits a table into features and the dependent variable.  The last
/// column is the target unless target_column names another one.
RegData reg_data_from_table(const CsvTable& table,
                            const std::string& target_column = "");

SampleSet samples_from_table(const CsvTable& table);

void write_matrix_csv(const std::string& path,
                      const std::vector<std::string>& header, const Matrix& values);

}  // namespace enlarge
