#include "enlarge/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace enlarge {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_double(const std::string& s, double* value) {
  if (s.empty()) return false;
  char* end = nullptr;
  *value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV file is empty: " + path);
  CsvTable table;
  table.header = split_line(line);
  if (table.header.empty()) throw DataError("CSV header row is empty: " + path);
  const size_t ncol = table.header.size();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_line(line);
    if (fields.size() != ncol) {
      ++table.dropped_rows;
      continue;
    }
    std::vector<double> row(ncol);
    bool ok = true;
    for (size_t j = 0; j < ncol; ++j) {
      if (!parse_double(fields[j], &row[j])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++table.dropped_rows;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV file has no usable data rows: " + path);
  table.values.resize(static_cast<int>(rows.size()), static_cast<int>(ncol));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < ncol; ++j) table.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return table;
}

RegData reg_data_from_table(const CsvTable& table, const std::string& target_column) {
  const int ncol = static_cast<int>(table.header.size());
  if (ncol < 2) throw DataError("regression CSV needs at least two columns");
  int target = ncol - 1;
  if (!target_column.empty()) {
    target = -1;
    for (int j = 0; j < ncol; ++j) {
      if (table.header[j] == target_column) target = j;
    }
    if (target < 0) throw DataError("target column not found: " + target_column);
  }
  RegData data;
  data.y = table.values.col(target);
  data.x.resize(table.values.rows(), ncol - 1);
  int k = 0;
  for (int j = 0; j < ncol; ++j) {
    if (j == target) continue;
    data.x.col(k++) = table.values.col(j);
  }
  return data;
}

SampleSet samples_from_table(const CsvTable& table) {
  return SampleSet{table.values};
}

void write_matrix_csv(const std::string& path,
                      const std::vector<std::string>& header, const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CSV file: " + path);
  for (size_t j = 0; j < header.size(); ++j) {
    out << header[j] << (j + 1 < header.size() ? "," : "\n");
  }
  out.precision(17);
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      out << values(i, j) << (j + 1 < values.cols() ? "," : "\n");
    }
  }
}

}  // namespace enlarge
