#include "qpercept/result_table.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace qpercept {

ResultTable::ResultTable(std::vector<Column> columns)
    : columns_(std::move(columns)) {
  if (columns_.empty()) throw InvalidConfig("a table needs at least one column");
}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns_.size()) {
    throw DimensionMismatch("row has " + std::to_string(row.size()) +
                            " cells, table has " +
                            std::to_string(columns_.size()) + " columns");
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (std::isnan(row[i])) {
      throw InvalidState("NaN in column " + columns_[i].name);
    }
    if (std::isinf(row[i]) && !columns_[i].allow_infinite) {
      throw InvalidState("infinite value in column " + columns_[i].name);
    }
  }
  rows_.push_back(std::move(row));
}

void ResultTable::write(std::ostream& out) const {
  out << "# ";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out << ",";
    out << columns_[i].name;
  }
  out << "\n";
  out << std::setprecision(12);
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (std::isinf(row[i])) {
        out << (row[i] > 0 ? "inf" : "-inf");
      } else {
        out << row[i];
      }
    }
    out << "\n";
  }
}

void ResultTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot open " + path.string() + " for writing");
  write(out);
  if (!out) throw InvalidConfig("failed writing " + path.string());
}

}  // namespace qpercept
