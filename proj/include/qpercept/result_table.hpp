#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpercept/errors.hpp"

namespace qpercept {

/// Plain CSV table. The first line is '#' followed by the column names.
/// Cells must be finite except in columns declared as allowing infinities.
class ResultTable {
 public:
  struct Column {
    std::string name;
    bool allow_infinite = false;
  };

  explicit ResultTable(std::vector<Column> columns);

  void add_row(std::vector<double> row);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace qpercept
