#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace uwqkd {

struct Column {
  std::string name;
  std::string unit;  // "-" for dimensionless

  bool operator==(const Column&) const = default;
};

using Cell = std::variant<double, long, std::string>;

// Tabular result of one subcommand. Row order is the order of the sweep axis.
struct ResultTable {
  std::vector<Column> schema;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
};

// %.12g, integers verbatim.
std::string format_number(double v);
std::string csv_quote(const std::string& field);

std::string to_csv(const ResultTable& t);
std::string to_json(const ResultTable& t);

// Inverse of to_csv for numeric and text cells; headers must be name[unit].
ResultTable parse_csv(const std::string& text);

}  // namespace uwqkd
