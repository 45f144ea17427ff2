#include "uwqkd/table.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "uwqkd/errors.hpp"

namespace uwqkd {

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != schema.size()) {
    throw DomainError("row has " + std::to_string(row.size()) + " cells, schema has " +
                      std::to_string(schema.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  throw DomainError("no column named '" + name + "'");
}

double ResultTable::number(std::size_t row, const std::string& column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* l = std::get_if<long>(&c)) return static_cast<double>(*l);
  throw DomainError("column '" + column + "' is not numeric");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  return csv_quote(std::get<std::string>(c));
}

nlohmann::ordered_json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* l = std::get_if<long>(&c)) return *l;
  return std::get<std::string>(c);
}

// Splits one CSV record starting at pos; advances pos past the line end.
std::vector<std::string> read_record(const std::string& text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  while (pos < text.size()) {
    char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw DomainError("unterminated quoted CSV field");
  fields.push_back(field);
  return fields;
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  std::size_t used = 0;
  bool integral = s.find_first_of(".eEni") == std::string::npos;
  try {
    if (integral) {
      long v = std::stol(s, &used);
      if (used == s.size()) return v;
    }
    double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

}  // namespace

std::string to_csv(const ResultTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.schema.size(); ++i) {
    if (i) out += ',';
    out += csv_quote(t.schema[i].name + "[" + t.schema[i].unit + "]");
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const ResultTable& t) {
  nlohmann::ordered_json doc;
  auto& schema = doc["schema"] = nlohmann::ordered_json::array();
  for (const auto& c : t.schema) schema.push_back({{"name", c.name}, {"unit", c.unit}});
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  doc["metadata"] = t.metadata;
  return doc.dump(2) + "\n";
}

ResultTable parse_csv(const std::string& text) {
  ResultTable t;
  std::size_t pos = 0;
  if (text.empty()) throw DomainError("empty CSV");
  for (const auto& h : read_record(text, pos)) {
    auto open = h.rfind('[');
    if (open == std::string::npos || h.empty() || h.back() != ']') {
      throw DomainError("CSV header '" + h + "' is not name[unit]");
    }
    t.schema.push_back({h.substr(0, open), h.substr(open + 1, h.size() - open - 2)});
  }
  while (pos < text.size()) {
    auto fields = read_record(text, pos);
    std::vector<Cell> row;
    for (const auto& f : fields) row.push_back(parse_cell(f));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace uwqkd
