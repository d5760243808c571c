#include "grm/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "grm/errors.hpp"

namespace grm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path, int line, int field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line) + ": field " + std::to_string(field) +
                     ": expected a number, got '" + s + "'");
  }
}

long parse_int(const std::string& s, const std::string& path, int line, int field) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line) + ": field " + std::to_string(field) +
                     ": expected an integer, got '" + s + "'");
  }
}

std::vector<std::vector<std::string>> read_table(const std::string& path,
                                                 const std::string& expected_header,
                                                 std::size_t n_fields) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw ParseError(path + ":1: expected header '" + expected_header + "', got '" + line + "'");

  std::vector<std::vector<std::string>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != n_fields)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(n_fields) + " fields, got " + std::to_string(fields.size()));
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_items_csv(const std::string& path, const ItemSet& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "item,a,b1,b2,b3,b4\n";
  for (const ItemParameters& item : items) {
    out << item.item_id << ',' << format_double(item.a);
    for (int k = 0; k < kThresholds; ++k) out << ',' << format_double(item.b[k]);
    out << '\n';
  }
}

ItemSet read_items_csv(const std::string& path) {
  const auto rows = read_table(path, "item,a,b1,b2,b3,b4", 6);
  ItemSet items;
  int lineno = 1;
  for (const auto& row : rows) {
    ++lineno;
    ItemParameters item;
    item.item_id = static_cast<int>(parse_int(row[0], path, lineno, 1));
    item.a = parse_double(row[1], path, lineno, 2);
    for (int k = 0; k < kThresholds; ++k) item.b[k] = parse_double(row[2 + k], path, lineno, 3 + k);
    try {
      validate(item);
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    items.push_back(item);
  }
  if (items.empty()) throw ParseError(path + ": no item rows");
  return items;
}

void write_responses_csv(const std::string& path, const ResponseMatrix& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "subject,item,response\n";
  for (int i = 0; i < data.subjects(); ++i)
    for (int j = 0; j < data.items(); ++j)
      out << i << ',' << j << ',' << data.y(i, j) << '\n';
}

ResponseMatrix read_responses_csv(const std::string& path) {
  const auto rows = read_table(path, "subject,item,response", 3);
  if (rows.empty()) throw ParseError(path + ": no response rows");

  long max_subject = -1, max_item = -1;
  struct Cell {
    long subject, item, response;
  };
  std::vector<Cell> cells;
  cells.reserve(rows.size());
  int lineno = 1;
  for (const auto& row : rows) {
    ++lineno;
    Cell c{parse_int(row[0], path, lineno, 1), parse_int(row[1], path, lineno, 2),
           parse_int(row[2], path, lineno, 3)};
    if (c.subject < 0 || c.item < 0)
      throw ParseError(path + ":" + std::to_string(lineno) + ": negative subject or item id");
    if (c.response < 0 || c.response >= kCategories)
      throw ParseError(path + ":" + std::to_string(lineno) + ": response outside 0..4");
    max_subject = std::max(max_subject, c.subject);
    max_item = std::max(max_item, c.item);
    cells.push_back(c);
  }

  ResponseMatrix data;
  data.y.setConstant(max_subject + 1, max_item + 1, -1);
  for (const Cell& c : cells) {
    if (data.y(c.subject, c.item) != -1)
      throw ParseError(path + ": duplicate cell subject=" + std::to_string(c.subject) +
                       " item=" + std::to_string(c.item));
    data.y(c.subject, c.item) = static_cast<int>(c.response);
  }
  for (int i = 0; i < data.subjects(); ++i)
    for (int j = 0; j < data.items(); ++j)
      if (data.y(i, j) == -1)
        throw ParseError(path + ": missing cell subject=" + std::to_string(i) +
                         " item=" + std::to_string(j));
  return data;
}

}  // namespace grm
