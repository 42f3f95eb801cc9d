#include "hcmm/csv.hpp"

#include <fstream>
#include <sstream>

#include "hcmm/error.hpp"

namespace hcmm {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == delim) {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

bool needs_quoting(const std::string& s, char delim) {
  return s.find(delim) != std::string::npos || s.find('"') != std::string::npos;
}

void write_cell(std::ostream& out, const std::string& s, char delim) {
  if (!needs_quoting(s, delim)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

CsvTable read_csv(std::istream& in, char delimiter) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && line_no > 1) continue;  // trailing blank lines
    auto cells = split_line(line, delimiter);
    if (line_no == 1) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size())
        throw InputError("row " + std::to_string(line_no - 1) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw InputError("empty input: no header row");
  return table;
}

CsvTable read_csv_file(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file: " + path);
  return read_csv(in, delimiter);
}

void write_csv(std::ostream& out, const CsvTable& table, char delimiter) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << delimiter;
    write_cell(out, table.header[j], delimiter);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << delimiter;
      write_cell(out, row[j], delimiter);
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const CsvTable& table,
                    char delimiter) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  write_csv(out, table, delimiter);
}

}  // namespace hcmm
