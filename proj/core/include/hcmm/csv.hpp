#ifndef HCMM_CSV_HPP
#define HCMM_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hcmm {

// Minimal delimited-text table: a header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Parses delimited text with an optional quote character for cells containing
// the delimiter. Throws InputError on ragged rows.
CsvTable read_csv(std::istream& in, char delimiter = ',');
CsvTable read_csv_file(const std::string& path, char delimiter = ',');

void write_csv(std::ostream& out, const CsvTable& table, char delimiter = ',');
void write_csv_file(const std::string& path, const CsvTable& table,
                    char delimiter = ',');

}  // namespace hcmm

#endif
