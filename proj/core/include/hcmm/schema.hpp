#ifndef HCMM_SCHEMA_HPP
#define HCMM_SCHEMA_HPP

#include <string>
#include <vector>

namespace hcmm {

enum class ColumnKind { Categorical, Continuous, Semicontinuous };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<std::string> levels;  // categorical only, ordered; code = index + 1
  std::string missing_token;        // default: empty string
};

// Ordered column descriptors for one delimited-text dataset.
struct Schema {
  std::vector<ColumnSpec> columns;

  int n_columns() const { return static_cast<int>(columns.size()); }
  int find(const std::string& name) const;  // -1 if absent

  // Throws InputError when names collide, a level list is empty/duplicated,
  // or there are no columns.
  void validate() const;

  static Schema from_json_file(const std::string& path);
  static Schema from_json_text(const std::string& text);
  std::string to_json_text() const;
};

}  // namespace hcmm

#endif
