#include "hcmm/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcmm/error.hpp"

namespace hcmm {

using nlohmann::json;

int Schema::find(const std::string& name) const {
  for (int j = 0; j < n_columns(); ++j)
    if (columns[j].name == name) return j;
  return -1;
}

void Schema::validate() const {
  if (columns.empty()) throw InputError("schema has no columns");
  std::set<std::string> names;
  for (const auto& col : columns) {
    if (col.name.empty()) throw InputError("schema column with empty name");
    if (!names.insert(col.name).second)
      throw InputError("duplicate schema column name: " + col.name);
    if (col.kind == ColumnKind::Categorical) {
      if (col.levels.empty())
        throw InputError("categorical column '" + col.name + "' has no levels");
      std::set<std::string> lv(col.levels.begin(), col.levels.end());
      if (lv.size() != col.levels.size())
        throw InputError("duplicate level labels in column '" + col.name + "'");
    }
  }
}

namespace {

ColumnKind parse_kind(const std::string& s, const std::string& col) {
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "continuous") return ColumnKind::Continuous;
  if (s == "semicontinuous") return ColumnKind::Semicontinuous;
  throw InputError("unknown column kind '" + s + "' for column '" + col + "'");
}

const char* kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Continuous: return "continuous";
    case ColumnKind::Semicontinuous: return "semicontinuous";
  }
  return "?";
}

}  // namespace

Schema Schema::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("schema parse failure: ") + e.what());
  }
  if (!j.contains("columns") || !j["columns"].is_array())
    throw InputError("schema must contain a 'columns' array");
  Schema schema;
  for (const auto& jc : j["columns"]) {
    ColumnSpec col;
    if (!jc.contains("name")) throw InputError("schema column missing 'name'");
    col.name = jc["name"].get<std::string>();
    col.kind = parse_kind(jc.value("kind", std::string("continuous")), col.name);
    if (jc.contains("levels"))
      col.levels = jc["levels"].get<std::vector<std::string>>();
    col.missing_token = jc.value("missing_token", std::string());
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

Schema Schema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string Schema::to_json_text() const {
  json j;
  j["columns"] = json::array();
  for (const auto& col : columns) {
    json jc;
    jc["name"] = col.name;
    jc["kind"] = kind_name(col.kind);
    if (col.kind == ColumnKind::Categorical) jc["levels"] = col.levels;
    if (!col.missing_token.empty()) jc["missing_token"] = col.missing_token;
    j["columns"].push_back(jc);
  }
  return j.dump(2);
}

}  // namespace hcmm
