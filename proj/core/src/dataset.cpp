#include "hcmm/dataset.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "hcmm/error.hpp"

namespace hcmm {

int MixedDataset::cat_index(const std::string& name) const {
  for (int j = 0; j < p(); ++j)
    if (cat[j].name == name) return j;
  return -1;
}

int MixedDataset::cont_index(const std::string& name) const {
  for (int v = 0; v < q(); ++v)
    if (cont[v].name == name) return v;
  return -1;
}

void MixedDataset::validate() const {
  if (X.rows() != n || Y.rows() != n || Rx.rows() != n || Ry.rows() != n)
    throw InputError("dataset row counts disagree");
  if (X.cols() != p() || Y.cols() != q())
    throw InputError("dataset column counts disagree with variable lists");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p(); ++j) {
      if (Rx(i, j)) continue;
      if (X(i, j) < 1 || X(i, j) > d(j))
        throw InputError("observed code out of range at record " +
                         std::to_string(i + 1) + ", variable " + cat[j].name);
    }
    for (int v = 0; v < q(); ++v) {
      if (Ry(i, v)) continue;
      if (!std::isfinite(Y(i, v)))
        throw InputError("non-finite observed value at record " +
                         std::to_string(i + 1) + ", variable " + cont[v].name);
    }
  }
}

std::uint64_t MixedDataset::observed_checksum() const {
  // FNV-1a over (i, j, value) triples of observed cells
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= b[k];
      h *= 1099511628211ULL;
    }
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p(); ++j) {
      if (Rx(i, j)) continue;
      int code = X(i, j);
      mix(&i, sizeof i);
      mix(&j, sizeof j);
      mix(&code, sizeof code);
    }
    for (int v = 0; v < q(); ++v) {
      if (Ry(i, v)) continue;
      double y = Y(i, v);
      std::uint64_t bits;
      std::memcpy(&bits, &y, sizeof bits);
      mix(&i, sizeof i);
      mix(&v, sizeof v);
      mix(&bits, sizeof bits);
    }
  }
  return h;
}

MixedDataset load_dataset(const CsvTable& table, const Schema& schema) {
  schema.validate();
  if (table.header.size() != static_cast<std::size_t>(schema.n_columns()))
    throw InputError("header has " + std::to_string(table.header.size()) +
                     " columns, schema declares " +
                     std::to_string(schema.n_columns()));
  for (int j = 0; j < schema.n_columns(); ++j) {
    if (table.header[j] != schema.columns[j].name)
      throw InputError("header column " + std::to_string(j + 1) + " is '" +
                       table.header[j] + "', schema declares '" +
                       schema.columns[j].name + "'");
  }

  MixedDataset ds;
  ds.n = static_cast<int>(table.rows.size());
  std::vector<int> cat_slot(schema.n_columns(), -1);
  std::vector<int> cont_slot(schema.n_columns(), -1);
  for (int j = 0; j < schema.n_columns(); ++j) {
    const auto& col = schema.columns[j];
    if (col.kind == ColumnKind::Categorical) {
      cat_slot[j] = static_cast<int>(ds.cat.size());
      ds.cat.push_back({col.name, col.levels});
    } else {
      cont_slot[j] = static_cast<int>(ds.cont.size());
      ds.cont.push_back({col.name});
    }
  }
  ds.X.setZero(ds.n, ds.p());
  ds.Y.setConstant(ds.n, ds.q(), std::numeric_limits<double>::quiet_NaN());
  ds.Rx = BoolMatrix::Constant(ds.n, ds.p(), false);
  ds.Ry = BoolMatrix::Constant(ds.n, ds.q(), false);

  for (int i = 0; i < ds.n; ++i) {
    const auto& row = table.rows[i];
    for (int j = 0; j < schema.n_columns(); ++j) {
      const auto& col = schema.columns[j];
      const std::string& cell = row[j];
      if (cell == col.missing_token) {
        if (cat_slot[j] >= 0)
          ds.Rx(i, cat_slot[j]) = true;
        else
          ds.Ry(i, cont_slot[j]) = true;
        continue;
      }
      if (cat_slot[j] >= 0) {
        int code = 0;
        for (std::size_t l = 0; l < col.levels.size(); ++l) {
          if (col.levels[l] == cell) {
            code = static_cast<int>(l) + 1;
            break;
          }
        }
        if (code == 0)
          throw InputError("unknown label '" + cell + "' at row " +
                           std::to_string(i + 1) + ", column " + col.name);
        ds.X(i, cat_slot[j]) = code;
      } else {
        char* end = nullptr;
        double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0' || !std::isfinite(v))
          throw InputError("non-numeric value '" + cell + "' at row " +
                           std::to_string(i + 1) + ", column " + col.name);
        ds.Y(i, cont_slot[j]) = v;
      }
    }
  }
  ds.validate();
  return ds;
}

}  // namespace hcmm
