#include "hcmm/transforms.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "hcmm/error.hpp"

namespace hcmm {

std::pair<MixedDataset, StandardizationRecord> standardize(
    const MixedDataset& ds) {
  MixedDataset out = ds;
  StandardizationRecord rec;
  rec.mean.resize(ds.q());
  rec.sd.resize(ds.q());
  for (int v = 0; v < ds.q(); ++v) {
    rec.names.push_back(ds.cont[v].name);
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < ds.n; ++i) {
      if (ds.Ry(i, v)) continue;
      sum += ds.Y(i, v);
      ++count;
    }
    if (count < 2)
      throw InputError("column " + ds.cont[v].name +
                       " has fewer than 2 observed values");
    double mean = sum / count;
    double ss = 0.0;
    for (int i = 0; i < ds.n; ++i) {
      if (ds.Ry(i, v)) continue;
      double d = ds.Y(i, v) - mean;
      ss += d * d;
    }
    double var = ss / (count - 1);
    if (!(var > 0.0))
      throw InputError("column " + ds.cont[v].name +
                       " has zero variance among observed values");
    double sd = std::sqrt(var);
    rec.mean[v] = mean;
    rec.sd[v] = sd;
    for (int i = 0; i < ds.n; ++i) {
      if (ds.Ry(i, v)) continue;
      out.Y(i, v) = (ds.Y(i, v) - mean) / sd;
    }
  }
  return {std::move(out), std::move(rec)};
}

SemicontinuousParts decompose_semicontinuous(const Eigen::VectorXd& values,
                                             const BoolVector& missing) {
  const auto n = values.size();
  SemicontinuousParts parts;
  parts.indicator.setZero(n);
  parts.indicator_missing = BoolVector::Constant(n, false);
  parts.continuous.setConstant(n, std::numeric_limits<double>::quiet_NaN());
  parts.continuous_missing = BoolVector::Constant(n, true);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (missing[i]) {
      parts.indicator_missing[i] = true;
      continue;
    }
    if (values[i] == 0.0) {
      parts.indicator[i] = 1;
    } else {
      parts.indicator[i] = 2;
      parts.continuous[i] = values[i];
      parts.continuous_missing[i] = false;
    }
  }
  return parts;
}

ModelFrame ModelFrame::build(const CsvTable& table, const Schema& schema) {
  ModelFrame frame;
  frame.schema_ = schema;
  MixedDataset raw = load_dataset(table, schema);
  frame.source_y_ = raw.Y;
  frame.source_y_missing_ = raw.Ry;

  // decompose semicontinuous columns in place, appending indicator variables
  frame.map_.resize(schema.n_columns());
  int cat_j = 0, cont_v = 0;
  for (int c = 0; c < schema.n_columns(); ++c) {
    auto& m = frame.map_[c];
    m.kind = schema.columns[c].kind;
    if (m.kind == ColumnKind::Categorical) {
      m.cat_j = cat_j++;
    } else {
      m.cont_v = cont_v++;
    }
  }
  for (int c = 0; c < schema.n_columns(); ++c) {
    auto& m = frame.map_[c];
    if (m.kind != ColumnKind::Semicontinuous) continue;
    int v = m.cont_v;
    SemicontinuousParts parts =
        decompose_semicontinuous(raw.Y.col(v), raw.Ry.col(v));
    m.ind_j = raw.p();
    raw.cat.push_back(
        {schema.columns[c].name + "__nz", {"zero", "nonzero"}});
    raw.X.conservativeResize(raw.n, raw.p());
    raw.Rx.conservativeResize(raw.n, raw.p());
    raw.X.col(m.ind_j) = parts.indicator;
    raw.Rx.col(m.ind_j) = parts.indicator_missing;
    raw.Y.col(v) = parts.continuous;
    raw.Ry.col(v) = parts.continuous_missing;
  }
  raw.validate();

  auto [standardized, rec] = standardize(raw);
  frame.model_ = std::move(standardized);
  frame.std_ = std::move(rec);
  return frame;
}

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // trim to the shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

}  // namespace

Eigen::MatrixXd ModelFrame::completed_values(
    const Eigen::MatrixXi& completed_x,
    const Eigen::MatrixXd& completed_y) const {
  if (completed_x.rows() != model_.n || completed_y.rows() != model_.n ||
      completed_x.cols() != model_.p() || completed_y.cols() != model_.q())
    throw InputError("completed matrices do not match the model frame");
  Eigen::MatrixXd values(model_.n, model_.q());
  for (const auto& m : map_) {
    if (m.cont_v < 0) continue;
    int v = m.cont_v;
    for (int i = 0; i < model_.n; ++i) {
      double y = std_.to_original_scale(v, completed_y(i, v));
      if (m.kind == ColumnKind::Semicontinuous)
        y = recompose_semicontinuous(completed_x(i, m.ind_j), y);
      // observed cells pass through bit-exactly, bypassing the scale round trip
      if (!source_y_missing_(i, v)) y = source_y_(i, v);
      values(i, v) = y;
    }
  }
  return values;
}

CsvTable ModelFrame::to_output_table(const Eigen::MatrixXi& completed_x,
                                     const Eigen::MatrixXd& completed_y) const {
  Eigen::MatrixXd values = completed_values(completed_x, completed_y);
  CsvTable out;
  for (const auto& col : schema_.columns) out.header.push_back(col.name);
  out.rows.resize(model_.n);
  for (int i = 0; i < model_.n; ++i) {
    auto& row = out.rows[i];
    row.resize(schema_.n_columns());
    for (int c = 0; c < schema_.n_columns(); ++c) {
      const auto& m = map_[c];
      switch (m.kind) {
        case ColumnKind::Categorical: {
          int code = completed_x(i, m.cat_j);
          if (code < 1 || code > model_.d(m.cat_j))
            throw InputError("completed code out of range at record " +
                             std::to_string(i + 1));
          row[c] = model_.cat[m.cat_j].levels[code - 1];
          break;
        }
        case ColumnKind::Continuous:
        case ColumnKind::Semicontinuous:
          row[c] = format_number(values(i, m.cont_v));
          break;
      }
    }
  }
  return out;
}

}  // namespace hcmm
