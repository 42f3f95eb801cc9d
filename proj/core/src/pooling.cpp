#include "hcmm/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "hcmm/error.hpp"
#include "hcmm/stats.hpp"

namespace hcmm {

using nlohmann::json;

PooledEstimate rubin_pool(const std::vector<double>& q,
                          const std::vector<double>& u, double level) {
  const auto m = q.size();
  if (m < 2 || u.size() != m)
    throw InputError("pooling requires M >= 2 matched estimates and variances");
  for (double ui : u)
    if (ui < 0.0) throw InputError("negative within variance");

  PooledEstimate out;
  for (std::size_t i = 0; i < m; ++i) {
    out.qbar += q[i];
    out.within += u[i];
  }
  out.qbar /= m;
  out.within /= m;
  for (double qi : q) out.between += (qi - out.qbar) * (qi - out.qbar);
  out.between /= static_cast<double>(m - 1);
  const double inflation = (1.0 + 1.0 / static_cast<double>(m)) * out.between;
  out.total = out.within + inflation;

  double quantile;
  if (out.between > 0.0) {
    double r = out.within / inflation;
    out.df = static_cast<double>(m - 1) * (1.0 + r) * (1.0 + r);
    quantile = student_t_quantile(0.5 + level / 2.0, out.df);
  } else {
    out.infinite_df = true;
    out.df = std::numeric_limits<double>::infinity();
    quantile = normal_quantile(0.5 + level / 2.0);
  }
  const double half = quantile * std::sqrt(out.total);
  out.ci_lo = out.qbar - half;
  out.ci_hi = out.qbar + half;
  return out;
}

namespace {

EstimandSpec::Type parse_type(const std::string& s) {
  if (s == "mean") return EstimandSpec::Type::Mean;
  if (s == "proportion") return EstimandSpec::Type::Proportion;
  if (s == "ols") return EstimandSpec::Type::OlsCoefficients;
  if (s == "median") return EstimandSpec::Type::Median;
  throw InputError("unknown estimand type: " + s);
}

std::vector<int> subgroup_rows(const MixedDataset& ds,
                               const EstimandSpec& spec) {
  std::vector<int> keep;
  std::vector<std::pair<int, int>> conditions;  // (cat index, code)
  for (const auto& [var, level] : spec.subgroup) {
    int j = ds.cat_index(var);
    if (j < 0) throw InputError("subgroup variable not categorical: " + var);
    int code = 0;
    for (int l = 0; l < ds.d(j); ++l)
      if (ds.cat[j].levels[l] == level) code = l + 1;
    if (code == 0)
      throw InputError("unknown subgroup level '" + level + "' for " + var);
    conditions.emplace_back(j, code);
  }
  for (int i = 0; i < ds.n; ++i) {
    bool in = true;
    for (const auto& [j, code] : conditions) in = in && ds.X(i, j) == code;
    if (in) keep.push_back(i);
  }
  return keep;
}

double fpc(double n, double population_size) {
  if (population_size <= 0.0) return 1.0;
  return std::max(0.0, 1.0 - n / population_size);
}

EstimateRow empty_subgroup(const EstimandSpec& spec) {
  EstimateRow row;
  row.name = spec.name;
  row.ok = false;
  row.note = "empty subgroup";
  return row;
}

}  // namespace

std::vector<EstimandSpec> load_estimands_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("estimand file parse failure: ") + e.what());
  }
  if (!j.contains("estimands") || !j["estimands"].is_array())
    throw InputError("estimand file must contain an 'estimands' array");
  std::vector<EstimandSpec> specs;
  for (const auto& je : j["estimands"]) {
    EstimandSpec spec;
    spec.type = parse_type(je.value("type", std::string("mean")));
    spec.variable = je.value("variable", std::string());
    spec.level = je.value("level", std::string());
    spec.response = je.value("response", std::string());
    if (je.contains("predictors"))
      spec.predictors = je["predictors"].get<std::vector<std::string>>();
    if (je.contains("subgroup"))
      for (const auto& [k, v] : je["subgroup"].items())
        spec.subgroup.emplace_back(k, v.get<std::string>());
    spec.name = je.value("name", std::string());
    if (spec.name.empty()) {
      std::ostringstream os;
      os << je.value("type", std::string("mean")) << "_"
         << (spec.variable.empty() ? spec.response : spec.variable);
      for (const auto& [k, v] : spec.subgroup) os << "_" << k << "=" << v;
      spec.name = os.str();
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<EstimandSpec> load_estimands_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open estimand file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_estimands_text(buf.str());
}

std::vector<EstimateRow> estimators(const MixedDataset& completed,
                                    const EstimandSpec& spec,
                                    double population_size) {
  std::vector<int> rows = subgroup_rows(completed, spec);
  const double n = static_cast<double>(rows.size());
  const double correction = fpc(n, population_size);

  switch (spec.type) {
    case EstimandSpec::Type::Mean: {
      if (rows.size() < 2) return {empty_subgroup(spec)};
      int v = completed.cont_index(spec.variable);
      if (v < 0) throw InputError("mean target not continuous: " + spec.variable);
      double mean = 0.0;
      for (int i : rows) mean += completed.Y(i, v);
      mean /= n;
      double ss = 0.0;
      for (int i : rows) ss += std::pow(completed.Y(i, v) - mean, 2);
      double s2 = ss / (n - 1.0);
      return {{spec.name, mean, correction * s2 / n, true, ""}};
    }
    case EstimandSpec::Type::Proportion: {
      if (rows.empty()) return {empty_subgroup(spec)};
      int j = completed.cat_index(spec.variable);
      if (j < 0)
        throw InputError("proportion target not categorical: " + spec.variable);
      int code = 0;
      for (int l = 0; l < completed.d(j); ++l)
        if (completed.cat[j].levels[l] == spec.level) code = l + 1;
      if (code == 0)
        throw InputError("unknown level '" + spec.level + "' for " +
                         spec.variable);
      double hits = 0.0;
      for (int i : rows) hits += completed.X(i, j) == code ? 1.0 : 0.0;
      double p = hits / n;
      return {{spec.name, p, correction * p * (1.0 - p) / n, true, ""}};
    }
    case EstimandSpec::Type::Median: {
      if (rows.size() < 2) return {empty_subgroup(spec)};
      int v = completed.cont_index(spec.variable);
      if (v < 0)
        throw InputError("median target not continuous: " + spec.variable);
      std::vector<double> values;
      values.reserve(rows.size());
      for (int i : rows) values.push_back(completed.Y(i, v));
      std::sort(values.begin(), values.end());
      auto at = [&](double pr) {
        double h = pr * (n - 1.0);
        auto lo = static_cast<std::size_t>(std::floor(h));
        auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - lo) * (values[hi] - values[lo]);
      };
      double median = at(0.5);
      // asymptotic quantile variance 1 / (4 n f(med)^2) with a Gaussian
      // kernel density estimate at the median (Silverman bandwidth)
      double mean = 0.0;
      for (double x : values) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : values) ss += (x - mean) * (x - mean);
      double sd = std::sqrt(ss / (n - 1.0));
      double iqr = at(0.75) - at(0.25);
      double spread = sd;
      if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
      if (!(spread > 0.0)) {
        return {{spec.name, median, 0.0, false, "degenerate spread"}};
      }
      double bw = 1.06 * spread * std::pow(n, -0.2);
      double fhat = 0.0;
      for (double x : values)
        fhat += std::exp(-0.5 * std::pow((x - median) / bw, 2));
      fhat /= n * bw * std::sqrt(2.0 * M_PI);
      double variance = correction / (4.0 * n * fhat * fhat);
      return {{spec.name, median, variance, true, ""}};
    }
    case EstimandSpec::Type::OlsCoefficients: {
      int yv = completed.cont_index(spec.response);
      if (yv < 0)
        throw InputError("OLS response not continuous: " + spec.response);
      // intercept + each predictor: continuous as-is, categorical dummy-coded
      std::vector<std::string> terms{"intercept"};
      struct Column {
        int cont_v = -1;
        int cat_j = -1;
        int code = 0;
      };
      std::vector<Column> cols;
      for (const auto& name : spec.predictors) {
        int v = completed.cont_index(name);
        if (v >= 0) {
          cols.push_back({v, -1, 0});
          terms.push_back(name);
          continue;
        }
        int j = completed.cat_index(name);
        if (j < 0) throw InputError("unknown OLS predictor: " + name);
        for (int l = 2; l <= completed.d(j); ++l) {
          cols.push_back({-1, j, l});
          terms.push_back(name + "=" + completed.cat[j].levels[l - 1]);
        }
      }
      const int k = static_cast<int>(cols.size()) + 1;
      if (static_cast<int>(rows.size()) <= k) return {empty_subgroup(spec)};
      Eigen::MatrixXd X(rows.size(), k);
      Eigen::VectorXd y(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        X(r, 0) = 1.0;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          const auto& col = cols[c];
          X(r, c + 1) = col.cont_v >= 0
                            ? completed.Y(i, col.cont_v)
                            : (completed.X(i, col.cat_j) == col.code ? 1.0 : 0.0);
        }
        y[r] = completed.Y(i, yv);
      }
      Eigen::MatrixXd xtx = X.transpose() * X;
      Eigen::LLT<Eigen::MatrixXd> llt(xtx);
      if (llt.info() != Eigen::Success) {
        EstimateRow row;
        row.name = spec.name;
        row.ok = false;
        row.note = "singular design";
        return {row};
      }
      Eigen::VectorXd beta = llt.solve(X.transpose() * y);
      double rss = (y - X * beta).squaredNorm();
      double sigma2 = rss / (n - k);
      Eigen::MatrixXd cov =
          sigma2 * llt.solve(Eigen::MatrixXd::Identity(k, k));
      std::vector<EstimateRow> out;
      for (int c = 0; c < k; ++c)
        out.push_back({spec.name + ":" + terms[c], beta[c],
                       correction * cov(c, c), true, ""});
      return out;
    }
  }
  throw InputError("unhandled estimand type");
}

std::vector<PooledRow> pool_datasets(const std::vector<MixedDataset>& completed,
                                     const std::vector<EstimandSpec>& specs,
                                     double population_size, double level) {
  if (completed.size() < 2)
    throw InputError("pooling requires at least 2 completed datasets");
  std::vector<PooledRow> out;
  for (const auto& spec : specs) {
    // expand row names on the first dataset, then collect across datasets
    std::vector<std::vector<EstimateRow>> per_dataset;
    for (const auto& ds : completed)
      per_dataset.push_back(estimators(ds, spec, population_size));
    const auto& first = per_dataset.front();
    for (std::size_t r = 0; r < first.size(); ++r) {
      PooledRow row;
      row.name = first[r].name;
      std::vector<double> q, u;
      bool ok = true;
      std::string note;
      for (const auto& rows : per_dataset) {
        if (r >= rows.size() || !rows[r].ok || rows[r].name != row.name) {
          ok = false;
          note = r < rows.size() ? rows[r].note : "estimate missing";
          break;
        }
        q.push_back(rows[r].point);
        u.push_back(rows[r].variance);
      }
      row.ok = ok;
      row.note = note;
      if (ok) row.estimate = rubin_pool(q, u, level);
      out.push_back(std::move(row));
    }
  }
  return out;
}

CsvTable pooled_rows_to_csv(const std::vector<PooledRow>& rows) {
  CsvTable table;
  table.header = {"estimand", "qbar", "within", "between",
                  "total",    "df",   "lo",     "hi", "note"};
  char buf[40];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& row : rows) {
    if (!row.ok) {
      table.rows.push_back({row.name, "", "", "", "", "", "", "",
                            row.note.empty() ? "excluded" : row.note});
      continue;
    }
    const auto& e = row.estimate;
    table.rows.push_back({row.name, fmt(e.qbar), fmt(e.within),
                          fmt(e.between), fmt(e.total), fmt(e.df),
                          fmt(e.ci_lo), fmt(e.ci_hi),
                          e.infinite_df ? "normal reference" : ""});
  }
  return table;
}

}  // namespace hcmm
