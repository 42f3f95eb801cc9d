#include "hcmm/population.hpp"

#include <cmath>
#include <cstdio>

#include "hcmm/density.hpp"
#include "hcmm/error.hpp"

namespace hcmm {

void Population::record_truths() {
  truth_names.clear();
  truth_values.clear();
  for (const auto& spec : estimands) {
    for (const auto& row : estimators(data, spec, 0.0)) {
      if (!row.ok)
        throw InputError("estimand '" + row.name +
                         "' is degenerate on the population");
      truth_names.push_back(row.name);
      truth_values.push_back(row.point);
    }
  }
}

namespace {

Schema desk_schema() {
  Schema schema;
  schema.columns = {
      {"sex", ColumnKind::Categorical, {"F", "M"}, ""},
      {"race", ColumnKind::Categorical, {"A", "B", "C"}, ""},
      {"child", ColumnKind::Categorical, {"0", "1", "2+"}, ""},
      {"age", ColumnKind::Continuous, {}, ""},
      {"earn", ColumnKind::Continuous, {}, ""},
  };
  return schema;
}

std::vector<EstimandSpec> desk_estimands() {
  auto mean = [](std::string var,
                 std::vector<std::pair<std::string, std::string>> sub = {}) {
    EstimandSpec s;
    s.type = EstimandSpec::Type::Mean;
    s.variable = var;
    s.subgroup = std::move(sub);
    s.name = "mean_" + var;
    for (const auto& [k, v] : s.subgroup) s.name += "_" + k + "=" + v;
    return s;
  };
  auto prop = [](std::string var, std::string level,
                 std::vector<std::pair<std::string, std::string>> sub = {}) {
    EstimandSpec s;
    s.type = EstimandSpec::Type::Proportion;
    s.variable = var;
    s.level = level;
    s.subgroup = std::move(sub);
    s.name = "prop_" + var + "=" + level;
    for (const auto& [k, v] : s.subgroup) s.name += "_" + k + "=" + v;
    return s;
  };
  return {
      mean("age"),
      mean("age", {{"sex", "F"}}),
      mean("age", {{"sex", "M"}}),
      mean("age", {{"race", "A"}}),
      mean("earn"),
      mean("earn", {{"race", "B"}}),
      mean("earn", {{"child", "0"}}),
      prop("sex", "M"),
      prop("child", "0"),
      prop("child", "0", {{"sex", "F"}}),
      prop("child", "2+", {{"sex", "M"}}),
      prop("race", "C"),
  };
}

}  // namespace

Population build_desk_population(int n, Rng& rng) {
  Population pop;
  pop.schema = desk_schema();
  MixedDataset& ds = pop.data;
  ds.n = n;
  ds.cat = {{"sex", {"F", "M"}},
            {"race", {"A", "B", "C"}},
            {"child", {"0", "1", "2+"}}};
  ds.cont = {{"age"}, {"earn"}};
  ds.X.resize(n, 3);
  ds.Y.resize(n, 2);
  ds.Rx = BoolMatrix::Constant(n, 3, false);
  ds.Ry = BoolMatrix::Constant(n, 2, false);

  for (int i = 0; i < n; ++i) {
    const int sex = rng.uniform() < 0.5 ? 1 : 2;  // 1=F, 2=M
    const bool male = sex == 2;

    // race depends mildly on sex
    const double race_f[3] = {0.46, 0.30, 0.24};
    const double race_m[3] = {0.42, 0.30, 0.28};
    const int race = rng.categorical(male ? race_m : race_f) + 1;

    // age: common bell, clamped to a working-age range
    double age;
    do {
      age = rng.normal(47.8, 12.2);
    } while (age < 18.0 || age > 85.0);

    // children: depends on sex, race and age band (a 3-way interaction)
    const bool mid_age = age >= 28.0 && age <= 52.0;
    double p0 = 0.55, p1 = 0.25;
    if (mid_age) {
      p0 -= 0.15;
      p1 += 0.10;
    }
    if (!male && race == 2) p0 -= 0.08;
    if (male && race == 3) p0 += 0.08;
    p0 = std::min(std::max(p0, 0.05), 0.90);
    const double p2 = std::max(1.0 - p0 - p1, 0.05);
    const double child_probs[3] = {p0, p1, p2};
    const int child = rng.categorical(child_probs) + 1;

    // earnings: right-skewed lognormal, location and skewness vary by
    // subgroup (variance differs by sex, mean by race/age/children)
    double mu = 7.5 + (male ? 0.12 : 0.0) + (race == 2 ? 0.06 : 0.0) +
                (race == 3 ? -0.04 : 0.0) + 0.004 * (age - 45.0) +
                (child == 3 ? -0.04 : 0.0);
    double sigma = male ? 0.26 : 0.20;
    double earn = std::exp(mu + sigma * rng.normal());

    ds.X(i, 0) = sex;
    ds.X(i, 1) = race;
    ds.X(i, 2) = child;
    ds.Y(i, 0) = age;
    ds.Y(i, 1) = earn;
  }
  ds.validate();
  pop.estimands = desk_estimands();
  pop.record_truths();
  return pop;
}

Population build_population_from_state(const ModelState& st,
                                       const std::vector<CatVariable>& cat,
                                       const std::vector<ContVariable>& cont,
                                       int n, Rng& rng) {
  Population pop;
  for (const auto& var : cat)
    pop.schema.columns.push_back(
        {var.name, ColumnKind::Categorical, var.levels, ""});
  for (const auto& var : cont)
    pop.schema.columns.push_back({var.name, ColumnKind::Continuous, {}, ""});

  MixedDataset& ds = pop.data;
  ds.n = n;
  ds.cat = cat;
  ds.cont = cont;
  ds.X.resize(n, ds.p());
  ds.Y.resize(n, ds.q());
  ds.Rx = BoolMatrix::Constant(n, ds.p(), false);
  ds.Ry = BoolMatrix::Constant(n, ds.q(), false);
  for (int i = 0; i < n; ++i) {
    auto [x, y] = sample_predictive(st, rng);
    ds.X.row(i) = x;
    ds.Y.row(i) = y.transpose();
  }
  ds.validate();
  return pop;
}

MixedDataset draw_srs(const MixedDataset& pop, int sample_size, Rng& rng) {
  if (sample_size > pop.n)
    throw InputError("sample size exceeds population size");
  // partial Fisher-Yates over an index array
  std::vector<int> idx(pop.n);
  for (int i = 0; i < pop.n; ++i) idx[i] = i;
  for (int i = 0; i < sample_size; ++i)
    std::swap(idx[i], idx[rng.uniform_int(i, pop.n - 1)]);

  MixedDataset out;
  out.n = sample_size;
  out.cat = pop.cat;
  out.cont = pop.cont;
  out.X.resize(sample_size, pop.p());
  out.Y.resize(sample_size, pop.q());
  out.Rx = BoolMatrix::Constant(sample_size, pop.p(), false);
  out.Ry = BoolMatrix::Constant(sample_size, pop.q(), false);
  for (int i = 0; i < sample_size; ++i) {
    out.X.row(i) = pop.X.row(idx[i]);
    out.Y.row(i) = pop.Y.row(idx[i]);
    out.Rx.row(i) = pop.Rx.row(idx[i]);
    out.Ry.row(i) = pop.Ry.row(idx[i]);
  }
  return out;
}

CsvTable dataset_to_csv(const MixedDataset& ds, const Schema& schema) {
  CsvTable table;
  char buf[40];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& col : schema.columns) table.header.push_back(col.name);
  table.rows.resize(ds.n);
  for (int i = 0; i < ds.n; ++i) {
    auto& row = table.rows[i];
    for (const auto& col : schema.columns) {
      if (col.kind == ColumnKind::Categorical) {
        int j = ds.cat_index(col.name);
        if (j < 0) throw InputError("schema/dataset mismatch on " + col.name);
        row.push_back(ds.Rx(i, j) ? col.missing_token
                                  : ds.cat[j].levels[ds.X(i, j) - 1]);
      } else {
        int v = ds.cont_index(col.name);
        if (v < 0) throw InputError("schema/dataset mismatch on " + col.name);
        row.push_back(ds.Ry(i, v) ? col.missing_token : fmt(ds.Y(i, v)));
      }
    }
  }
  return table;
}

}  // namespace hcmm
