#include "hcmm/mechanism.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcmm/error.hpp"

namespace hcmm {

using nlohmann::json;

MarSpec default_mar_preset() {
  MarSpec spec;
  spec.complete_cases = 180;
  spec.fully_observed = {"age", "sex"};

  MarTarget earn;
  earn.variable = "earn";
  earn.intercept = -0.25;
  earn.linear.push_back({"sex", "M", 0.5, false});
  earn.quadratic.push_back({"age", 25.0, 25.0, -1.0, "sex", "M", 25.0, 0.0});
  spec.targets.push_back(earn);

  MarTarget child;
  child.variable = "child";
  child.intercept = 0.0;
  child.linear.push_back({"sex", "M", -1.5, false});
  child.quadratic.push_back({"age", 40.0, 30.0, -1.0, "sex", "M", -10.0, 10.0});
  spec.targets.push_back(child);

  MarBlock demographic;
  demographic.variables = {"race"};
  demographic.driver = "child";
  spec.blocks.push_back(demographic);
  return spec;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ColumnRef {
  int cat_j = -1;
  int cont_v = -1;
};

ColumnRef resolve(const MixedDataset& ds, const std::string& name) {
  ColumnRef ref;
  ref.cat_j = ds.cat_index(name);
  ref.cont_v = ds.cont_index(name);
  if (ref.cat_j < 0 && ref.cont_v < 0)
    throw InputError("mechanism references unknown variable: " + name);
  return ref;
}

void mask_variable(MixedDataset& ds, const ColumnRef& ref, int i) {
  if (ref.cat_j >= 0)
    ds.Rx(i, ref.cat_j) = true;
  else
    ds.Ry(i, ref.cont_v) = true;
}

std::set<int> draw_complete_cases(int n, int count, Rng& rng) {
  if (count > n) throw InputError("complete-case count exceeds sample size");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < count; ++i)
    std::swap(idx[i], idx[rng.uniform_int(i, n - 1)]);
  return {idx.begin(), idx.begin() + count};
}

}  // namespace

MixedDataset impose_mar(const MixedDataset& sample, const MarSpec& spec,
                        Rng& rng) {
  MixedDataset out = sample;
  const int n = out.n;
  std::set<int> exempt = draw_complete_cases(n, spec.complete_cases, rng);

  std::set<std::string> fully(spec.fully_observed.begin(),
                              spec.fully_observed.end());
  for (const auto& target : spec.targets)
    if (fully.count(target.variable))
      throw InputError("target variable is declared fully observed: " +
                       target.variable);

  // response indicators by variable name, available to later terms
  std::map<std::string, std::vector<char>> response;

  auto indicator_value = [&](const MixedDataset& ds, int i,
                             const std::string& cov,
                             const std::string& level) {
    ColumnRef ref = resolve(ds, cov);
    if (ref.cat_j >= 0) {
      if (ds.Rx(i, ref.cat_j))
        throw InputError("logit covariate missing at record " +
                         std::to_string(i + 1) + ": " + cov);
      return ds.cat[ref.cat_j].levels[ds.X(i, ref.cat_j) - 1] == level ? 1.0
                                                                       : 0.0;
    }
    throw InputError("level comparison on continuous covariate: " + cov);
  };
  auto continuous_value = [&](const MixedDataset& ds, int i,
                              const std::string& cov) {
    ColumnRef ref = resolve(ds, cov);
    if (ref.cont_v < 0)
      throw InputError("expected continuous covariate: " + cov);
    if (ds.Ry(i, ref.cont_v))
      throw InputError("logit covariate missing at record " +
                       std::to_string(i + 1) + ": " + cov);
    return ds.Y(i, ref.cont_v);
  };

  for (const auto& target : spec.targets) {
    ColumnRef ref = resolve(out, target.variable);
    std::vector<char> r(n, 0);
    for (int i = 0; i < n; ++i) {
      double eta = target.intercept;
      for (const auto& term : target.linear) {
        if (term.is_response_indicator) {
          auto it = response.find(term.covariate);
          if (it == response.end())
            throw InputError("response indicator drawn later: " +
                             term.covariate);
          eta += term.coef * it->second[i];
        } else if (term.level.empty()) {
          eta += term.coef * continuous_value(sample, i, term.covariate);
        } else {
          eta += term.coef *
                 indicator_value(sample, i, term.covariate, term.level);
        }
      }
      for (const auto& qt : target.quadratic) {
        double u = qt.shift_covariate.empty()
                       ? 0.0
                       : indicator_value(sample, i, qt.shift_covariate,
                                         qt.shift_level);
        double x = continuous_value(sample, i, qt.covariate);
        double z = (x - qt.center - qt.center_shift * u) /
                   (qt.scale + qt.scale_shift * u);
        eta += qt.coef * z * z;
      }
      bool miss = rng.uniform() < sigmoid(eta);
      r[i] = miss ? 1 : 0;
      if (miss && !exempt.count(i)) mask_variable(out, ref, i);
    }
    response[target.variable] = std::move(r);
  }

  for (const auto& block : spec.blocks) {
    auto it = response.find(block.driver);
    if (it == response.end())
      throw InputError("block driver is not a drawn target: " + block.driver);
    if (!(block.correlation > -1.0 && block.correlation < 1.0))
      throw InputError("block shock correlation must lie in (-1, 1)");
    std::vector<ColumnRef> refs;
    for (const auto& var : block.variables) {
      if (fully.count(var))
        throw InputError("block variable is declared fully observed: " + var);
      refs.push_back(resolve(out, var));
    }
    const double rho = block.correlation;
    const double shared_sd = std::sqrt(std::max(rho, 0.0));
    const double own_sd = std::sqrt(1.0 - std::max(rho, 0.0));
    for (int i = 0; i < n; ++i) {
      // equicorrelated shocks: one shared plus one idiosyncratic normal
      double shared = rng.normal();
      for (std::size_t k = 0; k < refs.size(); ++k) {
        double kappa = shared_sd * shared + own_sd * rng.normal();
        double eta = block.intercept + block.driver_coef * it->second[i] +
                     block.loading * kappa;
        if (rng.uniform() < sigmoid(eta) && !exempt.count(i))
          mask_variable(out, refs[k], i);
      }
    }
  }
  return out;
}

MixedDataset impose_mcar(const MixedDataset& sample, double rate,
                         int complete_cases, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw InputError("MCAR rate must lie in [0, 1]");
  MixedDataset out = sample;
  std::set<int> exempt = draw_complete_cases(out.n, complete_cases, rng);
  for (int i = 0; i < out.n; ++i) {
    if (exempt.count(i)) continue;
    for (int j = 0; j < out.p(); ++j)
      if (rng.uniform() < rate) out.Rx(i, j) = true;
    for (int v = 0; v < out.q(); ++v)
      if (rng.uniform() < rate) out.Ry(i, v) = true;
  }
  return out;
}

MixedDataset impose_mechanism(const MixedDataset& sample,
                              const MechanismSpec& spec, Rng& rng) {
  switch (spec.type) {
    case MechanismSpec::Type::Mar:
      return impose_mar(sample, spec.mar, rng);
    case MechanismSpec::Type::Mcar:
      return impose_mcar(sample, spec.mcar_rate, spec.mcar_complete_cases, rng);
    case MechanismSpec::Type::None:
      return sample;
  }
  throw InputError("unhandled mechanism type");
}

MechanismSpec MechanismSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("mechanism parse failure: ") + e.what());
  }
  MechanismSpec spec;
  const std::string type = j.value("type", std::string("none"));
  if (type == "none") {
    spec.type = Type::None;
    return spec;
  }
  if (type == "mcar") {
    spec.type = Type::Mcar;
    spec.mcar_rate = j.value("rate", 0.35);
    spec.mcar_complete_cases = j.value("complete_cases", 0);
    return spec;
  }
  if (type != "mar") throw InputError("unknown mechanism type: " + type);
  spec.type = Type::Mar;
  if (j.value("preset", false)) spec.mar = default_mar_preset();
  if (j.contains("complete_cases"))
    spec.mar.complete_cases = j["complete_cases"].get<int>();
  if (j.contains("fully_observed"))
    spec.mar.fully_observed =
        j["fully_observed"].get<std::vector<std::string>>();
  if (j.contains("targets")) {
    spec.mar.targets.clear();
    for (const auto& jt : j["targets"]) {
      MarTarget target;
      target.variable = jt.at("variable").get<std::string>();
      target.intercept = jt.value("intercept", 0.0);
      if (jt.contains("linear"))
        for (const auto& jl : jt["linear"])
          target.linear.push_back({jl.value("covariate", std::string()),
                                   jl.value("level", std::string()),
                                   jl.value("coef", 0.0),
                                   jl.value("response_indicator", false)});
      if (jt.contains("quadratic"))
        for (const auto& jq : jt["quadratic"]) {
          QuadraticTerm qt;
          qt.covariate = jq.value("covariate", std::string());
          qt.center = jq.value("center", 0.0);
          qt.scale = jq.value("scale", 1.0);
          qt.coef = jq.value("coef", -1.0);
          qt.shift_covariate = jq.value("shift_covariate", std::string());
          qt.shift_level = jq.value("shift_level", std::string());
          qt.center_shift = jq.value("center_shift", 0.0);
          qt.scale_shift = jq.value("scale_shift", 0.0);
          target.quadratic.push_back(qt);
        }
      spec.mar.targets.push_back(std::move(target));
    }
  }
  if (j.contains("blocks")) {
    spec.mar.blocks.clear();
    for (const auto& jb : j["blocks"]) {
      MarBlock block;
      block.variables = jb.at("variables").get<std::vector<std::string>>();
      block.driver = jb.value("driver", std::string());
      block.intercept = jb.value("intercept", -1.0);
      block.driver_coef = jb.value("driver_coef", 0.7);
      block.loading = jb.value("loading", 1.25);
      block.correlation = jb.value("correlation", 0.3);
      spec.mar.blocks.push_back(std::move(block));
    }
  }
  return spec;
}

MechanismSpec MechanismSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mechanism file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

}  // namespace hcmm
