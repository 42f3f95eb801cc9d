#include "hcmm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hcmm/checkpoint.hpp"
#include "hcmm/density.hpp"
#include "hcmm/error.hpp"
#include "hcmm/gibbs.hpp"

namespace hcmm {

const char* kEngineVersion = "0.1.0";

namespace {

double quantile_of_sorted(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  if (n == 1) return sorted[0];
  double h = p * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

}  // namespace

TraceRow trace_diagnostics(const ModelState& st, const ModelFrame& frame,
                           long sweep) {
  const MixedDataset& ds = frame.model_data();
  TraceRow row;
  row.sweep = sweep;
  row.log_joint = log_joint_completed_data(st);
  OccupancyReport occ = occupancy_report(st);
  row.occupied_z = occ.occupied_z;
  row.occupied_hx = occ.occupied_hx;
  row.occupied_hy = occ.occupied_hy;

  Eigen::MatrixXd completed =
      frame.completed_values(st.completed_x, st.completed_y);
  for (int v = 0; v < ds.q(); ++v) {
    std::vector<double> values(completed.col(v).data(),
                               completed.col(v).data() + ds.n);
    std::sort(values.begin(), values.end());
    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= ds.n;
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    double sd = ds.n > 1 ? std::sqrt(ss / (ds.n - 1)) : 0.0;
    row.cont_stats.push_back({mean, sd, quantile_of_sorted(values, 0.25),
                              quantile_of_sorted(values, 0.5),
                              quantile_of_sorted(values, 0.75)});
  }
  for (int j = 0; j < ds.p(); ++j) {
    std::vector<double> freq(ds.d(j), 0.0);
    for (int i = 0; i < ds.n; ++i) freq[st.completed_x(i, j) - 1] += 1.0;
    for (double& f : freq) f /= ds.n;
    row.cat_freqs.push_back(std::move(freq));
  }
  return row;
}

MIOutput run_mi(const CsvTable& table, const Schema& schema,
                const RunConfig& cfg, const std::string& checkpoint_dir) {
  RunConfig config = cfg;
  if (config.glom) config.trunc.Kz = config.trunc.Ky = 1;
  config.validate();

  MIOutput out;
  out.frame = ModelFrame::build(table, schema);
  const MixedDataset& ds = out.frame.model_data();
  PriorConfig prior = PriorConfig::defaults(ds);

  Rng rng(config.seed);
  ModelState st = init_state(ds, config.trunc, prior, rng);

  // last M multiples of thin, counted back from the final sweep
  std::vector<long> retained;
  for (int k = config.m_datasets - 1; k >= 0; --k)
    retained.push_back(config.iterations - static_cast<long>(k) * config.thin);

  auto write_ckpt = [&](long sweep) {
    if (checkpoint_dir.empty()) return;
    Checkpoint ckpt{static_cast<std::uint64_t>(sweep), st, rng};
    save_checkpoint_file(checkpoint_dir + "/chain.ckpt", ckpt);
  };

  const long trace_every =
      std::max<long>(1, std::min<long>(config.thin, config.iterations / 20 + 1));
  std::size_t next_retained = 0;
  for (long sweep = 1; sweep <= config.iterations; ++sweep) {
    bool retain = next_retained < retained.size() &&
                  retained[next_retained] == sweep;
    bool trace = retain || sweep % trace_every == 0 ||
                 sweep == config.iterations;
    try {
      gibbs_sweep(st, ds, rng, false);
    } catch (const SamplerError& e) {
      write_ckpt(sweep - 1);
      throw SamplerError("sweep " + std::to_string(sweep) + ": " + e.what());
    }
    if (trace) {
      out.trace.push_back(trace_diagnostics(st, out.frame, sweep));
      OccupancyReport occ = occupancy_report(st);
      out.saturation_warning = out.saturation_warning || occ.any_saturated();
    }
    if (retain) {
      out.datasets.push_back(
          out.frame.to_output_table(st.completed_x, st.completed_y));
      out.dataset_sweeps.push_back(sweep);
      ++next_retained;
    }
    if (config.checkpoint_every > 0 && sweep % config.checkpoint_every == 0)
      write_ckpt(sweep);
  }

  nlohmann::json manifest;
  manifest["version"] = kEngineVersion;
  manifest["config"] = nlohmann::json::parse(config.to_json_text());
  manifest["seed"] = config.seed;
  manifest["n_records"] = ds.n;
  manifest["dataset_sweeps"] = out.dataset_sweeps;
  manifest["saturation_warning"] = out.saturation_warning;
  out.manifest_json = manifest.dump(2);
  return out;
}

CsvTable trace_to_csv(const std::vector<TraceRow>& trace,
                      const ModelFrame& frame) {
  const MixedDataset& ds = frame.model_data();
  CsvTable table;
  table.header = {"sweep", "log_joint", "occupied_z", "occupied_hx",
                  "occupied_hy"};
  for (int v = 0; v < ds.q(); ++v) {
    const std::string& name = ds.cont[v].name;
    for (const char* stat : {"mean", "sd", "q25", "median", "q75"})
      table.header.push_back(name + "_" + stat);
  }
  for (int j = 0; j < ds.p(); ++j)
    for (int l = 0; l < ds.d(j); ++l)
      table.header.push_back(ds.cat[j].name + "_freq_" + ds.cat[j].levels[l]);

  char buf[40];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& row : trace) {
    std::vector<std::string> cells;
    cells.push_back(std::to_string(row.sweep));
    cells.push_back(fmt(row.log_joint));
    cells.push_back(std::to_string(row.occupied_z));
    cells.push_back(std::to_string(row.occupied_hx));
    cells.push_back(std::to_string(row.occupied_hy));
    for (const auto& stats : row.cont_stats)
      for (double s : stats) cells.push_back(fmt(s));
    for (const auto& freqs : row.cat_freqs)
      for (double f : freqs) cells.push_back(fmt(f));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void write_mi_output(const MIOutput& out, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (std::size_t m = 0; m < out.datasets.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "imp_%02zu.csv", m + 1);
    write_csv_file(out_dir + "/" + name, out.datasets[m]);
  }
  std::ofstream manifest(out_dir + "/manifest");
  if (!manifest) throw InputError("cannot write manifest in " + out_dir);
  manifest << out.manifest_json << '\n';
  write_csv_file(out_dir + "/trace.csv", trace_to_csv(out.trace, out.frame));
}

}  // namespace hcmm
