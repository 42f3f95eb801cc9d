#include "hcmm/repeat.hpp"

#include <cmath>
#include <cstdio>

#include "hcmm/engine.hpp"
#include "hcmm/error.hpp"

namespace hcmm {

Scoreboard run_repeated_sampling(
    const Population& pop, const RepeatedSamplingDesign& design,
    std::uint64_t seed, const std::function<void(int, int)>& progress) {
  if (pop.truth_names.empty())
    throw InputError("population has no registered estimands");
  const std::size_t n_estimands = pop.truth_names.size();
  const double population_size = static_cast<double>(pop.data.n);

  std::vector<std::vector<double>> estimates(n_estimands);
  std::vector<long> covered(n_estimands, 0);
  std::vector<double> width_sum(n_estimands, 0.0);
  std::vector<long> pooled_count(n_estimands, 0);

  Scoreboard board;
  board.replicates_attempted = design.replicates;
  Rng root(seed);
  for (int rep = 0; rep < design.replicates; ++rep) {
    try {
      Rng rng = root.fork(static_cast<std::uint64_t>(rep) + 1);
      MixedDataset sample = draw_srs(pop.data, design.sample_size, rng);
      MixedDataset masked = impose_mechanism(sample, design.mechanism, rng);

      RunConfig cfg = design.run;
      cfg.seed = Rng(seed).fork(0x5eed0000ULL + rep).engine()();
      cfg.checkpoint_every = 0;
      MIOutput mi = run_mi(dataset_to_csv(masked, pop.schema), pop.schema, cfg);

      std::vector<MixedDataset> completed;
      for (const auto& table : mi.datasets)
        completed.push_back(load_dataset(table, pop.schema));
      auto pooled =
          pool_datasets(completed, pop.estimands, population_size, design.level);
      if (pooled.size() != n_estimands)
        throw InputError("pooled row count does not match registered truths");
      for (std::size_t e = 0; e < n_estimands; ++e) {
        if (!pooled[e].ok) continue;
        if (pooled[e].name != pop.truth_names[e])
          throw InputError("estimand order mismatch in pooling");
        const auto& est = pooled[e].estimate;
        estimates[e].push_back(est.qbar);
        if (pop.truth_values[e] >= est.ci_lo && pop.truth_values[e] <= est.ci_hi)
          ++covered[e];
        width_sum[e] += est.ci_hi - est.ci_lo;
        ++pooled_count[e];
      }
    } catch (const std::exception& ex) {
      ++board.replicates_failed;
      board.failures.push_back("replicate " + std::to_string(rep + 1) + ": " +
                               ex.what());
    }
    if (progress) progress(rep + 1, design.replicates);
  }

  for (std::size_t e = 0; e < n_estimands; ++e) {
    ScoreboardRow row;
    row.name = pop.truth_names[e];
    row.truth = pop.truth_values[e];
    row.replicates = static_cast<int>(pooled_count[e]);
    if (row.replicates > 1) {
      double mean = 0.0;
      for (double v : estimates[e]) mean += v;
      mean /= row.replicates;
      double ss = 0.0;
      for (double v : estimates[e]) ss += (v - mean) * (v - mean);
      double sd = std::sqrt(ss / (row.replicates - 1));
      row.mean_estimate = mean;
      row.standardized_bias =
          sd > 0.0 ? std::fabs(mean - row.truth) / sd : 0.0;
      row.percent_bias =
          row.truth != 0.0 ? 100.0 * (mean - row.truth) / row.truth : 0.0;
      row.coverage = static_cast<double>(covered[e]) / row.replicates;
      row.mean_ci_width = width_sum[e] / row.replicates;
    }
    board.rows.push_back(std::move(row));
  }
  return board;
}

CsvTable scoreboard_to_csv(const Scoreboard& board) {
  CsvTable table;
  table.header = {"estimand",   "truth",    "mean_estimate",
                  "std_bias",   "pct_bias", "coverage",
                  "mean_width", "replicates"};
  char buf[40];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.8g", v);
    return std::string(buf);
  };
  for (const auto& row : board.rows)
    table.rows.push_back({row.name, fmt(row.truth), fmt(row.mean_estimate),
                          fmt(row.standardized_bias), fmt(row.percent_bias),
                          fmt(row.coverage), fmt(row.mean_ci_width),
                          std::to_string(row.replicates)});
  return table;
}

}  // namespace hcmm
