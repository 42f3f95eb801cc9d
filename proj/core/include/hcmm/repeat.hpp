#ifndef HCMM_REPEAT_HPP
#define HCMM_REPEAT_HPP

#include <functional>
#include <string>
#include <vector>

#include "hcmm/config.hpp"
#include "hcmm/csv.hpp"
#include "hcmm/mechanism.hpp"
#include "hcmm/population.hpp"

namespace hcmm {

struct RepeatedSamplingDesign {
  int sample_size = 1000;
  int replicates = 100;
  MechanismSpec mechanism;
  RunConfig run;
  double level = 0.95;
};

struct ScoreboardRow {
  std::string name;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double standardized_bias = 0.0;  // |mean est - truth| / sd(est)
  double percent_bias = 0.0;
  double coverage = 0.0;           // empirical coverage of the nominal CI
  double mean_ci_width = 0.0;
  int replicates = 0;
};

struct Scoreboard {
  std::vector<ScoreboardRow> rows;
  int replicates_attempted = 0;
  int replicates_failed = 0;
  std::vector<std::string> failures;  // one message per failed replicate
};

// Per replicate: SRS draw, mechanism imposition, MI run, per-dataset
// estimation, Rubin pooling; aggregates bias/coverage/width against the
// population's recorded truths. Failed replicates are excluded and counted.
Scoreboard run_repeated_sampling(
    const Population& pop, const RepeatedSamplingDesign& design,
    std::uint64_t seed,
    const std::function<void(int, int)>& progress = nullptr);

CsvTable scoreboard_to_csv(const Scoreboard& board);

}  // namespace hcmm

#endif
