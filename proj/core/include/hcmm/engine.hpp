#ifndef HCMM_ENGINE_HPP
#define HCMM_ENGINE_HPP

#include <array>
#include <string>
#include <vector>

#include "hcmm/config.hpp"
#include "hcmm/csv.hpp"
#include "hcmm/schema.hpp"
#include "hcmm/state.hpp"
#include "hcmm/transforms.hpp"

namespace hcmm {

// One diagnostics row computed from a completed-data snapshot.
struct TraceRow {
  long sweep = 0;
  double log_joint = 0.0;
  int occupied_z = 0, occupied_hx = 0, occupied_hy = 0;
  // per continuous variable (original scale): mean, sd, q25, median, q75
  std::vector<std::array<double, 5>> cont_stats;
  // per categorical variable: completed-data level frequencies
  std::vector<std::vector<double>> cat_freqs;
};

TraceRow trace_diagnostics(const ModelState& st, const ModelFrame& frame,
                           long sweep);

struct MIOutput {
  std::vector<CsvTable> datasets;     // original layout, labels, scale
  std::vector<long> dataset_sweeps;   // sweep index per dataset
  std::vector<TraceRow> trace;
  bool saturation_warning = false;
  std::string manifest_json;
  ModelFrame frame;                   // the modeling view used for the run
};

// Runs one chain: burn-in, thinning, and extraction of M completed datasets.
// Retained sweeps are the last M multiples of `thin` counted back from the
// final sweep. When checkpoint_dir is nonempty a checkpoint is written every
// cfg.checkpoint_every sweeps and on sampler failure.
MIOutput run_mi(const CsvTable& table, const Schema& schema,
                const RunConfig& cfg, const std::string& checkpoint_dir = "");

// Serialize a trace table as delimited text.
CsvTable trace_to_csv(const std::vector<TraceRow>& trace,
                      const ModelFrame& frame);

// Write datasets as imp_01.csv ... imp_MM.csv plus manifest and trace.csv.
void write_mi_output(const MIOutput& out, const std::string& out_dir);

extern const char* kEngineVersion;

}  // namespace hcmm

#endif
