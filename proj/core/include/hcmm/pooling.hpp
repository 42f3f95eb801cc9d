#ifndef HCMM_POOLING_HPP
#define HCMM_POOLING_HPP

#include <string>
#include <utility>
#include <vector>

#include "hcmm/csv.hpp"
#include "hcmm/dataset.hpp"

namespace hcmm {

// Rubin-combined point estimate with variance decomposition and reference-t
// interval. When the between-variance is zero the df degenerate to infinity
// and a normal quantile is used (flagged).
struct PooledEstimate {
  double qbar = 0.0;
  double within = 0.0;       // W
  double between = 0.0;      // B
  double total = 0.0;        // T = W + (1 + 1/M) B
  double df = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  bool infinite_df = false;
};

// q and u hold the per-dataset point estimates and variances, M >= 2.
PooledEstimate rubin_pool(const std::vector<double>& q,
                          const std::vector<double>& u, double level = 0.95);

// Completed-data estimand over one dataset.
struct EstimandSpec {
  enum class Type { Mean, Proportion, OlsCoefficients, Median };
  std::string name;
  Type type = Type::Mean;
  std::string variable;                // mean / proportion / median target
  std::string level;                   // proportion target level
  std::string response;                // OLS response
  std::vector<std::string> predictors; // OLS predictors
  // conjunction of (categorical variable, level label) restrictions
  std::vector<std::pair<std::string, std::string>> subgroup;
};

std::vector<EstimandSpec> load_estimands_file(const std::string& path);
std::vector<EstimandSpec> load_estimands_text(const std::string& text);

// One scalar estimate; OLS specs expand to one row per coefficient.
struct EstimateRow {
  std::string name;
  double point = 0.0;
  double variance = 0.0;
  bool ok = true;           // false: empty subgroup or degenerate fit
  std::string note;
};

// SRS estimators with finite-population correction (1 - n/N); population_size
// <= 0 means infinite population (no correction).
std::vector<EstimateRow> estimators(const MixedDataset& completed,
                                    const EstimandSpec& spec,
                                    double population_size);

// Pool a set of completed datasets over a list of estimands; rows flagged
// not-ok in any dataset are excluded and reported with an empty CI.
struct PooledRow {
  std::string name;
  PooledEstimate estimate;
  bool ok = true;
  std::string note;
};

std::vector<PooledRow> pool_datasets(const std::vector<MixedDataset>& completed,
                                     const std::vector<EstimandSpec>& specs,
                                     double population_size,
                                     double level = 0.95);

CsvTable pooled_rows_to_csv(const std::vector<PooledRow>& rows);

}  // namespace hcmm

#endif
