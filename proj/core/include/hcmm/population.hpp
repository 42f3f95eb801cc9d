#ifndef HCMM_POPULATION_HPP
#define HCMM_POPULATION_HPP

#include <string>
#include <vector>

#include "hcmm/dataset.hpp"
#include "hcmm/pooling.hpp"
#include "hcmm/rng.hpp"
#include "hcmm/schema.hpp"
#include "hcmm/state.hpp"

namespace hcmm {

// A fully observed synthetic population with its schema and the recorded
// true values of all registered estimands.
struct Population {
  Schema schema;
  MixedDataset data;
  std::vector<EstimandSpec> estimands;
  std::vector<std::string> truth_names;
  std::vector<double> truth_values;

  void record_truths();  // (re)computes truth_names/values from data
};

// Scripted parametric generator: sex/race/child with 2-3-way interactions,
// age roughly bell-shaped, earnings right-skewed with subgroup-varying
// skewness and variance.
Population build_desk_population(int n, Rng& rng);

// Population drawn from a fixed model state via its predictive distribution.
Population build_population_from_state(const ModelState& st,
                                       const std::vector<CatVariable>& cat,
                                       const std::vector<ContVariable>& cont,
                                       int n, Rng& rng);

// Simple random sample without replacement.
MixedDataset draw_srs(const MixedDataset& pop, int sample_size, Rng& rng);

// Render a dataset back to delimited text under its schema (missing cells
// use the schema's missing tokens).
CsvTable dataset_to_csv(const MixedDataset& ds, const Schema& schema);

}  // namespace hcmm

#endif
