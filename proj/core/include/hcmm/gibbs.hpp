#ifndef HCMM_GIBBS_HPP
#define HCMM_GIBBS_HPP

#include <array>

#include "hcmm/dataset.hpp"
#include "hcmm/rng.hpp"
#include "hcmm/state.hpp"

namespace hcmm {

// One full-sweep record: per-update wall time, imputation move counts, and
// the log joint density of the completed data at sweep end (NaN when not
// evaluated).
struct SweepStats {
  std::array<double, 10> step_seconds{};
  long x_cells_imputed = 0;
  long y_cells_imputed = 0;
  double log_joint = std::numeric_limits<double>::quiet_NaN();
};

// Full conditionals of the blocked sampler. Each redraws one block in place;
// observed data cells are never modified.
void update_z(ModelState& st, Rng& rng);
void update_x_missing(ModelState& st, const MixedDataset& ds, Rng& rng);
void update_hx(ModelState& st, Rng& rng);
void update_hy_and_y_missing(ModelState& st, const MixedDataset& ds, Rng& rng);
void update_psi(ModelState& st, Rng& rng);
void update_b(ModelState& st, Rng& rng);
void update_sigma_components(ModelState& st, Rng& rng);
void update_hyper_b0_tau_sigma(ModelState& st, Rng& rng);
void update_sticks(ModelState& st, Rng& rng);
void update_concentrations(ModelState& st, Rng& rng);

// Fixed-scan composition of all updates, in the order declared above.
SweepStats gibbs_sweep(ModelState& st, const MixedDataset& ds, Rng& rng,
                       bool evaluate_log_joint = true);

}  // namespace hcmm

#endif
