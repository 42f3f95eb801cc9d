#ifndef HCMM_STATE_HPP
#define HCMM_STATE_HPP

#include <Eigen/Dense>
#include <vector>

#include "hcmm/config.hpp"
#include "hcmm/dataset.hpp"
#include "hcmm/design.hpp"
#include "hcmm/rng.hpp"

namespace hcmm {

// phi_k = xi_k * prod_{l<k} (1 - xi_l). Entries of xi must lie in (0, 1]
// with the last pinned to 1; the result is renormalized to counter roundoff.
Eigen::VectorXd stick_break(const Eigen::VectorXd& xi);

// Complete parameter and latent-variable state of one sampler chain.
//
// Component indices Z, Hx, Hy are 0-based internally; data codes in
// completed_x remain 1-based like the dataset they overlay.
struct ModelState {
  TruncationConfig trunc;
  PriorConfig prior;
  DesignSpec design;

  Eigen::VectorXi Z, Hx, Hy;        // n, 0-based
  Eigen::VectorXd xi_z, lambda;     // Kz
  Eigen::MatrixXd xi_x, phi_x;      // Kz x Kx, each row a simplex
  Eigen::MatrixXd xi_y, phi_y;      // Kz x Ky
  // Exact log of the last stick-breaking weight (lambda_Kz and each row's
  // phi_{z,K}), accumulated from log(1 - xi) at draw time. The weight itself
  // can round to zero; the concentration updates need its true log.
  double log_lambda_tail = 0.0;
  Eigen::VectorXd log_phi_x_tail, log_phi_y_tail;  // Kz
  std::vector<std::vector<Eigen::VectorXd>> psi;  // [Kx][p], simplex of d_j
  std::vector<Eigen::MatrixXd> B;        // Ky matrices, p* x q
  std::vector<Eigen::MatrixXd> Sigma_c;  // Ky matrices, q x q SPD
  Eigen::MatrixXd B0;                    // p* x q
  Eigen::MatrixXd Sigma_h;               // q x q SPD hyper-scale
  Eigen::VectorXd tau;                   // q, positive
  double alpha = 1.0, beta_x = 1.0, beta_y = 1.0;

  Eigen::MatrixXi completed_x;  // n x p, observed cells + current imputations
  Eigen::MatrixXd completed_y;  // n x q

  int n() const { return static_cast<int>(Z.size()); }
  int p() const { return static_cast<int>(completed_x.cols()); }
  int q() const { return static_cast<int>(completed_y.cols()); }

  // Checks every structural invariant; throws SamplerError on violation.
  // When a dataset is supplied also checks that completed cells agree with
  // observed ones.
  void validate(const MixedDataset* ds = nullptr) const;
};

// Dispersed, reproducible initialization: sticks and psi from their priors
// (concentrations at their prior mean 1), neutral regression/covariance
// starts, missing X uniform over levels, missing Y standard normal.
ModelState init_state(const MixedDataset& ds, const TruncationConfig& trunc,
                      const PriorConfig& prior, Rng& rng);

struct OccupancyReport {
  int occupied_z = 0, occupied_hx = 0, occupied_hy = 0;
  bool saturated_z = false, saturated_hx = false, saturated_hy = false;
  bool any_saturated() const { return saturated_z || saturated_hx || saturated_hy; }
};

OccupancyReport occupancy_report(const ModelState& state);

}  // namespace hcmm

#endif
