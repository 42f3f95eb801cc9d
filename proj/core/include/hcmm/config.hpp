#ifndef HCMM_CONFIG_HPP
#define HCMM_CONFIG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace hcmm {

struct MixedDataset;

// Truncation levels for the three stick-breaking layers. Defaults are
// conservative reference values (15, 90, 60); GLOM mode is Kz = Ky = 1.
struct TruncationConfig {
  int Kz = 15;
  int Kx = 90;
  int Ky = 60;

  bool glom() const { return Kz == 1 && Ky == 1; }
  void validate() const;
};

// Hyperprior constants. Defaults follow the model's reference choices:
// gamma_j = (1/d_j, ..., 1/d_j), v = q+1, w = q+2, Sigma0 = I/(q+1),
// sigma2_0beta = 10, and G(0.5, 0.5) shape/rate priors for the
// concentration parameters and tau.
struct PriorConfig {
  std::vector<Eigen::VectorXd> gamma;  // Dirichlet vector per categorical var
  double v = 0.0;                      // inverse-Wishart df
  double w = 0.0;                      // Wishart df
  Eigen::MatrixXd Sigma0;              // q x q SPD
  double sigma2_0beta = 10.0;
  double a_alpha = 0.5, b_alpha = 0.5;
  double a_beta_x = 0.5, b_beta_x = 0.5;
  double a_beta_y = 0.5, b_beta_y = 0.5;
  double a_tau = 0.5, b_tau = 0.5;

  static PriorConfig defaults(const MixedDataset& ds);
  void validate(int p, int q) const;
};

// One imputation run.
struct RunConfig {
  int iterations = 4000;
  int burn_in = 2000;
  int thin = 400;
  int m_datasets = 5;
  std::uint64_t seed = 0;
  int chains = 1;
  int checkpoint_every = 10000;  // sweeps; 0 disables
  TruncationConfig trunc;
  bool glom = false;  // forces Kz = Ky = 1

  void validate() const;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

}  // namespace hcmm

#endif
