#ifndef HCMM_STATS_HPP
#define HCMM_STATS_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hcmm/rng.hpp"

namespace hcmm {

// log(sum_i exp(x_i)) with max-subtraction.
double log_sum_exp(std::span<const double> x);

// Cholesky factorization with escalating diagonal jitter (1e-10 to 1e-6 of
// trace/q). Throws SamplerError if the matrix is not SPD after the last try.
Eigen::LLT<Eigen::MatrixXd> cholesky_spd(const Eigen::MatrixXd& m,
                                         const char* what = "matrix");

// Multivariate normal log density via a precomputed Cholesky factor.
double log_mvn_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::LLT<Eigen::MatrixXd>& chol);
double log_mvn_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov);

// Partitioned-Gaussian conditional: distribution of the `target` coordinates
// given observed values at the `given` coordinates, under N(mean, cov).
struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
ConditionalGaussian condition_gaussian(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov,
                                       const std::vector<int>& target,
                                       const std::vector<int>& given,
                                       const Eigen::VectorXd& given_values);

// Draw from N(mean, cov).
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, Rng& rng);

// Wishart(df, scale), E = df * scale. Bartlett decomposition.
Eigen::MatrixXd sample_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng);

// Inverse-Wishart(df, scale), E = scale / (df - q - 1) for df > q + 1.
Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       Rng& rng);

// Standard normal quantile.
double normal_quantile(double p);

// Student-t quantile with df degrees of freedom (df may be non-integral).
double student_t_quantile(double p, double df);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace hcmm

#endif
