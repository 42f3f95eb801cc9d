#ifndef HCMM_DENSITY_HPP
#define HCMM_DENSITY_HPP

#include <Eigen/Dense>
#include <utility>

#include "hcmm/rng.hpp"
#include "hcmm/state.hpp"

namespace hcmm {

// Model densities for a fixed state snapshot. Codes in x are 1-based.

// Pr(X = x): latent class form with class weights sum_z lambda_z phi_x(z, s).
double marginal_px(const Eigen::RowVectorXi& x, const ModelState& st);
double log_marginal_px(const Eigen::RowVectorXi& x, const ModelState& st);

// f(y | X = x): mixture of multivariate normals with x-dependent weights.
double conditional_y_given_x(const Eigen::VectorXd& y,
                             const Eigen::RowVectorXi& x, const ModelState& st);
double log_conditional_y_given_x(const Eigen::VectorXd& y,
                                 const Eigen::RowVectorXi& x,
                                 const ModelState& st);

// f(x, y): the mixture-of-mixtures joint.
double joint_density(const Eigen::RowVectorXi& x, const Eigen::VectorXd& y,
                     const ModelState& st);
double log_joint_density(const Eigen::RowVectorXi& x, const Eigen::VectorXd& y,
                         const ModelState& st);

// Generative draw: z ~ lambda, (hx, hy) from the z-rows, x from psi products,
// y from the hy-component Gaussian.
std::pair<Eigen::RowVectorXi, Eigen::VectorXd> sample_predictive(
    const ModelState& st, Rng& rng);

// Sum of log_joint_density over the completed records of the state.
double log_joint_completed_data(const ModelState& st);

}  // namespace hcmm

#endif
