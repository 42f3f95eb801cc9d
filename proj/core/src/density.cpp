#include "hcmm/density.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "hcmm/error.hpp"
#include "hcmm/stats.hpp"

namespace hcmm {

namespace {

constexpr double kLogFloor = -690.775527898213705;  // log(1e-300)

double safe_log(double x) { return x > 1e-300 ? std::log(x) : kLogFloor; }

// log prod_j psi[s][j][x_j] for every component s
Eigen::VectorXd log_class_products(const Eigen::RowVectorXi& x,
                                   const ModelState& st) {
  const int kx = st.trunc.Kx;
  Eigen::VectorXd out(kx);
  for (int s = 0; s < kx; ++s) {
    double acc = 0.0;
    for (int j = 0; j < static_cast<int>(st.psi[s].size()); ++j) {
      const int code = x[j];
      if (code < 1 || code > st.psi[s][j].size())
        throw InputError("density query code out of range");
      acc += safe_log(st.psi[s][j][code - 1]);
    }
    out[s] = acc;
  }
  return out;
}

// log N(y; D(x) B_h, Sigma_h) for every component h
Eigen::VectorXd log_component_normals(const Eigen::RowVectorXi& x,
                                      const Eigen::VectorXd& y,
                                      const ModelState& st) {
  const int ky = st.trunc.Ky;
  Eigen::VectorXd out(ky);
  Eigen::RowVectorXd design_row(st.design.length());
  st.design.encode_into(x, design_row);
  for (int h = 0; h < ky; ++h) {
    Eigen::VectorXd mean = (design_row * st.B[h]).transpose();
    out[h] = log_mvn_density(y, mean, st.Sigma_c[h]);
  }
  return out;
}

}  // namespace

double log_marginal_px(const Eigen::RowVectorXi& x, const ModelState& st) {
  const int kz = st.trunc.Kz, kx = st.trunc.Kx;
  Eigen::VectorXd class_logs = log_class_products(x, st);
  // class weights: sum_z lambda_z phi_x(z, s)
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(kx);
  for (int z = 0; z < kz; ++z) weights += st.lambda[z] * st.phi_x.row(z).transpose();
  std::vector<double> terms(kx);
  for (int s = 0; s < kx; ++s) terms[s] = safe_log(weights[s]) + class_logs[s];
  return log_sum_exp(terms);
}

double marginal_px(const Eigen::RowVectorXi& x, const ModelState& st) {
  return std::exp(log_marginal_px(x, st));
}

double log_conditional_y_given_x(const Eigen::VectorXd& y,
                                 const Eigen::RowVectorXi& x,
                                 const ModelState& st) {
  const int kz = st.trunc.Kz, ky = st.trunc.Ky;
  Eigen::VectorXd class_logs = log_class_products(x, st);
  // w_h(x) = sum_z lambda_z phi_y(z, h) sum_s phi_x(z, s) prod_j psi
  std::vector<double> log_w(ky, -std::numeric_limits<double>::infinity());
  for (int h = 0; h < ky; ++h) {
    std::vector<double> terms;
    terms.reserve(kz);
    for (int z = 0; z < kz; ++z) {
      std::vector<double> inner(st.trunc.Kx);
      for (int s = 0; s < st.trunc.Kx; ++s)
        inner[s] = safe_log(st.phi_x(z, s)) + class_logs[s];
      terms.push_back(safe_log(st.lambda[z]) + safe_log(st.phi_y(z, h)) +
                      log_sum_exp(inner));
    }
    log_w[h] = log_sum_exp(terms);
  }
  const double log_norm = log_sum_exp(log_w);
  if (!std::isfinite(log_norm))
    throw SamplerError("all conditional mixture weights vanished");
  Eigen::VectorXd normals = log_component_normals(x, y, st);
  std::vector<double> terms(ky);
  for (int h = 0; h < ky; ++h) terms[h] = log_w[h] - log_norm + normals[h];
  return log_sum_exp(terms);
}

double conditional_y_given_x(const Eigen::VectorXd& y,
                             const Eigen::RowVectorXi& x,
                             const ModelState& st) {
  return std::exp(log_conditional_y_given_x(y, x, st));
}

double log_joint_density(const Eigen::RowVectorXi& x, const Eigen::VectorXd& y,
                         const ModelState& st) {
  const int kz = st.trunc.Kz, kx = st.trunc.Kx, ky = st.trunc.Ky;
  Eigen::VectorXd class_logs = log_class_products(x, st);
  Eigen::VectorXd normals = log_component_normals(x, y, st);
  std::vector<double> terms(kz);
  std::vector<double> inner_x(kx), inner_y(ky);
  for (int z = 0; z < kz; ++z) {
    for (int s = 0; s < kx; ++s)
      inner_x[s] = safe_log(st.phi_x(z, s)) + class_logs[s];
    for (int h = 0; h < ky; ++h)
      inner_y[h] = safe_log(st.phi_y(z, h)) + normals[h];
    terms[z] =
        safe_log(st.lambda[z]) + log_sum_exp(inner_x) + log_sum_exp(inner_y);
  }
  return log_sum_exp(terms);
}

double joint_density(const Eigen::RowVectorXi& x, const Eigen::VectorXd& y,
                     const ModelState& st) {
  return std::exp(log_joint_density(x, y, st));
}

std::pair<Eigen::RowVectorXi, Eigen::VectorXd> sample_predictive(
    const ModelState& st, Rng& rng) {
  const int p = static_cast<int>(st.psi.empty() ? 0 : st.psi[0].size());
  const int q = st.q();
  std::vector<double> probs(st.lambda.data(), st.lambda.data() + st.trunc.Kz);
  const int z = rng.categorical(probs);
  probs.assign(st.phi_x.row(z).begin(), st.phi_x.row(z).end());
  const int hx = rng.categorical(probs);
  probs.assign(st.phi_y.row(z).begin(), st.phi_y.row(z).end());
  const int hy = rng.categorical(probs);

  Eigen::RowVectorXi x(p);
  for (int j = 0; j < p; ++j) {
    probs.assign(st.psi[hx][j].data(),
                 st.psi[hx][j].data() + st.psi[hx][j].size());
    x[j] = rng.categorical(probs) + 1;
  }
  Eigen::VectorXd y(q);
  if (q > 0) {
    Eigen::RowVectorXd design_row(st.design.length());
    st.design.encode_into(x, design_row);
    Eigen::VectorXd mean = (design_row * st.B[hy]).transpose();
    y = sample_mvn(mean, st.Sigma_c[hy], rng);
  }
  return {x, y};
}

double log_joint_completed_data(const ModelState& st) {
  double total = 0.0;
  for (int i = 0; i < st.n(); ++i)
    total += log_joint_density(st.completed_x.row(i),
                               st.completed_y.row(i).transpose(), st);
  return total;
}

}  // namespace hcmm
