#include "hcmm/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <vector>

#include "hcmm/density.hpp"
#include "hcmm/error.hpp"
#include "hcmm/stats.hpp"

namespace hcmm {

namespace {

constexpr double kLogFloor = -690.775527898213705;  // log(1e-300)

double safe_log(double x) { return x > 1e-300 ? std::log(x) : kLogFloor; }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void update_z(ModelState& st, Rng& rng) {
  const int kz = st.trunc.Kz;
  std::vector<double> logw(kz);
  for (int i = 0; i < st.n(); ++i) {
    const int hx = st.Hx[i], hy = st.Hy[i];
    for (int z = 0; z < kz; ++z)
      logw[z] = safe_log(st.lambda[z]) + safe_log(st.phi_x(z, hx)) +
                safe_log(st.phi_y(z, hy));
    st.Z[i] = rng.categorical_log(logw);
  }
}

void update_x_missing(ModelState& st, const MixedDataset& ds, Rng& rng) {
  const int p = st.p(), q = st.q();
  const int p_star = st.design.length();

  // per-component Cholesky factors, computed lazily
  std::vector<Eigen::LLT<Eigen::MatrixXd>> chol(st.trunc.Ky);
  std::vector<bool> have_chol(st.trunc.Ky, false);

  Eigen::RowVectorXi x_row(p);
  Eigen::RowVectorXd design_row(p_star);
  std::vector<double> logw;
  for (int i = 0; i < ds.n; ++i) {
    bool any = false;
    for (int j = 0; j < p; ++j) any = any || ds.Rx(i, j);
    if (!any) continue;
    const int hx = st.Hx[i], hy = st.Hy[i];
    if (q > 0 && !have_chol[hy]) {
      chol[hy] = cholesky_spd(st.Sigma_c[hy], "Sigma_c");
      have_chol[hy] = true;
    }
    x_row = st.completed_x.row(i);
    Eigen::VectorXd y_i = st.completed_y.row(i).transpose();
    for (int j = 0; j < p; ++j) {
      if (!ds.Rx(i, j)) continue;
      const int dj = ds.d(j);
      logw.assign(dj, 0.0);
      for (int c = 1; c <= dj; ++c) {
        double lw = safe_log(st.psi[hx][j][c - 1]);
        if (q > 0) {
          x_row[j] = c;
          st.design.encode_into(x_row, design_row);
          Eigen::VectorXd mean = (design_row * st.B[hy]).transpose();
          lw += log_mvn_density(y_i, mean, chol[hy]);
        }
        logw[c - 1] = lw;
      }
      int draw = rng.categorical_log(logw) + 1;
      x_row[j] = draw;
      st.completed_x(i, j) = draw;
    }
  }
}

void update_hx(ModelState& st, Rng& rng) {
  const int kx = st.trunc.Kx, p = st.p();

  // log psi lookup: [s][j][code-1]
  std::vector<std::vector<Eigen::VectorXd>> log_psi(kx);
  for (int s = 0; s < kx; ++s) {
    log_psi[s].resize(p);
    for (int j = 0; j < p; ++j)
      log_psi[s][j] = st.psi[s][j].array().max(1e-300).log().matrix();
  }

  std::vector<double> logw(kx);
  for (int i = 0; i < st.n(); ++i) {
    const int z = st.Z[i];
    for (int s = 0; s < kx; ++s) {
      double lw = safe_log(st.phi_x(z, s));
      for (int j = 0; j < p; ++j) lw += log_psi[s][j][st.completed_x(i, j) - 1];
      logw[s] = lw;
    }
    st.Hx[i] = rng.categorical_log(logw);
  }
}

void update_hy_and_y_missing(ModelState& st, const MixedDataset& ds,
                             Rng& rng) {
  const int ky = st.trunc.Ky, q = st.q();
  if (q == 0) {
    // no continuous block: Hy weights reduce to the stick-broken prior row
    std::vector<double> logw(ky);
    for (int i = 0; i < st.n(); ++i) {
      const int z = st.Z[i];
      for (int h = 0; h < ky; ++h) logw[h] = safe_log(st.phi_y(z, h));
      st.Hy[i] = rng.categorical_log(logw);
    }
    return;
  }

  const int p_star = st.design.length();
  Eigen::RowVectorXd design_row(p_star);
  std::vector<double> logw(ky);
  std::vector<int> obs, mis;
  for (int i = 0; i < st.n(); ++i) {
    const int z = st.Z[i];
    obs.clear();
    mis.clear();
    for (int v = 0; v < q; ++v) (ds.Ry(i, v) ? mis : obs).push_back(v);

    st.design.encode_into(st.completed_x.row(i), design_row);

    Eigen::VectorXd y_obs(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k)
      y_obs[k] = st.completed_y(i, obs[k]);

    // Hy marginal over the missing coordinates: observed-block Gaussian
    for (int h = 0; h < ky; ++h) {
      double lw = safe_log(st.phi_y(z, h));
      if (!obs.empty()) {
        Eigen::VectorXd mean_full = (design_row * st.B[h]).transpose();
        Eigen::VectorXd mean_obs(obs.size());
        Eigen::MatrixXd cov_obs(obs.size(), obs.size());
        for (std::size_t a = 0; a < obs.size(); ++a) {
          mean_obs[a] = mean_full[obs[a]];
          for (std::size_t b = 0; b < obs.size(); ++b)
            cov_obs(a, b) = st.Sigma_c[h](obs[a], obs[b]);
        }
        lw += log_mvn_density(y_obs, mean_obs, cov_obs);
      }
      logw[h] = lw;
    }
    const int h = rng.categorical_log(logw);
    st.Hy[i] = h;

    if (mis.empty()) continue;
    Eigen::VectorXd mean_full = (design_row * st.B[h]).transpose();
    try {
      ConditionalGaussian cond =
          condition_gaussian(mean_full, st.Sigma_c[h], mis, obs, y_obs);
      Eigen::VectorXd draw = sample_mvn(cond.mean, cond.cov, rng);
      for (std::size_t k = 0; k < mis.size(); ++k)
        st.completed_y(i, mis[k]) = draw[k];
    } catch (const SamplerError& e) {
      throw SamplerError("conditional draw failed for component " +
                         std::to_string(h + 1) + ": " + e.what());
    }
  }
}

void update_psi(ModelState& st, Rng& rng) {
  const int kx = st.trunc.Kx, p = st.p();
  std::vector<std::vector<Eigen::VectorXd>> counts(kx);
  for (int s = 0; s < kx; ++s) {
    counts[s].resize(p);
    for (int j = 0; j < p; ++j)
      counts[s][j] = Eigen::VectorXd::Zero(st.psi[s][j].size());
  }
  for (int i = 0; i < st.n(); ++i) {
    const int s = st.Hx[i];
    for (int j = 0; j < p; ++j) counts[s][j][st.completed_x(i, j) - 1] += 1.0;
  }
  for (int s = 0; s < kx; ++s)
    for (int j = 0; j < p; ++j)
      st.psi[s][j] = rng.dirichlet(st.prior.gamma[j] + counts[s][j]);
}

void update_b(ModelState& st, Rng& rng) {
  const int ky = st.trunc.Ky, q = st.q();
  if (q == 0) return;
  const int p_star = st.design.length();

  // designs and membership lists, shared across components
  std::vector<std::vector<int>> members(ky);
  for (int i = 0; i < st.n(); ++i) members[st.Hy[i]].push_back(i);
  Eigen::MatrixXd designs(st.n(), p_star);
  for (int i = 0; i < st.n(); ++i) {
    Eigen::RowVectorXd row(p_star);
    st.design.encode_into(st.completed_x.row(i), row);
    designs.row(i) = row;
  }

  for (int h = 0; h < ky; ++h) {
    const auto& idx = members[h];
    const int nh = static_cast<int>(idx.size());
    if (nh == 0) {
      // prior draw, columns independent N(B0 column, I / tau_v)
      for (int v = 0; v < q; ++v) {
        double sd = 1.0 / std::sqrt(st.tau[v]);
        for (int r = 0; r < p_star; ++r)
          st.B[h](r, v) = rng.normal(st.B0(r, v), sd);
      }
      continue;
    }
    Eigen::MatrixXd D(nh, p_star);
    Eigen::MatrixXd Y(nh, q);
    for (int k = 0; k < nh; ++k) {
      D.row(k) = designs.row(idx[k]);
      Y.row(k) = st.completed_y.row(idx[k]);
    }
    Eigen::MatrixXd DtD = D.transpose() * D;
    Eigen::MatrixXd precision =
        cholesky_spd(st.Sigma_c[h], "Sigma_c")
            .solve(Eigen::MatrixXd::Identity(q, q));
    precision = 0.5 * (precision + precision.transpose()).eval();

    // columns updated sequentially; the conditional of coordinate v given the
    // rest has variance 1 / precision_vv and an offset from the other columns
    for (int v = 0; v < q; ++v) {
      const double cond_var = 1.0 / precision(v, v);
      Eigen::VectorXd target(nh);
      for (int k = 0; k < nh; ++k) {
        double offset = 0.0;
        for (int u = 0; u < q; ++u) {
          if (u == v) continue;
          offset += precision(v, u) * (Y(k, u) - D.row(k).dot(st.B[h].col(u)));
        }
        double mu_tilde = -cond_var * offset;
        target[k] = Y(k, v) - mu_tilde;
      }
      Eigen::MatrixXd A =
          st.tau[v] * Eigen::MatrixXd::Identity(p_star, p_star) +
          DtD / cond_var;
      Eigen::VectorXd b =
          st.tau[v] * st.B0.col(v) + D.transpose() * target / cond_var;
      // tau excursions toward zero can make A nearly singular when D'D is
      // rank deficient; the jittered factorization keeps the draw defined
      Eigen::LLT<Eigen::MatrixXd> llt =
          cholesky_spd(A, "regression posterior precision");
      Eigen::VectorXd mean = llt.solve(b);
      // draw = mean + L^{-T} z
      Eigen::VectorXd z = rng.normal_vector(p_star);
      Eigen::VectorXd draw =
          mean + llt.matrixU().solve(z);
      st.B[h].col(v) = draw;
    }
  }
}

void update_sigma_components(ModelState& st, Rng& rng) {
  const int ky = st.trunc.Ky, q = st.q();
  if (q == 0) return;
  const int p_star = st.design.length();
  std::vector<Eigen::MatrixXd> scatter(ky, Eigen::MatrixXd::Zero(q, q));
  std::vector<int> counts(ky, 0);
  Eigen::RowVectorXd design_row(p_star);
  for (int i = 0; i < st.n(); ++i) {
    const int h = st.Hy[i];
    st.design.encode_into(st.completed_x.row(i), design_row);
    Eigen::VectorXd resid =
        st.completed_y.row(i).transpose() - (design_row * st.B[h]).transpose();
    scatter[h] += resid * resid.transpose();
    ++counts[h];
  }
  for (int h = 0; h < ky; ++h) {
    Eigen::MatrixXd scale = st.Sigma_h + scatter[h];
    st.Sigma_c[h] =
        sample_inverse_wishart(st.prior.v + counts[h], scale, rng);
  }
}

void update_hyper_b0_tau_sigma(ModelState& st, Rng& rng) {
  const int ky = st.trunc.Ky, q = st.q();
  if (q == 0) return;
  const int p_star = st.design.length();

  for (int v = 0; v < q; ++v) {
    const double prec = ky * st.tau[v] + 1.0 / st.prior.sigma2_0beta;
    const double sd = 1.0 / std::sqrt(prec);
    for (int r = 0; r < p_star; ++r) {
      double sum = 0.0;
      for (int h = 0; h < ky; ++h) sum += st.B[h](r, v);
      st.B0(r, v) = rng.normal(st.tau[v] * sum / prec, sd);
    }
  }

  for (int v = 0; v < q; ++v) {
    double ss = 0.0;
    for (int h = 0; h < ky; ++h)
      ss += (st.B[h].col(v) - st.B0.col(v)).squaredNorm();
    double shape = 0.5 * (st.prior.a_tau + ky * p_star);
    double rate = 0.5 * (st.prior.b_tau + ss);
    if (!(rate > 0.0))
      throw SamplerError("non-positive rate in tau update");
    st.tau[v] = rng.gamma(shape, rate);
  }

  Eigen::MatrixXd sum_inv =
      cholesky_spd(st.prior.Sigma0, "Sigma0")
          .solve(Eigen::MatrixXd::Identity(q, q));
  for (int h = 0; h < ky; ++h)
    sum_inv += cholesky_spd(st.Sigma_c[h], "Sigma_c")
                   .solve(Eigen::MatrixXd::Identity(q, q));
  sum_inv = 0.5 * (sum_inv + sum_inv.transpose()).eval();
  Eigen::MatrixXd scale =
      cholesky_spd(sum_inv, "hyper-scale precision")
          .solve(Eigen::MatrixXd::Identity(q, q));
  scale = 0.5 * (scale + scale.transpose()).eval();
  st.Sigma_h = sample_wishart(st.prior.w + ky * st.prior.v, scale, rng);
}

void update_sticks(ModelState& st, Rng& rng) {
  const int kz = st.trunc.Kz, kx = st.trunc.Kx, ky = st.trunc.Ky;
  const int n = st.n();

  Eigen::VectorXi m = Eigen::VectorXi::Zero(kz);
  Eigen::MatrixXi t_x = Eigen::MatrixXi::Zero(kz, kx);
  Eigen::MatrixXi t_y = Eigen::MatrixXi::Zero(kz, ky);
  for (int i = 0; i < n; ++i) {
    m[st.Z[i]] += 1;
    t_x(st.Z[i], st.Hx[i]) += 1;
    t_y(st.Z[i], st.Hy[i]) += 1;
  }

  // each draw contributes its exact log(1 - xi) to the running tail log
  auto draw_stick = [&rng](double a, double b, double& log_tail) {
    if (!(a > 0.0) || !(b > 0.0))
      throw SamplerError("negative Beta parameter in stick update");
    Rng::BetaLog v = rng.beta_log1m(a, b);
    log_tail += v.log1m;
    return std::min(std::max(v.value, 1e-15), 1.0);
  };

  long cum = 0;
  st.log_lambda_tail = 0.0;
  for (int z = 0; z + 1 < kz; ++z) {
    cum += m[z];
    st.xi_z[z] = draw_stick(1.0 + m[z], st.alpha + n - cum, st.log_lambda_tail);
  }
  st.xi_z[kz - 1] = 1.0;
  st.lambda = stick_break(st.xi_z);

  for (int z = 0; z < kz; ++z) {
    long cx = 0;
    st.log_phi_x_tail[z] = 0.0;
    for (int s = 0; s + 1 < kx; ++s) {
      cx += t_x(z, s);
      st.xi_x(z, s) = draw_stick(1.0 + t_x(z, s), st.beta_x + m[z] - cx,
                                 st.log_phi_x_tail[z]);
    }
    st.xi_x(z, kx - 1) = 1.0;
    st.phi_x.row(z) = stick_break(st.xi_x.row(z).transpose()).transpose();

    long cy = 0;
    st.log_phi_y_tail[z] = 0.0;
    for (int h = 0; h + 1 < ky; ++h) {
      cy += t_y(z, h);
      st.xi_y(z, h) = draw_stick(1.0 + t_y(z, h), st.beta_y + m[z] - cy,
                                 st.log_phi_y_tail[z]);
    }
    st.xi_y(z, ky - 1) = 1.0;
    st.phi_y.row(z) = stick_break(st.xi_y.row(z).transpose()).transpose();
  }
}

void update_concentrations(ModelState& st, Rng& rng) {
  const int kz = st.trunc.Kz, kx = st.trunc.Kx, ky = st.trunc.Ky;

  st.alpha = rng.gamma(st.prior.a_alpha + kz - 1,
                       st.prior.b_alpha - st.log_lambda_tail);

  // All truncated rows carry Beta(1, beta) sticks that feed the allocation
  // weights, so all of them are evidence for the concentrations; restricting
  // to occupied rows leaves the chain jointly inconsistent (it fails the
  // successive-conditional check). The tail logs are the exact
  // log phi_{z,K} accumulated at draw time, immune to weight underflow.
  double log_tail_x = st.log_phi_x_tail.sum();
  double log_tail_y = st.log_phi_y_tail.sum();
  st.beta_x = rng.gamma(st.prior.a_beta_x + kz * (kx - 1),
                        st.prior.b_beta_x - log_tail_x);
  st.beta_y = rng.gamma(st.prior.a_beta_y + kz * (ky - 1),
                        st.prior.b_beta_y - log_tail_y);
}

SweepStats gibbs_sweep(ModelState& st, const MixedDataset& ds, Rng& rng,
                       bool evaluate_log_joint) {
  SweepStats stats;
  int step = 0;
  auto timed = [&](auto&& fn) {
    auto t0 = Clock::now();
    fn();
    stats.step_seconds[step++] = seconds_since(t0);
  };
  timed([&] { update_z(st, rng); });
  timed([&] { update_x_missing(st, ds, rng); });
  timed([&] { update_hx(st, rng); });
  timed([&] { update_hy_and_y_missing(st, ds, rng); });
  timed([&] { update_psi(st, rng); });
  timed([&] { update_b(st, rng); });
  timed([&] { update_sigma_components(st, rng); });
  timed([&] { update_hyper_b0_tau_sigma(st, rng); });
  timed([&] { update_sticks(st, rng); });
  timed([&] { update_concentrations(st, rng); });

  stats.x_cells_imputed = ds.Rx.count();
  stats.y_cells_imputed = ds.Ry.count();
  if (evaluate_log_joint) {
    stats.log_joint = log_joint_completed_data(st);
    if (!std::isfinite(stats.log_joint))
      throw SamplerError("non-finite log joint density after sweep");
  }
  return stats;
}

}  // namespace hcmm
