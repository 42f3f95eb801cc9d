#include "hcmm/state.hpp"

#include <cmath>
#include <set>

#include "hcmm/error.hpp"
#include "hcmm/stats.hpp"

namespace hcmm {

namespace {

constexpr double kSimplexTol = 1e-10;

void check_simplex(const Eigen::VectorXd& s, const char* what) {
  if ((s.array() < 0.0).any() || std::fabs(s.sum() - 1.0) > kSimplexTol)
    throw SamplerError(std::string(what) + " is not a simplex");
}

}  // namespace

Eigen::VectorXd stick_break(const Eigen::VectorXd& xi) {
  const auto k = xi.size();
  if (k < 1) throw SamplerError("stick_break on empty vector");
  if (std::fabs(xi[k - 1] - 1.0) > 0.0)
    throw SamplerError("last stick entry must be exactly 1");
  Eigen::VectorXd phi(k);
  double remaining = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(xi[i] > 0.0) || xi[i] > 1.0)
      throw SamplerError("stick entries must lie in (0, 1]");
    phi[i] = xi[i] * remaining;
    remaining *= 1.0 - xi[i];
  }
  phi /= phi.sum();  // renormalize against roundoff
  return phi;
}

void ModelState::validate(const MixedDataset* ds) const {
  const int kz = trunc.Kz, kx = trunc.Kx, ky = trunc.Ky;
  if (lambda.size() != kz || xi_z.size() != kz)
    throw SamplerError("lambda/xi_z dimension mismatch");
  if (xi_z[kz - 1] != 1.0) throw SamplerError("last top-level stick must be 1");
  check_simplex(lambda, "lambda");
  if (phi_x.rows() != kz || phi_x.cols() != kx || phi_y.rows() != kz ||
      phi_y.cols() != ky)
    throw SamplerError("phi dimension mismatch");
  for (int z = 0; z < kz; ++z) {
    if (xi_x(z, kx - 1) != 1.0 || xi_y(z, ky - 1) != 1.0)
      throw SamplerError("last lower-level stick must be 1");
    check_simplex(phi_x.row(z).transpose(), "phi_x row");
    check_simplex(phi_y.row(z).transpose(), "phi_y row");
  }
  if (log_phi_x_tail.size() != kz || log_phi_y_tail.size() != kz)
    throw SamplerError("stick tail log dimension mismatch");
  if (!std::isfinite(log_lambda_tail) || log_lambda_tail > 0.0 ||
      !log_phi_x_tail.allFinite() || (log_phi_x_tail.array() > 0.0).any() ||
      !log_phi_y_tail.allFinite() || (log_phi_y_tail.array() > 0.0).any())
    throw SamplerError("stick tail logs must be finite and non-positive");
  if (static_cast<int>(psi.size()) != kx)
    throw SamplerError("psi dimension mismatch");
  for (const auto& component : psi)
    for (const auto& simplex : component) check_simplex(simplex, "psi");
  if (static_cast<int>(B.size()) != ky ||
      static_cast<int>(Sigma_c.size()) != ky)
    throw SamplerError("component parameter count mismatch");
  const int qq = q();
  for (const auto& sigma : Sigma_c) cholesky_spd(sigma, "Sigma_c");
  if (qq > 0) cholesky_spd(Sigma_h, "Sigma_h");
  if ((tau.array() <= 0.0).any()) throw SamplerError("tau must be positive");
  if (!(alpha > 0.0) || !(beta_x > 0.0) || !(beta_y > 0.0))
    throw SamplerError("concentration parameters must be positive");
  for (int i = 0; i < n(); ++i) {
    if (Z[i] < 0 || Z[i] >= kz || Hx[i] < 0 || Hx[i] >= kx || Hy[i] < 0 ||
        Hy[i] >= ky)
      throw SamplerError("latent index out of range");
  }
  if (ds) {
    for (int i = 0; i < ds->n; ++i) {
      for (int j = 0; j < ds->p(); ++j)
        if (!ds->Rx(i, j) && completed_x(i, j) != ds->X(i, j))
          throw SamplerError("completed X disagrees with an observed cell");
      for (int v = 0; v < ds->q(); ++v)
        if (!ds->Ry(i, v) && completed_y(i, v) != ds->Y(i, v))
          throw SamplerError("completed Y disagrees with an observed cell");
    }
  }
}

ModelState init_state(const MixedDataset& ds, const TruncationConfig& trunc,
                      const PriorConfig& prior, Rng& rng) {
  trunc.validate();
  prior.validate(ds.p(), ds.q());
  const int kz = trunc.Kz, kx = trunc.Kx, ky = trunc.Ky;
  const int p = ds.p(), q = ds.q(), n = ds.n;

  ModelState st;
  st.trunc = trunc;
  st.prior = prior;
  st.design = DesignSpec(ds.cat);
  const int p_star = st.design.length();

  // concentrations at their prior mean (shape/rate = 1)
  st.alpha = prior.a_alpha / prior.b_alpha;
  st.beta_x = prior.a_beta_x / prior.b_beta_x;
  st.beta_y = prior.a_beta_y / prior.b_beta_y;

  auto draw_sticks = [&rng](int k, double conc, double& log_tail) {
    Eigen::VectorXd xi(k);
    log_tail = 0.0;
    for (int i = 0; i + 1 < k; ++i) {
      Rng::BetaLog draw = rng.beta_log1m(1.0, conc);
      xi[i] = std::min(std::max(draw.value, 1e-15), 1.0);
      log_tail += draw.log1m;
    }
    xi[k - 1] = 1.0;
    return xi;
  };

  st.xi_z = draw_sticks(kz, st.alpha, st.log_lambda_tail);
  st.lambda = stick_break(st.xi_z);
  st.xi_x.resize(kz, kx);
  st.phi_x.resize(kz, kx);
  st.xi_y.resize(kz, ky);
  st.phi_y.resize(kz, ky);
  st.log_phi_x_tail.resize(kz);
  st.log_phi_y_tail.resize(kz);
  for (int z = 0; z < kz; ++z) {
    st.xi_x.row(z) = draw_sticks(kx, st.beta_x, st.log_phi_x_tail[z]).transpose();
    st.phi_x.row(z) = stick_break(st.xi_x.row(z).transpose()).transpose();
    st.xi_y.row(z) = draw_sticks(ky, st.beta_y, st.log_phi_y_tail[z]).transpose();
    st.phi_y.row(z) = stick_break(st.xi_y.row(z).transpose()).transpose();
  }

  st.psi.resize(kx);
  for (int s = 0; s < kx; ++s) {
    st.psi[s].resize(p);
    for (int j = 0; j < p; ++j) st.psi[s][j] = rng.dirichlet(prior.gamma[j]);
  }

  // neutral regression/covariance starts; Sigma_c at the prior-implied scale
  // (v / (w - q - 1)) * Sigma0, which is I at the default hyperparameters
  Eigen::MatrixXd sigma_init;
  if (q > 0) {
    double scale = prior.v / (prior.w - q - 1.0);
    if (!(scale > 0.0)) scale = 1.0;
    sigma_init = scale * prior.Sigma0;
  } else {
    sigma_init.resize(0, 0);
  }
  st.B.assign(ky, Eigen::MatrixXd::Zero(p_star, q));
  st.Sigma_c.assign(ky, sigma_init);
  st.B0 = Eigen::MatrixXd::Zero(p_star, q);
  st.Sigma_h = q > 0 ? Eigen::MatrixXd(prior.w * prior.Sigma0)
                     : Eigen::MatrixXd(0, 0);
  st.tau = Eigen::VectorXd::Constant(q, prior.a_tau / prior.b_tau);

  st.Z.resize(n);
  st.Hx.resize(n);
  st.Hy.resize(n);
  std::vector<double> probs;
  for (int i = 0; i < n; ++i) {
    probs.assign(st.lambda.data(), st.lambda.data() + kz);
    st.Z[i] = rng.categorical(probs);
    probs.assign(st.phi_x.row(st.Z[i]).begin(), st.phi_x.row(st.Z[i]).end());
    st.Hx[i] = rng.categorical(probs);
    probs.assign(st.phi_y.row(st.Z[i]).begin(), st.phi_y.row(st.Z[i]).end());
    st.Hy[i] = rng.categorical(probs);
  }

  st.completed_x = ds.X;
  st.completed_y = ds.Y;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j)
      if (ds.Rx(i, j)) st.completed_x(i, j) = rng.uniform_int(1, ds.d(j));
    for (int v = 0; v < q; ++v)
      if (ds.Ry(i, v)) st.completed_y(i, v) = rng.normal();
  }
  return st;
}

OccupancyReport occupancy_report(const ModelState& state) {
  OccupancyReport rep;
  std::set<int> z(state.Z.begin(), state.Z.end());
  std::set<int> hx(state.Hx.begin(), state.Hx.end());
  std::set<int> hy(state.Hy.begin(), state.Hy.end());
  rep.occupied_z = static_cast<int>(z.size());
  rep.occupied_hx = static_cast<int>(hx.size());
  rep.occupied_hy = static_cast<int>(hy.size());
  rep.saturated_z = rep.occupied_z == state.trunc.Kz;
  rep.saturated_hx = rep.occupied_hx == state.trunc.Kx;
  rep.saturated_hy = rep.occupied_hy == state.trunc.Ky;
  return rep;
}

}  // namespace hcmm
