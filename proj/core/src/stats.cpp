#include "hcmm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hcmm/error.hpp"

namespace hcmm {

double log_sum_exp(std::span<const double> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

Eigen::LLT<Eigen::MatrixXd> cholesky_spd(const Eigen::MatrixXd& m,
                                         const char* what) {
  const auto q = m.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  double base = m.trace() / static_cast<double>(q);
  if (!(base > 0.0)) base = 1.0;
  for (double eps = 1e-10; eps <= 1e-6; eps *= 100.0) {
    Eigen::MatrixXd jittered = m;
    jittered.diagonal().array() += eps * base;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw SamplerError(std::string(what) + " is not positive definite after jitter");
}

double log_mvn_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::LLT<Eigen::MatrixXd>& chol) {
  const auto q = y.size();
  Eigen::VectorXd diff = y - mean;
  Eigen::VectorXd z = chol.matrixL().solve(diff);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < q; ++i)
    log_det += std::log(chol.matrixL()(i, i));
  return -0.5 * static_cast<double>(q) * std::log(2.0 * M_PI) - log_det -
         0.5 * z.squaredNorm();
}

double log_mvn_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov) {
  return log_mvn_density(y, mean, cholesky_spd(cov, "covariance"));
}

ConditionalGaussian condition_gaussian(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov,
                                       const std::vector<int>& target,
                                       const std::vector<int>& given,
                                       const Eigen::VectorXd& given_values) {
  const int nt = static_cast<int>(target.size());
  const int ng = static_cast<int>(given.size());
  ConditionalGaussian out;
  if (ng == 0) {
    out.mean.resize(nt);
    out.cov.resize(nt, nt);
    for (int i = 0; i < nt; ++i) {
      out.mean[i] = mean[target[i]];
      for (int j = 0; j < nt; ++j) out.cov(i, j) = cov(target[i], target[j]);
    }
    return out;
  }
  Eigen::MatrixXd S_gg(ng, ng), S_tg(nt, ng), S_tt(nt, nt);
  Eigen::VectorXd mu_g(ng), mu_t(nt);
  for (int i = 0; i < ng; ++i) {
    mu_g[i] = mean[given[i]];
    for (int j = 0; j < ng; ++j) S_gg(i, j) = cov(given[i], given[j]);
  }
  for (int i = 0; i < nt; ++i) {
    mu_t[i] = mean[target[i]];
    for (int j = 0; j < ng; ++j) S_tg(i, j) = cov(target[i], given[j]);
    for (int j = 0; j < nt; ++j) S_tt(i, j) = cov(target[i], target[j]);
  }
  auto llt = cholesky_spd(S_gg, "observed-block covariance");
  Eigen::MatrixXd gain = llt.solve(S_tg.transpose()).transpose();  // nt x ng
  out.mean = mu_t + gain * (given_values - mu_g);
  out.cov = S_tt - gain * S_tg.transpose();
  // symmetrize against roundoff
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, Rng& rng) {
  auto llt = cholesky_spd(cov, "covariance");
  Eigen::VectorXd z = rng.normal_vector(static_cast<int>(mean.size()));
  return mean + llt.matrixL() * z;
}

Eigen::MatrixXd sample_wishart(double df, const Eigen::MatrixXd& scale,
                               Rng& rng) {
  const int q = static_cast<int>(scale.rows());
  if (!(df > q - 1))
    throw SamplerError("wishart df must exceed dimension - 1");
  auto llt = cholesky_spd(scale, "wishart scale");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    A(i, i) = std::sqrt(rng.chi_squared(df - i));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd LA = L * A;
  return LA * LA.transpose();
}

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       Rng& rng) {
  const int q = static_cast<int>(scale.rows());
  Eigen::MatrixXd scale_inv =
      cholesky_spd(scale, "inverse-wishart scale").solve(Eigen::MatrixXd::Identity(q, q));
  scale_inv = 0.5 * (scale_inv + scale_inv.transpose()).eval();
  Eigen::MatrixXd w = sample_wishart(df, scale_inv, rng);
  Eigen::MatrixXd out =
      cholesky_spd(w, "wishart draw").solve(Eigen::MatrixXd::Identity(q, q));
  return 0.5 * (out + out.transpose()).eval();
}

namespace {

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta (Lentz).
double ibeta_cf(double a, double b, double x) {
  const double tiny = 1e-30;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-14) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) -
                          log_beta_fn(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * ibeta_cf(a, b, x) / a;
  return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) -
                        log_beta_fn(b, a)) *
                   ibeta_cf(b, a, 1.0 - x) / b;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError("normal quantile requires p in (0,1)");
  // Newton on the CDF from a rough start; erfc gives the CDF
  double x = 0.0;
  for (int it = 0; it < 100; ++it) {
    double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    double step = (cdf - p) / std::max(pdf, 1e-300);
    x -= step;
    if (std::fabs(step) < 1e-12) break;
  }
  return x;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError("t quantile requires p in (0,1)");
  if (!(df > 0.0)) throw InputError("t quantile requires df > 0");
  if (df > 1e8) return normal_quantile(p);
  bool upper = p >= 0.5;
  double pp = upper ? 1.0 - p : p;  // tail probability
  // CDF(t) for t<0: 0.5 * I_{df/(df+t^2)}(df/2, 1/2); bisect on the tail
  auto tail_cdf = [&](double t) {
    // P(T <= -|t|)
    double x = df / (df + t * t);
    return 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  };
  double lo = 0.0, hi = 1.0;
  while (tail_cdf(hi) > pp) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (tail_cdf(mid) > pp)
      lo = mid;
    else
      hi = mid;
  }
  double t = 0.5 * (lo + hi);
  return upper ? t : -t;
}

}  // namespace hcmm
