#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hcmm/gibbs.hpp"
#include "hcmm/stats.hpp"
#include "hcmm/state.hpp"

using namespace hcmm;

namespace {

// running mean/variance with a standard error for Monte Carlo checks
struct Moments {
  double mean = 0.0, m2 = 0.0;
  long n = 0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double var() const { return m2 / (n - 1); }
  double se() const { return std::sqrt(var() / n); }
  double z(double target) const { return (mean - target) / se(); }
};

MixedDataset make_dataset(int n, const std::vector<CatVariable>& cat,
                          const std::vector<ContVariable>& cont) {
  MixedDataset ds;
  ds.n = n;
  ds.cat = cat;
  ds.cont = cont;
  ds.X = Eigen::MatrixXi::Constant(n, ds.p(), ds.p() > 0 ? 1 : 0);
  ds.Y = Eigen::MatrixXd::Zero(n, ds.q());
  ds.Rx = BoolMatrix::Constant(n, ds.p(), false);
  ds.Ry = BoolMatrix::Constant(n, ds.q(), false);
  return ds;
}

ModelState make_state(const MixedDataset& ds, const TruncationConfig& trunc,
                      std::uint64_t seed = 1) {
  Rng rng(seed);
  return init_state(ds, trunc, PriorConfig::defaults(ds), rng);
}

void set_row_simplex(Eigen::MatrixXd& xi, Eigen::MatrixXd& phi, int row,
                     const std::vector<double>& weights) {
  // translate target weights into sticks, then rebuild the simplex
  double rest = 1.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    xi(row, k) = k + 1 == weights.size() ? 1.0 : weights[k] / rest;
    rest -= weights[k];
  }
  phi.row(row) =
      stick_break(xi.row(row).transpose()).transpose();
}

}  // namespace

TEST_CASE("update_z: worked example P(Z=1) = 16/17 by Monte Carlo") {
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {2, 2, 2});
  st.xi_z << 0.5, 1.0;
  st.lambda = stick_break(st.xi_z);
  set_row_simplex(st.xi_x, st.phi_x, 0, {0.8, 0.2});
  set_row_simplex(st.xi_x, st.phi_x, 1, {0.2, 0.8});
  set_row_simplex(st.xi_y, st.phi_y, 0, {0.8, 0.2});
  set_row_simplex(st.xi_y, st.phi_y, 1, {0.2, 0.8});
  st.Hx.setZero();
  st.Hy.setZero();
  Rng rng(101);
  update_z(st, rng);
  long z0 = 0;
  for (int i = 0; i < n; ++i)
    if (st.Z[i] == 0) ++z0;
  const double p = 16.0 / 17.0;
  double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::fabs(static_cast<double>(z0) / n - p) < 3.0 * se);
}

TEST_CASE("update_z: Kz=1 pins every index") {
  MixedDataset ds = make_dataset(50, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 2, 2});
  Rng rng(102);
  update_z(st, rng);
  CHECK((st.Z.array() == 0).all());
}

TEST_CASE("update_x_missing: Bayes worked example (0.75, 0.25)") {
  // flat psi, Gaussian density ratio 3:1 between the two candidate levels
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1", "2"}}}, {{"y"}});
  for (int i = 0; i < n; ++i) {
    ds.Rx(i, 0) = true;
    ds.X(i, 0) = 0;
  }
  ModelState st = make_state(ds, {1, 1, 1});
  st.psi[0][0] << 0.5, 0.5;
  const double delta = std::sqrt(2.0 * std::log(3.0));
  st.B[0](0, 0) = 0.0;      // mean 0 at level 1
  st.B[0](1, 0) = delta;    // mean delta at level 2
  st.Sigma_c[0](0, 0) = 1.0;
  st.completed_y.setZero();  // y = 0: density ratio exp(delta^2/2) = 3
  Rng rng(103);
  update_x_missing(st, ds, rng);
  long lvl1 = 0;
  for (int i = 0; i < n; ++i)
    if (st.completed_x(i, 0) == 1) ++lvl1;
  double se = std::sqrt(0.75 * 0.25 / n);
  CHECK(std::fabs(lvl1 / static_cast<double>(n) - 0.75) < 3.0 * se);
}

TEST_CASE("update_x_missing: no continuous block reduces to the psi row") {
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1", "2", "3"}}}, {});
  for (int i = 0; i < n; ++i) {
    ds.Rx(i, 0) = true;
    ds.X(i, 0) = 0;
  }
  ModelState st = make_state(ds, {1, 1, 1});
  st.psi[0][0] << 0.6, 0.3, 0.1;
  Rng rng(104);
  update_x_missing(st, ds, rng);
  std::vector<long> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[st.completed_x(i, 0) - 1];
  for (int c = 0; c < 3; ++c) {
    double p = st.psi[0][0][c];
    double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(counts[c] / static_cast<double>(n) - p) < 3.5 * se);
  }
}

TEST_CASE("update_x_missing: two-variable enumeration oracle") {
  // p = 2 binary variables, both missing; the update is coordinate-wise, so
  // after one scan the first coordinate was drawn with the initial second
  // coordinate fixed. The oracle enumerates that exact scan distribution.
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1", "2"}}, {"b", {"1", "2"}}},
                                 {{"y"}});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) {
      ds.Rx(i, j) = true;
      ds.X(i, j) = 0;
    }
  ModelState st = make_state(ds, {1, 1, 1});
  st.psi[0][0] << 0.7, 0.3;
  st.psi[0][1] << 0.4, 0.6;
  st.B[0] << 0.0, 0.8, -0.5;  // p* = 3: intercept, a=2, b=2
  st.Sigma_c[0](0, 0) = 1.3;
  st.completed_y.setConstant(0.25);
  st.completed_x.setConstant(1);  // scan starts from (1, 1)
  ModelState saved = st;

  auto dens = [&](int a, int b) {
    Eigen::RowVectorXi x(2);
    x << a, b;
    double mean = st.design.encode(x).dot(st.B[0].col(0));
    double d = 0.25 - mean;
    return std::exp(-0.5 * d * d / 1.3) / std::sqrt(2 * 3.14159265358979 * 1.3);
  };
  // scan: draw a | b=1, then b | drawn a
  double pa[3], pb_given_a[3][3];
  {
    double w1 = 0.7 * dens(1, 1), w2 = 0.3 * dens(2, 1);
    pa[1] = w1 / (w1 + w2);
    pa[2] = w2 / (w1 + w2);
    for (int a = 1; a <= 2; ++a) {
      double v1 = 0.4 * dens(a, 1), v2 = 0.6 * dens(a, 2);
      pb_given_a[a][1] = v1 / (v1 + v2);
      pb_given_a[a][2] = v2 / (v1 + v2);
    }
  }
  Rng rng(105);
  update_x_missing(st, ds, rng);
  long cell[3][3] = {};
  for (int i = 0; i < n; ++i)
    ++cell[st.completed_x(i, 0)][st.completed_x(i, 1)];
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b) {
      double p = pa[a] * pb_given_a[a][b];
      double se = std::sqrt(p * (1 - p) / n);
      CHECK(std::fabs(cell[a][b] / static_cast<double>(n) - p) < 3.5 * se);
    }
  // observed cells untouched
  CHECK(st.completed_y == saved.completed_y);
}

TEST_CASE("update_hx: deterministic and Monte Carlo cases") {
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 2, 1});
  set_row_simplex(st.xi_x, st.phi_x, 0, {0.5, 0.5});
  st.psi[0][0] << 0.9, 0.1;
  st.psi[1][0] << 0.3, 0.7;
  st.completed_x.setConstant(2);
  Rng rng(106);
  update_hx(st, rng);
  long h1 = 0;
  for (int i = 0; i < n; ++i)
    if (st.Hx[i] == 1) ++h1;
  const double p = 0.5 * 0.7 / (0.5 * 0.1 + 0.5 * 0.7);  // 7/8
  double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::fabs(h1 / static_cast<double>(n) - p) < 3.0 * se);

  // point-mass psi forces the matching component
  st.psi[0][0] << 1.0, 0.0;
  st.psi[1][0] << 0.0, 1.0;
  update_hx(st, rng);
  CHECK((st.Hx.array() == 1).all());
}

TEST_CASE("update_hy_and_y_missing: partitioned-Gaussian worked example") {
  // single component, mean (0,0), cov ((1,.5),(.5,1)), y1 = 1 observed:
  // y2 | y1 ~ Normal(0.5, 0.75)
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1"}}}, {{"y1"}, {"y2"}});
  for (int i = 0; i < n; ++i) {
    ds.Y(i, 0) = 1.0;
    ds.Ry(i, 1) = true;
    ds.Y(i, 1) = std::numeric_limits<double>::quiet_NaN();
  }
  ModelState st = make_state(ds, {1, 1, 1});
  st.B[0].setZero();
  st.Sigma_c[0] << 1.0, 0.5, 0.5, 1.0;
  st.completed_y.col(0).setConstant(1.0);
  Rng rng(107);
  update_hy_and_y_missing(st, ds, rng);
  Moments m, v;
  for (int i = 0; i < n; ++i) {
    m.add(st.completed_y(i, 1));
    v.add(st.completed_y(i, 1) * st.completed_y(i, 1));
  }
  CHECK(std::fabs(m.z(0.5)) < 3.5);
  CHECK(std::fabs(v.z(0.75 + 0.25)) < 3.5);  // E[X^2] = var + mean^2
  CHECK((st.completed_y.col(0).array() == 1.0).all());  // observed untouched
}

TEST_CASE("update_hy_and_y_missing: no missing coordinates leaves Y alone") {
  MixedDataset ds = make_dataset(200, {{"a", {"1", "2"}}}, {{"y1"}, {"y2"}});
  Rng data_rng(108);
  for (int i = 0; i < ds.n; ++i) {
    ds.Y(i, 0) = data_rng.normal();
    ds.Y(i, 1) = data_rng.normal();
  }
  ModelState st = make_state(ds, {2, 2, 3});
  Eigen::MatrixXd before = st.completed_y;
  Rng rng(109);
  update_hy_and_y_missing(st, ds, rng);
  CHECK(st.completed_y == before);
}

TEST_CASE("update_hy_and_y_missing: two-component quadrature oracle") {
  // q=2, Ky=2, y1 observed, y2 missing; component probabilities and the
  // posterior mean of y2 are verified against trapezoid integration of the
  // joint over y2.
  const int n = 100000;
  MixedDataset ds = make_dataset(n, {{"a", {"1"}}}, {{"y1"}, {"y2"}});
  for (int i = 0; i < n; ++i) {
    ds.Y(i, 0) = 0.4;
    ds.Ry(i, 1) = true;
    ds.Y(i, 1) = std::numeric_limits<double>::quiet_NaN();
  }
  ModelState st = make_state(ds, {1, 1, 2});
  set_row_simplex(st.xi_y, st.phi_y, 0, {0.35, 0.65});
  st.B[0].setZero();
  st.B[1] << 1.2, -0.6;  // p* = 1 (single-level variable): mean (1.2, -0.6)
  st.Sigma_c[0] << 1.0, 0.5, 0.5, 1.0;
  st.Sigma_c[1] << 0.8, -0.3, -0.3, 1.5;
  st.completed_y.col(0).setConstant(0.4);

  auto joint = [&](int h, double y2) {
    Eigen::VectorXd y(2), mu(2);
    y << 0.4, y2;
    mu = st.B[h].row(0).transpose();
    return st.phi_y(0, h) * std::exp(log_mvn_density(y, mu, st.Sigma_c[h]));
  };
  // quadrature over y2
  double mass[2] = {0, 0}, first_moment = 0.0;
  const double lo = -12.0, hi = 12.0;
  const int grid = 24000;
  const double step = (hi - lo) / grid;
  for (int g = 0; g <= grid; ++g) {
    double y2 = lo + g * step;
    double wgt = (g == 0 || g == grid) ? 0.5 : 1.0;
    for (int h = 0; h < 2; ++h) {
      double f = joint(h, y2);
      mass[h] += wgt * f * step;
      first_moment += wgt * y2 * f * step;
    }
  }
  double total = mass[0] + mass[1];
  double p1 = mass[1] / total;
  double ey2 = first_moment / total;

  Rng rng(110);
  update_hy_and_y_missing(st, ds, rng);
  long h1 = 0;
  Moments m;
  for (int i = 0; i < n; ++i) {
    if (st.Hy[i] == 1) ++h1;
    m.add(st.completed_y(i, 1));
  }
  double se = std::sqrt(p1 * (1 - p1) / n);
  CHECK(std::fabs(h1 / static_cast<double>(n) - p1) < 3.5 * se);
  CHECK(std::fabs(m.z(ey2)) < 3.5);
}

TEST_CASE("update_psi: conjugate arithmetic and Monte Carlo mean") {
  MixedDataset ds = make_dataset(4, {{"a", {"1", "2"}}}, {});
  ds.X << 1, 1, 1, 2;
  ModelState st = make_state(ds, {1, 1, 1});
  st.completed_x = ds.X;
  st.Hx.setZero();
  // counts (3, 1) with gamma (0.5, 0.5): Dirichlet(3.5, 1.5), mean 0.7
  REQUIRE(st.prior.gamma[0](0) == doctest::Approx(0.5));
  Rng rng(111);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_psi(st, rng);
    m.add(st.psi[0][0](0));
  }
  CHECK(std::fabs(m.z(0.7)) < 3.5);
}

TEST_CASE("update_psi: empty component draws from the prior") {
  MixedDataset ds = make_dataset(4, {{"a", {"1", "2"}}}, {});
  ds.X.setConstant(1);
  ModelState st = make_state(ds, {1, 2, 1});
  st.completed_x = ds.X;
  st.Hx.setZero();  // component 2 empty -> Dirichlet(0.5, 0.5), mean 0.5
  Rng rng(112);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_psi(st, rng);
    m.add(st.psi[1][0](0));
  }
  CHECK(std::fabs(m.z(0.5)) < 3.5);
}

TEST_CASE("update_b: scalar conjugate-normal worked example") {
  // q=1, one record, D=(1), tau=1, sigma^2=1, B0=0, y=2:
  // posterior Normal(1, 1/2)
  MixedDataset ds = make_dataset(1, {{"a", {"1"}}}, {{"y"}});
  ds.Y(0, 0) = 2.0;
  ModelState st = make_state(ds, {1, 1, 1});
  st.completed_y(0, 0) = 2.0;
  st.Hy.setZero();
  st.tau.setConstant(1.0);
  st.B0.setZero();
  st.Sigma_c[0](0, 0) = 1.0;
  Rng rng(113);
  Moments m, v;
  for (int it = 0; it < 100000; ++it) {
    update_b(st, rng);
    m.add(st.B[0](0, 0));
    v.add(st.B[0](0, 0) * st.B[0](0, 0));
  }
  CHECK(std::fabs(m.z(1.0)) < 3.5);
  CHECK(std::fabs(v.z(0.5 + 1.0)) < 3.5);
}

TEST_CASE("update_b: empty component draws from the prior") {
  MixedDataset ds = make_dataset(3, {{"a", {"1"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 1, 2});
  st.Hy.setZero();  // component 2 empty
  st.tau.setConstant(4.0);
  st.B0(0, 0) = -1.5;
  Rng rng(114);
  Moments m, v;
  for (int it = 0; it < 100000; ++it) {
    update_b(st, rng);
    m.add(st.B[1](0, 0));
    v.add(st.B[1](0, 0) * st.B[1](0, 0));
  }
  CHECK(std::fabs(m.z(-1.5)) < 3.5);
  CHECK(std::fabs(v.z(0.25 + 2.25)) < 3.5);  // var 1/tau = 1/4
}

TEST_CASE("update_b: q=2 column conditional matches a grid posterior") {
  // two records, p*=1; the first redraw of column 1 uses the current column 2,
  // so its law is available by gridding the scalar unnormalized posterior
  MixedDataset ds = make_dataset(2, {{"a", {"1"}}}, {{"y1"}, {"y2"}});
  ds.Y << 0.8, -0.2, 1.4, 0.9;
  ModelState st = make_state(ds, {1, 1, 1});
  st.completed_y = ds.Y;
  st.Hy.setZero();
  st.tau << 1.0, 1.0;
  st.B0.setZero();
  st.B[0] << 0.3, -0.4;
  st.Sigma_c[0] << 1.0, 0.6, 0.6, 2.0;
  const ModelState saved = st;

  // conditional of y1 given y2 under N(mu, Sigma): mean mu1 + r (y2 - mu2),
  // variance s11 - r s12 with r = s12 / s22
  const double r = 0.6 / 2.0;
  const double cvar = 1.0 - r * 0.6;
  auto log_post = [&](double b) {
    double lp = -0.5 * b * b;  // prior N(0, 1/tau), tau = 1
    for (int i = 0; i < 2; ++i) {
      double mu2 = saved.B[0](0, 1);
      double cmean = b + r * (ds.Y(i, 1) - mu2);
      double d = ds.Y(i, 0) - cmean;
      lp += -0.5 * d * d / cvar;
    }
    return lp;
  };
  double norm = 0.0, mean = 0.0, second = 0.0;
  const double lo = -6.0, hi = 6.0;
  const int grid = 12000;
  const double step = (hi - lo) / grid;
  for (int g = 0; g <= grid; ++g) {
    double b = lo + g * step;
    double w = ((g == 0 || g == grid) ? 0.5 : 1.0) * std::exp(log_post(b));
    norm += w;
    mean += w * b;
    second += w * b * b;
  }
  mean /= norm;
  second /= norm;

  Rng rng(115);
  Moments m, v;
  for (int it = 0; it < 100000; ++it) {
    st = saved;
    update_b(st, rng);
    m.add(st.B[0](0, 0));
    v.add(st.B[0](0, 0) * st.B[0](0, 0));
  }
  CHECK(std::fabs(m.z(mean)) < 3.5);
  CHECK(std::fabs(v.z(second)) < 3.5);
}

TEST_CASE("update_sigma_components: empty component draws IW(v, Sigma_h)") {
  MixedDataset ds = make_dataset(3, {{"a", {"1"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 1, 2});
  st.Hy.setZero();  // component 2 empty
  st.prior.v = 3.0;  // q=1: IW(3, s) mean s / (3 - 1 - 1) = s
  st.Sigma_h(0, 0) = 0.7;
  Rng rng(116);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_sigma_components(st, rng);
    m.add(st.Sigma_c[1](0, 0));
  }
  CHECK(std::fabs(m.z(0.7)) < 3.5);
}

TEST_CASE("update_sigma_components: residual scatter matches hand arithmetic") {
  MixedDataset ds = make_dataset(2, {{"a", {"1"}}}, {{"y"}});
  ds.Y << 1.0, -2.0;
  ModelState st = make_state(ds, {1, 1, 1});
  st.completed_y = ds.Y;
  st.Hy.setZero();
  st.B[0](0, 0) = 0.5;  // residuals 0.5 and -2.5, scatter 6.5
  st.prior.v = 3.0;
  st.Sigma_h(0, 0) = 1.0;
  // posterior IW(3 + 2, 1 + 6.5), q=1 mean = 7.5 / (5 - 2) = 2.5
  Rng rng(117);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_sigma_components(st, rng);
    m.add(st.Sigma_c[0](0, 0));
  }
  CHECK(std::fabs(m.z(2.5)) < 3.5);
}

TEST_CASE("update_hyper_b0_tau_sigma: B0 scalar conjugate worked example") {
  // Ky=1, tau=1, sigma0^2=10, B entry 2 -> B0 ~ Normal(2/1.1, 1/1.1)
  MixedDataset ds = make_dataset(2, {{"a", {"1"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 1, 1});
  st.B[0](0, 0) = 2.0;
  const ModelState saved = st;
  Rng rng(118);
  Moments m, v;
  for (int it = 0; it < 100000; ++it) {
    st = saved;
    st.tau.setConstant(1.0);
    update_hyper_b0_tau_sigma(st, rng);
    m.add(st.B0(0, 0));
    v.add(st.B0(0, 0) * st.B0(0, 0));
  }
  const double mu = 2.0 / 1.1, var = 1.0 / 1.1;
  CHECK(std::fabs(m.z(mu)) < 3.5);
  CHECK(std::fabs(v.z(var + mu * mu)) < 3.5);
}

TEST_CASE("update_hyper_b0_tau_sigma: tau with zero residual sum") {
  // B[h] column pinned to the freshly drawn B0 is not reachable, so pin both
  // to the same value each iteration: ss = 0 gives Gamma((0.5 + Ky p*)/2, 0.25)
  MixedDataset ds = make_dataset(2, {{"a", {"1"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 1, 1});
  const ModelState saved = st;
  Rng probe(119);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    st = saved;
    // draw B0 first with a throwaway stream, then align B before tau is drawn
    // by re-running with B = B0 so the residual sum is exactly zero
    st.B[0].setZero();
    st.B0.setZero();
    update_hyper_b0_tau_sigma(st, probe);
    m.add(st.tau(0));
  }
  // with B = 0 the freshly drawn B0 ~ N(0, 1/1.1) and ss = B0^2, so
  // tau ~ Gamma(0.75, (0.5 + B0^2)/2); mirror that two-stage draw directly
  Rng check(120);
  Moments oracle;
  for (int it = 0; it < 100000; ++it) {
    double b0 = check.normal(0.0, 1.0 / std::sqrt(1.0 + 0.1));
    double rate = 0.5 * (0.5 + b0 * b0);
    oracle.add(check.gamma(0.75, rate));
  }
  CHECK(std::fabs((m.mean - oracle.mean) /
                  std::sqrt(m.se() * m.se() + oracle.se() * oracle.se())) <
        3.5);
}

TEST_CASE("update_hyper_b0_tau_sigma: hyper-scale Wishart moments") {
  // q=1, Ky=1: Sigma_h ~ W(w + v, 1 / (1/Sigma0 + 1/Sigma_c))
  MixedDataset ds = make_dataset(2, {{"a", {"1"}}}, {{"y"}});
  ModelState st = make_state(ds, {1, 1, 1});
  st.prior.v = 2.0;
  st.prior.w = 3.0;
  st.prior.Sigma0(0, 0) = 0.5;
  st.Sigma_c[0](0, 0) = 2.0;
  Rng rng(121);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_hyper_b0_tau_sigma(st, rng);
    m.add(st.Sigma_h(0, 0));
  }
  const double scale = 1.0 / (1.0 / 0.5 + 1.0 / 2.0);
  const double expect = (3.0 + 1.0 * 2.0) * scale;  // df * scale
  CHECK(std::fabs(m.z(expect)) < 3.5);
}

TEST_CASE("update_sticks: Beta parameters from hand-tallied counts") {
  MixedDataset ds = make_dataset(10, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {2, 2, 2});
  // Z = (0 x 7, 1 x 3); Hx within z=0: (0 x 4, 1 x 3); etc.
  for (int i = 0; i < 10; ++i) st.Z[i] = i < 7 ? 0 : 1;
  for (int i = 0; i < 10; ++i) st.Hx[i] = (i % 2 == 0) ? 0 : 1;
  for (int i = 0; i < 10; ++i) st.Hy[i] = (i < 5) ? 0 : 1;
  st.alpha = 2.0;
  st.beta_x = 1.5;
  st.beta_y = 0.8;
  // hand counts: m = (7, 3); t_x(0, 0) = #(even i < 7) = 4
  Rng rng(122);
  Moments xi_z0, xi_x00;
  for (int it = 0; it < 100000; ++it) {
    update_sticks(st, rng);
    xi_z0.add(st.xi_z(0));
    xi_x00.add(st.xi_x(0, 0));
  }
  // xi_z(0) ~ Beta(1 + 7, alpha + 10 - 7) = Beta(8, 5): mean 8/13
  CHECK(std::fabs(xi_z0.z(8.0 / 13.0)) < 3.5);
  // xi_x(0,0) ~ Beta(1 + 4, beta_x + 7 - 4) = Beta(5, 4.5): mean 10/19
  CHECK(std::fabs(xi_x00.z(5.0 / 9.5)) < 3.5);
  // last sticks stay pinned, simplexes stay normalized
  CHECK(st.xi_z(1) == 1.0);
  CHECK(std::fabs(st.lambda.sum() - 1.0) < 1e-12);
  CHECK(std::fabs(st.phi_x.row(0).sum() - 1.0) < 1e-12);
}

TEST_CASE("update_sticks: single-component concentration") {
  // m = (n, 0): xi_1 ~ Beta(1 + n, alpha); mass concentrates on component 1
  MixedDataset ds = make_dataset(50, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {3, 1, 1});
  st.Z.setZero();
  st.alpha = 1.0;
  Rng rng(123);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_sticks(st, rng);
    m.add(st.xi_z(0));
  }
  CHECK(std::fabs(m.z(51.0 / 52.0)) < 3.5);
}

TEST_CASE("update_concentrations: alpha worked example") {
  // Kz=2, lambda=(0.5,0.5), a0=b0=0.5: alpha ~ Gamma(1.5, 0.5 + log 2)
  MixedDataset ds = make_dataset(10, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {2, 2, 2});
  st.xi_z << 0.5, 1.0;
  st.lambda = stick_break(st.xi_z);
  st.log_lambda_tail = std::log(0.5);
  Rng rng(124);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_concentrations(st, rng);
    m.add(st.alpha);
  }
  CHECK(std::fabs(m.z(1.5 / (0.5 + std::log(2.0)))) < 3.5);
}

TEST_CASE("update_concentrations: beta_x pools stick evidence from all rows") {
  MixedDataset ds = make_dataset(10, {{"a", {"1", "2"}}}, {{"y"}});
  ModelState st = make_state(ds, {2, 3, 2});
  set_row_simplex(st.xi_x, st.phi_x, 0, {0.5, 0.3, 0.2});
  set_row_simplex(st.xi_x, st.phi_x, 1, {0.1, 0.1, 0.8});
  st.log_phi_x_tail[0] = std::log(0.2);
  st.log_phi_x_tail[1] = std::log(0.8);
  Rng rng(125);
  Moments m;
  for (int it = 0; it < 100000; ++it) {
    update_concentrations(st, rng);
    m.add(st.beta_x);
  }
  // shape 0.5 + 2 * (Kx - 1) = 4.5; rate 0.5 - log(0.2) - log(0.8)
  CHECK(std::fabs(m.z(4.5 / (0.5 - std::log(0.2) - std::log(0.8)))) < 3.5);
}

TEST_CASE("gibbs_sweep: determinism and observed-cell preservation") {
  MixedDataset ds = make_dataset(40, {{"a", {"1", "2"}}, {"b", {"1", "2", "3"}}},
                                 {{"y1"}, {"y2"}});
  Rng data_rng(126);
  for (int i = 0; i < ds.n; ++i) {
    ds.X(i, 0) = data_rng.uniform_int(1, 2);
    ds.X(i, 1) = data_rng.uniform_int(1, 3);
    ds.Y(i, 0) = data_rng.normal();
    ds.Y(i, 1) = data_rng.normal();
    if (i % 3 == 0) {
      ds.Rx(i, 0) = true;
      ds.X(i, 0) = 0;
    }
    if (i % 4 == 0) {
      ds.Ry(i, 1) = true;
      ds.Y(i, 1) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  std::uint64_t before = ds.observed_checksum();
  TruncationConfig trunc{3, 4, 3};
  Rng r1(9), r2(9);
  ModelState a = init_state(ds, trunc, PriorConfig::defaults(ds), r1);
  ModelState b = init_state(ds, trunc, PriorConfig::defaults(ds), r2);
  for (int sweep = 0; sweep < 5; ++sweep) {
    SweepStats sa = gibbs_sweep(a, ds, r1);
    SweepStats sb = gibbs_sweep(b, ds, r2);
    CHECK(sa.log_joint == sb.log_joint);
    CHECK(std::isfinite(sa.log_joint));
    a.validate(&ds);
  }
  CHECK(a.Z == b.Z);
  CHECK(a.completed_x == b.completed_x);
  CHECK(a.completed_y == b.completed_y);
  // masks and observed values in ds are never touched
  CHECK(ds.observed_checksum() == before);
  for (int i = 0; i < ds.n; ++i) {
    for (int j = 0; j < ds.p(); ++j)
      if (!ds.Rx(i, j)) CHECK(a.completed_x(i, j) == ds.X(i, j));
    for (int v = 0; v < ds.q(); ++v)
      if (!ds.Ry(i, v)) CHECK(a.completed_y(i, v) == ds.Y(i, v));
  }
}
