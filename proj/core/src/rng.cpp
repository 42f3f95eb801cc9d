#include "hcmm/rng.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hcmm/error.hpp"
#include "hcmm/stats.hpp"

namespace hcmm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::fork(std::uint64_t key) const {
  std::mt19937_64 probe = engine_;  // copy; do not disturb the parent stream
  std::uint64_t h = splitmix64(probe() ^ splitmix64(key));
  return Rng(h);
}

double Rng::uniform() {
  // 53-bit mantissa, shifted away from 0 and 1
  std::uint64_t bits = engine_() >> 11;
  double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  return u;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  // rejection-free modulo bias is negligible for the ranges used here,
  // but use Lemire-style rejection anyway for exactness
  std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return lo + static_cast<int>(draw % range);
}

double Rng::normal() {
  // polar Box-Muller without caching the second variate
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw SamplerError("gamma draw requires positive shape and rate");
  if (shape < 1.0) {
    // boost: G(a) = G(a+1) * U^(1/a)
    double u = uniform();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  double x = gamma(a, 1.0);
  double y = gamma(b, 1.0);
  return x / (x + y);
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0))
    throw SamplerError("gamma draw requires positive shape and rate");
  if (shape < 1.0) {
    // boost trick in log space: log G(a) = log G(a+1) + log(U)/a
    double u = uniform();
    return std::log(gamma(shape + 1.0, 1.0)) + std::log(u) / shape;
  }
  return std::log(gamma(shape, 1.0));
}

Rng::BetaLog Rng::beta_log1m(double a, double b) {
  double lx = log_gamma_variate(a);
  double ly = log_gamma_variate(b);
  double hi = std::max(lx, ly), lo = std::min(lx, ly);
  double lse = hi + std::log1p(std::exp(lo - hi));
  double log1m = ly - lse;
  return {-std::expm1(log1m), log1m};
}

Eigen::VectorXd Rng::dirichlet(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd out(alpha.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i], 1.0);
    total += out[i];
  }
  if (total <= 0.0) throw SamplerError("dirichlet draw degenerated to zero");
  out /= total;
  return out;
}

Eigen::VectorXd Rng::normal_vector(int n) {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = normal();
  return out;
}

int Rng::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0.0) || !std::isfinite(total))
    throw SamplerError("categorical draw over degenerate weight vector");
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

int Rng::categorical_log(std::span<const double> log_weights) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) mx = std::max(mx, w);
  if (!std::isfinite(mx))
    throw SamplerError("categorical draw over degenerate log-weight vector");
  std::vector<double> probs(log_weights.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    probs[i] = std::exp(log_weights[i] - mx);
  return categorical(probs);
}

void Rng::save(std::ostream& os) const { os << engine_; }

void Rng::load(std::istream& is) { is >> engine_; }

}  // namespace hcmm
