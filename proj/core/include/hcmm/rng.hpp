#ifndef HCMM_RNG_HPP
#define HCMM_RNG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace hcmm {

// Random number source for one sampler chain.
//
// All variate transforms are implemented here as stateless functions of the
// underlying engine, so the full generator state is the engine state alone
// and a chain can be checkpointed and resumed bit-exactly.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Deterministic child stream; does not advance this stream.
  Rng fork(std::uint64_t key) const;

  double uniform();                       // U(0,1), open at both ends
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);        // inclusive range
  double normal();                        // N(0,1)
  double normal(double mean, double sd);
  double gamma(double shape, double rate);
  // log of a Gamma(shape, 1) draw; exact even for tiny shapes whose draws
  // underflow to zero on the natural scale.
  double log_gamma_variate(double shape);
  double beta(double a, double b);
  // Beta(a, b) draw together with an exact log(1 - value), which stays
  // meaningful when the value itself rounds to 1.
  struct BetaLog {
    double value;
    double log1m;
  };
  BetaLog beta_log1m(double a, double b);
  double chi_squared(double df) { return gamma(0.5 * df, 0.5); }

  Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha);
  Eigen::VectorXd normal_vector(int n);

  // Index in [0, probs.size()) proportional to probs (need not be normalized).
  int categorical(std::span<const double> probs);
  // Same, with unnormalized log weights; max-subtraction for stability.
  int categorical_log(std::span<const double> log_weights);

  void save(std::ostream& os) const;
  void load(std::istream& is);

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace hcmm

#endif
