#include "hcmm/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hcmm/dataset.hpp"
#include "hcmm/error.hpp"
#include "hcmm/stats.hpp"

namespace hcmm {

using nlohmann::json;

void TruncationConfig::validate() const {
  if (Kz < 1 || Kx < 1 || Ky < 1)
    throw InputError("truncation levels must all be >= 1");
}

PriorConfig PriorConfig::defaults(const MixedDataset& ds) {
  PriorConfig prior;
  const int q = ds.q();
  for (int j = 0; j < ds.p(); ++j)
    prior.gamma.push_back(
        Eigen::VectorXd::Constant(ds.d(j), 1.0 / ds.d(j)));
  prior.v = q + 1;
  prior.w = q + 2;
  prior.Sigma0 = Eigen::MatrixXd::Identity(q, q) / (q + 1.0);
  return prior;
}

void PriorConfig::validate(int p, int q) const {
  if (static_cast<int>(gamma.size()) != p)
    throw InputError("prior gamma vectors do not match categorical count");
  for (const auto& g : gamma)
    if (g.size() < 1 || (g.array() <= 0.0).any())
      throw InputError("prior gamma entries must be positive");
  if (!(v > q - 1)) throw InputError("inverse-Wishart df v must exceed q - 1");
  if (!(w > q - 1)) throw InputError("Wishart df w must exceed q - 1");
  if (Sigma0.rows() != q || Sigma0.cols() != q)
    throw InputError("Sigma0 dimension does not match q");
  if (q > 0) cholesky_spd(Sigma0, "Sigma0");
  for (double s : {sigma2_0beta, a_alpha, b_alpha, a_beta_x, b_beta_x,
                   a_beta_y, b_beta_y, a_tau, b_tau})
    if (!(s > 0.0)) throw InputError("prior scalars must be positive");
}

void RunConfig::validate() const {
  if (iterations < 1) throw InputError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw InputError("burn-in must be nonnegative and below total iterations");
  if (thin < 1) throw InputError("thin interval must be positive");
  if (m_datasets < 2) throw InputError("M must be at least 2 for pooling");
  if (static_cast<long long>(m_datasets) * thin > iterations - burn_in)
    throw InputError("M * thin exceeds the post-burn-in span");
  if (chains < 1) throw InputError("chain count must be positive");
  trunc.validate();
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config parse failure: ") + e.what());
  }
  RunConfig cfg;
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.burn_in = j.value("burn_in", cfg.burn_in);
  cfg.thin = j.value("thin", cfg.thin);
  cfg.m_datasets = j.value("m", cfg.m_datasets);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.chains = j.value("chains", cfg.chains);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  cfg.glom = j.value("glom", cfg.glom);
  if (j.contains("truncation")) {
    const auto& t = j["truncation"];
    cfg.trunc.Kz = t.value("Kz", cfg.trunc.Kz);
    cfg.trunc.Kx = t.value("Kx", cfg.trunc.Kx);
    cfg.trunc.Ky = t.value("Ky", cfg.trunc.Ky);
  }
  if (cfg.glom) cfg.trunc.Kz = cfg.trunc.Ky = 1;
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["iterations"] = iterations;
  j["burn_in"] = burn_in;
  j["thin"] = thin;
  j["m"] = m_datasets;
  j["seed"] = seed;
  j["chains"] = chains;
  j["checkpoint_every"] = checkpoint_every;
  j["glom"] = glom;
  j["truncation"] = {{"Kz", trunc.Kz}, {"Kx", trunc.Kx}, {"Ky", trunc.Ky}};
  return j.dump(2);
}

}  // namespace hcmm
