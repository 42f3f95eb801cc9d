#include "hcmm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "hcmm/error.hpp"

namespace hcmm {

namespace {

constexpr std::uint32_t kMagic = 0x484d4d43;  // "CMMH"
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("truncated checkpoint");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  auto len = get<std::uint64_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw InputError("truncated checkpoint");
  return s;
}

template <typename Matrix>
void put_matrix(std::ostream& os, const Matrix& m) {
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) put(os, m(r, c));
}

template <typename Matrix>
Matrix get_matrix(std::istream& is) {
  auto rows = get<std::int64_t>(is);
  auto cols = get<std::int64_t>(is);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      m(r, c) = get<typename Matrix::Scalar>(is);
  return m;
}

}  // namespace

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  const ModelState& st = ckpt.state;
  put(os, kMagic);
  put(os, kVersion);
  put(os, ckpt.sweep);
  put<std::int32_t>(os, st.trunc.Kz);
  put<std::int32_t>(os, st.trunc.Kx);
  put<std::int32_t>(os, st.trunc.Ky);

  put<std::int32_t>(os, static_cast<std::int32_t>(st.prior.gamma.size()));
  for (const auto& g : st.prior.gamma) put_matrix(os, Eigen::MatrixXd(g));
  put(os, st.prior.v);
  put(os, st.prior.w);
  put_matrix(os, st.prior.Sigma0);
  put(os, st.prior.sigma2_0beta);
  put(os, st.prior.a_alpha);
  put(os, st.prior.b_alpha);
  put(os, st.prior.a_beta_x);
  put(os, st.prior.b_beta_x);
  put(os, st.prior.a_beta_y);
  put(os, st.prior.b_beta_y);
  put(os, st.prior.a_tau);
  put(os, st.prior.b_tau);

  put_matrix(os, Eigen::MatrixXi(st.Z));
  put_matrix(os, Eigen::MatrixXi(st.Hx));
  put_matrix(os, Eigen::MatrixXi(st.Hy));
  put_matrix(os, Eigen::MatrixXd(st.xi_z));
  put_matrix(os, Eigen::MatrixXd(st.lambda));
  put_matrix(os, st.xi_x);
  put_matrix(os, st.phi_x);
  put_matrix(os, st.xi_y);
  put_matrix(os, st.phi_y);
  put(os, st.log_lambda_tail);
  put_matrix(os, Eigen::MatrixXd(st.log_phi_x_tail));
  put_matrix(os, Eigen::MatrixXd(st.log_phi_y_tail));
  for (const auto& component : st.psi)
    for (const auto& simplex : component)
      put_matrix(os, Eigen::MatrixXd(simplex));
  for (const auto& b : st.B) put_matrix(os, b);
  for (const auto& s : st.Sigma_c) put_matrix(os, s);
  put_matrix(os, st.B0);
  put_matrix(os, st.Sigma_h);
  put_matrix(os, Eigen::MatrixXd(st.tau));
  put(os, st.alpha);
  put(os, st.beta_x);
  put(os, st.beta_y);
  put_matrix(os, st.completed_x);
  put_matrix(os, st.completed_y);

  std::ostringstream rng_text;
  ckpt.rng.save(rng_text);
  put_string(os, rng_text.str());
}

Checkpoint load_checkpoint(std::istream& is, const MixedDataset& ds) {
  if (get<std::uint32_t>(is) != kMagic)
    throw InputError("not a checkpoint file");
  if (get<std::uint32_t>(is) != kVersion)
    throw InputError("unsupported checkpoint version");
  Checkpoint ckpt;
  ModelState& st = ckpt.state;
  ckpt.sweep = get<std::uint64_t>(is);
  st.trunc.Kz = get<std::int32_t>(is);
  st.trunc.Kx = get<std::int32_t>(is);
  st.trunc.Ky = get<std::int32_t>(is);

  auto n_gamma = get<std::int32_t>(is);
  for (int j = 0; j < n_gamma; ++j)
    st.prior.gamma.push_back(get_matrix<Eigen::MatrixXd>(is));
  st.prior.v = get<double>(is);
  st.prior.w = get<double>(is);
  st.prior.Sigma0 = get_matrix<Eigen::MatrixXd>(is);
  st.prior.sigma2_0beta = get<double>(is);
  st.prior.a_alpha = get<double>(is);
  st.prior.b_alpha = get<double>(is);
  st.prior.a_beta_x = get<double>(is);
  st.prior.b_beta_x = get<double>(is);
  st.prior.a_beta_y = get<double>(is);
  st.prior.b_beta_y = get<double>(is);
  st.prior.a_tau = get<double>(is);
  st.prior.b_tau = get<double>(is);

  st.Z = get_matrix<Eigen::MatrixXi>(is);
  st.Hx = get_matrix<Eigen::MatrixXi>(is);
  st.Hy = get_matrix<Eigen::MatrixXi>(is);
  st.xi_z = get_matrix<Eigen::MatrixXd>(is);
  st.lambda = get_matrix<Eigen::MatrixXd>(is);
  st.xi_x = get_matrix<Eigen::MatrixXd>(is);
  st.phi_x = get_matrix<Eigen::MatrixXd>(is);
  st.xi_y = get_matrix<Eigen::MatrixXd>(is);
  st.phi_y = get_matrix<Eigen::MatrixXd>(is);
  st.log_lambda_tail = get<double>(is);
  st.log_phi_x_tail = get_matrix<Eigen::MatrixXd>(is);
  st.log_phi_y_tail = get_matrix<Eigen::MatrixXd>(is);
  st.psi.resize(st.trunc.Kx);
  for (int s = 0; s < st.trunc.Kx; ++s) {
    st.psi[s].resize(n_gamma);
    for (int j = 0; j < n_gamma; ++j)
      st.psi[s][j] = get_matrix<Eigen::MatrixXd>(is);
  }
  st.B.resize(st.trunc.Ky);
  for (auto& b : st.B) b = get_matrix<Eigen::MatrixXd>(is);
  st.Sigma_c.resize(st.trunc.Ky);
  for (auto& s : st.Sigma_c) s = get_matrix<Eigen::MatrixXd>(is);
  st.B0 = get_matrix<Eigen::MatrixXd>(is);
  st.Sigma_h = get_matrix<Eigen::MatrixXd>(is);
  st.tau = get_matrix<Eigen::MatrixXd>(is);
  st.alpha = get<double>(is);
  st.beta_x = get<double>(is);
  st.beta_y = get<double>(is);
  st.completed_x = get_matrix<Eigen::MatrixXi>(is);
  st.completed_y = get_matrix<Eigen::MatrixXd>(is);

  std::istringstream rng_text(get_string(is));
  ckpt.rng.load(rng_text);

  if (st.completed_x.rows() != ds.n || st.completed_x.cols() != ds.p() ||
      st.completed_y.cols() != ds.q())
    throw InputError("checkpoint does not match the dataset shape");
  st.design = DesignSpec(ds.cat);
  st.validate(&ds);
  return ckpt;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open checkpoint file for writing: " + path);
  save_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint_file(const std::string& path,
                                const MixedDataset& ds) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open checkpoint file: " + path);
  return load_checkpoint(is, ds);
}

}  // namespace hcmm
