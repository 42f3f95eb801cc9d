#include "hcmm/design.hpp"

#include "hcmm/error.hpp"

namespace hcmm {

DesignSpec::DesignSpec(const std::vector<CatVariable>& cat) {
  p_star_ = 1;
  for (const auto& var : cat) {
    offsets_.push_back(p_star_);
    n_levels_.push_back(var.n_levels());
    p_star_ += var.n_levels() - 1;
  }
}

int DesignSpec::column_of(int j, int level) const {
  if (j < 0 || j >= static_cast<int>(offsets_.size()) || level < 2 ||
      level > n_levels_[j])
    throw InputError("no design column for variable " + std::to_string(j) +
                     ", level " + std::to_string(level));
  return offsets_[j] + level - 2;
}

void DesignSpec::encode_into(const Eigen::Ref<const Eigen::RowVectorXi>& x,
                             Eigen::Ref<Eigen::RowVectorXd> out) const {
  const int p = static_cast<int>(offsets_.size());
  if (x.size() != p)
    throw InputError("design encode: expected " + std::to_string(p) +
                     " codes, got " + std::to_string(x.size()));
  out.setZero();
  out[0] = 1.0;
  for (int j = 0; j < p; ++j) {
    int code = x[j];
    if (code < 1 || code > n_levels_[j])
      throw InputError("design encode: code " + std::to_string(code) +
                       " out of range for variable " + std::to_string(j));
    if (code > 1) out[offsets_[j] + code - 2] = 1.0;
  }
}

Eigen::RowVectorXd DesignSpec::encode(
    const Eigen::Ref<const Eigen::RowVectorXi>& x) const {
  Eigen::RowVectorXd out(p_star_);
  encode_into(x, out);
  return out;
}

}  // namespace hcmm
