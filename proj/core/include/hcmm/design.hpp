#ifndef HCMM_DESIGN_HPP
#define HCMM_DESIGN_HPP

#include <Eigen/Dense>
#include <vector>

#include "hcmm/dataset.hpp"

namespace hcmm {

// Main-effects dummy coding with an intercept. Level 1 of every variable is
// the reference; variable j contributes d_j - 1 indicator columns.
class DesignSpec {
public:
  DesignSpec() = default;
  explicit DesignSpec(const std::vector<CatVariable>& cat);

  int length() const { return p_star_; }

  // Column index of the indicator for (variable j, level >= 2); the intercept
  // is column 0.
  int column_of(int j, int level) const;

  // x holds one 1-based code per variable; throws InputError out of range.
  Eigen::RowVectorXd encode(const Eigen::Ref<const Eigen::RowVectorXi>& x) const;
  void encode_into(const Eigen::Ref<const Eigen::RowVectorXi>& x,
                   Eigen::Ref<Eigen::RowVectorXd> out) const;

private:
  int p_star_ = 1;
  std::vector<int> offsets_;   // first column for variable j's indicators
  std::vector<int> n_levels_;
};

}  // namespace hcmm

#endif
