#ifndef HCMM_TRANSFORMS_HPP
#define HCMM_TRANSFORMS_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "hcmm/dataset.hpp"

namespace hcmm {

using BoolVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Per continuous column: observed-entry mean and sd used to map to the
// modeling scale and back.
struct StandardizationRecord {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  double to_model_scale(int v, double value) const {
    return (value - mean[v]) / sd[v];
  }
  double to_original_scale(int v, double value) const {
    return value * sd[v] + mean[v];
  }
};

// Observed entries of each continuous column mapped to mean 0, sd 1
// (statistics computed on observed entries only). Throws InputError on a
// constant observed column, naming it.
std::pair<MixedDataset, StandardizationRecord> standardize(
    const MixedDataset& ds);

// Semicontinuous decomposition: indicator 1 = zero, 2 = nonzero; the
// continuous copy is masked wherever the indicator is 1 or the source is
// missing.
struct SemicontinuousParts {
  Eigen::VectorXi indicator;
  BoolVector indicator_missing;
  Eigen::VectorXd continuous;
  BoolVector continuous_missing;
};
SemicontinuousParts decompose_semicontinuous(const Eigen::VectorXd& values,
                                             const BoolVector& missing);

// Recomposition rule: indicator-as-{0,1} times the continuous draw.
inline double recompose_semicontinuous(int indicator, double continuous) {
  return indicator == 1 ? 0.0 : continuous;
}

// The modeling view of a raw table: semicontinuous columns decomposed into an
// indicator variable (appended to the categorical block) plus a masked
// continuous part, and all continuous columns standardized. Maps completed
// model-space matrices back to the original layout, labels and scale.
class ModelFrame {
public:
  static ModelFrame build(const CsvTable& table, const Schema& schema);

  const Schema& schema() const { return schema_; }
  const MixedDataset& model_data() const { return model_; }
  const StandardizationRecord& standardization() const { return std_; }

  // Original-scale completed values per continuous variable: semicontinuous
  // parts recomposed with their indicator, and observed cells carried through
  // bit-exactly from the source data.
  Eigen::MatrixXd completed_values(const Eigen::MatrixXi& completed_x,
                                   const Eigen::MatrixXd& completed_y) const;

  CsvTable to_output_table(const Eigen::MatrixXi& completed_x,
                           const Eigen::MatrixXd& completed_y) const;

private:
  struct ColumnMap {
    ColumnKind kind = ColumnKind::Continuous;
    int cat_j = -1;   // categorical source
    int cont_v = -1;  // continuous source
    int ind_j = -1;   // semicontinuous indicator variable
  };

  Schema schema_;
  MixedDataset model_;
  StandardizationRecord std_;
  std::vector<ColumnMap> map_;
  Eigen::MatrixXd source_y_;       // original-scale values, pre-decomposition
  BoolMatrix source_y_missing_;    // source missingness, pre-decomposition
};

}  // namespace hcmm

#endif
