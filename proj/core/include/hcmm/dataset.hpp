#ifndef HCMM_DATASET_HPP
#define HCMM_DATASET_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hcmm/csv.hpp"
#include "hcmm/schema.hpp"

namespace hcmm {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct CatVariable {
  std::string name;
  std::vector<std::string> levels;  // code = index + 1
  int n_levels() const { return static_cast<int>(levels.size()); }
};

struct ContVariable {
  std::string name;
};

// Mixed categorical/continuous records with missingness masks.
//
// Codes are 1-based; masked X entries hold 0 and masked Y entries hold NaN.
// Neither sentinel is ever read by a likelihood.
struct MixedDataset {
  int n = 0;
  std::vector<CatVariable> cat;
  std::vector<ContVariable> cont;
  Eigen::MatrixXi X;   // n x p
  Eigen::MatrixXd Y;   // n x q
  BoolMatrix Rx;       // true = missing
  BoolMatrix Ry;

  int p() const { return static_cast<int>(cat.size()); }
  int q() const { return static_cast<int>(cont.size()); }
  int d(int j) const { return cat[j].n_levels(); }

  int cat_index(const std::string& name) const;   // -1 if absent
  int cont_index(const std::string& name) const;

  // Checks code ranges, mask/sentinel agreement and finiteness.
  void validate() const;

  // Order-independent digest of the observed cells, for no-touch checks.
  std::uint64_t observed_checksum() const;
};

// Ingest a parsed table under a schema. Semicontinuous columns load as
// continuous; their decomposition is a separate transform.
MixedDataset load_dataset(const CsvTable& table, const Schema& schema);

}  // namespace hcmm

#endif
