#ifndef HCMM_MECHANISM_HPP
#define HCMM_MECHANISM_HPP

#include <string>
#include <vector>

#include "hcmm/dataset.hpp"
#include "hcmm/rng.hpp"

namespace hcmm {

// One additive logit term: coef * 1{covariate == level} for a categorical
// covariate, coef * value for a continuous one, or coef * R_driver when
// is_response_indicator is set (driver = a previously drawn target).
struct LogitTerm {
  std::string covariate;
  std::string level;  // empty for continuous covariates
  double coef = 0.0;
  bool is_response_indicator = false;
};

// coef * ((x - center - center_shift * U) / (scale + scale_shift * U))^2
// where U = 1{shift_covariate == shift_level} (no shift when empty).
struct QuadraticTerm {
  std::string covariate;
  double center = 0.0;
  double scale = 1.0;
  double coef = -1.0;
  std::string shift_covariate;
  std::string shift_level;
  double center_shift = 0.0;
  double scale_shift = 0.0;
};

struct MarTarget {
  std::string variable;
  double intercept = 0.0;
  std::vector<LogitTerm> linear;
  std::vector<QuadraticTerm> quadratic;
};

// Block of variables sharing a driver indicator and correlated latent
// shocks: logit = intercept + driver_coef * R_driver + loading * kappa_j,
// kappa equicorrelated within a record.
struct MarBlock {
  std::vector<std::string> variables;
  std::string driver;
  double intercept = -1.0;
  double driver_coef = 0.7;
  double loading = 1.25;
  double correlation = 0.3;
};

struct MarSpec {
  int complete_cases = 0;
  std::vector<std::string> fully_observed;
  std::vector<MarTarget> targets;  // drawn in order
  std::vector<MarBlock> blocks;
};

// Reference constants for an age/sex population with an earnings target, a
// children target and a demographic block.
MarSpec default_mar_preset();

struct MechanismSpec {
  enum class Type { Mar, Mcar, None };
  Type type = Type::None;
  MarSpec mar;
  double mcar_rate = 0.35;
  int mcar_complete_cases = 0;

  static MechanismSpec from_json_file(const std::string& path);
  static MechanismSpec from_json_text(const std::string& text);
};

// Both mechanisms only set masks; data values are never altered, complete
// cases are exempted exactly, and fully observed variables are never masked.
MixedDataset impose_mar(const MixedDataset& sample, const MarSpec& spec,
                        Rng& rng);
MixedDataset impose_mcar(const MixedDataset& sample, double rate,
                         int complete_cases, Rng& rng);
MixedDataset impose_mechanism(const MixedDataset& sample,
                              const MechanismSpec& spec, Rng& rng);

}  // namespace hcmm

#endif
