#ifndef HCMM_CHECKPOINT_HPP
#define HCMM_CHECKPOINT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hcmm/rng.hpp"
#include "hcmm/state.hpp"

namespace hcmm {

// Versioned binary snapshot of a chain: model state, rng state, and the
// sweep counter. Sufficient to resume bit-exactly.
struct Checkpoint {
  std::uint64_t sweep = 0;
  ModelState state;
  Rng rng;
};

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt);
void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt);

// The dataset is needed to rebuild the design layout; throws InputError on a
// format/version mismatch or if the dataset shape disagrees.
Checkpoint load_checkpoint(std::istream& is, const MixedDataset& ds);
Checkpoint load_checkpoint_file(const std::string& path, const MixedDataset& ds);

}  // namespace hcmm

#endif
