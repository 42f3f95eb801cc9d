#ifndef HCMM_ERROR_HPP
#define HCMM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hcmm {

// Input/contract violations (bad files, bad schema, out-of-range codes).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures inside the sampler (degenerate weights, non-SPD matrices).
class SamplerError : public std::runtime_error {
public:
  explicit SamplerError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hcmm

#endif
