#pragma once

#include <stdexcept>

namespace mcprior {

// A caller or a SearchProblem implementation broke a documented contract.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed or inconsistent input data: files, corpora, training pairs.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The folding oracle (or another external engine) failed or misbehaved.
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mcprior
