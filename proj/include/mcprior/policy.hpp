#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace mcprior {

// Opaque key identifying a move for policy-weight lookup.
using MoveCode = std::uint64_t;
// Opaque key identifying a move for bias lookup. May be keyed differently
// from MoveCode; the two tables are independent.
using PriorCode = std::uint64_t;

// Playout policy: move code -> log-space weight. Absent codes read as 0,
// so a default-constructed Policy is the uniform policy.
class Policy {
 public:
  double get(MoveCode code) const {
    auto it = table_.find(code);
    return it == table_.end() ? 0.0 : it->second;
  }
  void add(MoveCode code, double delta) { table_[code] += delta; }
  void set(MoveCode code, double weight) { table_[code] = weight; }
  std::size_t size() const { return table_.size(); }
  bool all_finite() const;

  const std::unordered_map<MoveCode, double>& entries() const { return table_; }

 private:
  std::unordered_map<MoveCode, double> table_;
};

// Additive term in the softmax exponent. `excluded` stands in for -inf:
// the sampler assigns probability 0 without ever feeding an infinity to exp().
struct BiasTerm {
  double value = 0.0;
  bool excluded = false;
};

// Bias source that turns the search into plain NRPA.
struct ZeroBias {
  BiasTerm operator()(PriorCode) const { return {}; }
};

struct SoftmaxEntry {
  double weight = 0.0;
  BiasTerm bias;
};

// p_i proportional to exp(weight_i + bias_i), computed after subtracting the
// max exponent. Excluded entries get probability 0; if every entry is
// excluded the result degenerates to uniform so a playout can still move.
// Throws ContractViolation on an empty entry list.
void softmax_distribution(const std::vector<SoftmaxEntry>& entries,
                          std::vector<double>& out);
std::vector<double> softmax_distribution(const std::vector<SoftmaxEntry>& entries);

}  // namespace mcprior
