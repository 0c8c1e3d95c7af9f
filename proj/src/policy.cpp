#include "mcprior/policy.hpp"

#include <cmath>

#include "mcprior/errors.hpp"

namespace mcprior {

bool Policy::all_finite() const {
  for (const auto& [code, w] : table_) {
    (void)code;
    if (!std::isfinite(w)) return false;
  }
  return true;
}

void softmax_distribution(const std::vector<SoftmaxEntry>& entries,
                          std::vector<double>& out) {
  if (entries.empty())
    throw ContractViolation("softmax_distribution: empty entry list");

  const std::size_t n = entries.size();
  out.assign(n, 0.0);

  double max_exp = 0.0;
  double min_exp = 0.0;
  bool any_included = false;
  for (const auto& e : entries) {
    if (e.bias.excluded) continue;
    const double x = e.weight + e.bias.value;
    if (!any_included) {
      max_exp = min_exp = x;
      any_included = true;
    } else {
      if (x > max_exp) max_exp = x;
      if (x < min_exp) min_exp = x;
    }
  }

  if (!any_included) {
    // Every move is hard-excluded; fall back to uniform so the caller can
    // still make progress.
    const double u = 1.0 / static_cast<double>(n);
    out.assign(n, u);
    return;
  }

  double z = 0.0;
  if (max_exp == min_exp) {
    // All included exponents equal: exp(x - max) is exactly 1, skip exp().
    for (std::size_t i = 0; i < n; ++i) {
      if (entries[i].bias.excluded) continue;
      out[i] = 1.0;
      z += 1.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (entries[i].bias.excluded) continue;
      out[i] = std::exp(entries[i].weight + entries[i].bias.value - max_exp);
      z += out[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

std::vector<double> softmax_distribution(const std::vector<SoftmaxEntry>& entries) {
  std::vector<double> out;
  softmax_distribution(entries, out);
  return out;
}

}  // namespace mcprior
