#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcprior/errors.hpp"
#include "mcprior/policy.hpp"
#include "mcprior/problem.hpp"
#include "mcprior/rng.hpp"

namespace mcprior {

template <typename P>
struct PlayoutResult {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<typename P::Move> moves;
};

struct SearchParams {
  int level = 2;
  int iterations = 100;  // per level
  double alpha = 1.0;
};

// All zero/unset values mean "no limit of that kind".
struct RunLimits {
  std::optional<double> stop_score;
  std::uint64_t max_playouts = 0;
  double time_limit_s = 0.0;
};

class SearchContext {
 public:
  explicit SearchContext(RunLimits limits = {})
      : limits_(limits), start_(std::chrono::steady_clock::now()) {}

  void note_playout(double score) {
    ++playouts_;
    if (score_log) score_log->push_back(score);
    if (score > best_) best_ = score;
    if (limits_.stop_score && !solved_at_ && score >= *limits_.stop_score) {
      solved_at_ = playouts_;
      solved_elapsed_s_ = elapsed_s();
    }
  }

  // Optional sink receiving every playout score in order.
  std::vector<double>* score_log = nullptr;

  bool should_stop() const {
    if (solved_at_) return true;
    if (limits_.max_playouts && playouts_ >= limits_.max_playouts) return true;
    if (limits_.time_limit_s > 0.0 && elapsed_s() >= limits_.time_limit_s)
      return true;
    return false;
  }

  bool has_any_limit() const {
    return limits_.stop_score || limits_.max_playouts ||
           limits_.time_limit_s > 0.0;
  }

  std::uint64_t playouts() const { return playouts_; }
  std::optional<std::uint64_t> solved_at() const { return solved_at_; }
  std::optional<double> solved_elapsed_s() const { return solved_elapsed_s_; }
  bool solved() const { return solved_at_.has_value(); }
  double best_score() const { return best_; }

  double elapsed_s() const {
    auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start_).count();
  }

 private:
  RunLimits limits_;
  std::uint64_t playouts_ = 0;
  std::optional<std::uint64_t> solved_at_;
  std::optional<double> solved_elapsed_s_;
  double best_ = -std::numeric_limits<double>::infinity();
  std::chrono::steady_clock::time_point start_;
};

// One uniform draw, cumulative walk. probs must sum to ~1.
inline std::size_t sample_categorical(const std::vector<double>& probs,
                                      Rng& rng) {
  if (probs.empty())
    throw ContractViolation("sample_categorical: empty distribution");
  double u = rng.uniform();
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return i;
  }
  return probs.size() - 1;
}

// Runs one playout from the root, sampling every step from the softmax of
// weight+bias over the legal moves. Scratch buffers are reused across steps.
template <SearchProblem P, BiasSource B>
PlayoutResult<P> playout(const P& problem, const typename P::Instance& inst,
                         const Policy& policy, const B& bias, Rng& rng,
                         SearchContext& ctx) {
  PlayoutResult<P> result;
  auto state = problem.root(inst);
  std::vector<typename P::Move> moves;
  std::vector<SoftmaxEntry> entries;
  std::vector<double> probs;
  while (!problem.is_terminal(state)) {
    problem.legal_moves(state, moves);
    if (moves.empty())
      throw ContractViolation("playout: non-terminal state has no legal moves");
    entries.clear();
    for (const auto& m : moves)
      entries.push_back({policy.get(problem.policy_code(state, m)),
                         bias(problem.prior_code(state, m))});
    softmax_distribution(entries, probs);
    std::size_t idx = sample_categorical(probs, rng);
    result.moves.push_back(moves[idx]);
    problem.play(state, moves[idx]);
  }
  result.score = problem.score(state);
  ctx.note_playout(result.score);
  return result;
}

// Shifts the policy toward the given sequence. Gradient probabilities are
// computed from the pre-adapt weights throughout; the updated table is
// committed only at the end.
template <SearchProblem P, BiasSource B>
void adapt(const P& problem, const typename P::Instance& inst, Policy& policy,
           const std::vector<typename P::Move>& sequence, double alpha,
           const B& bias) {
  Policy updated = policy;
  auto state = problem.root(inst);
  std::vector<typename P::Move> moves;
  std::vector<SoftmaxEntry> entries;
  std::vector<double> probs;
  for (std::size_t step = 0; step < sequence.size(); ++step) {
    const auto& b = sequence[step];
    if (problem.is_terminal(state))
      throw ContractViolation("adapt: sequence continues past a terminal state (step " +
                              std::to_string(step) + ")");
    problem.legal_moves(state, moves);
    bool found = false;
    for (const auto& m : moves)
      if (m == b) {
        found = true;
        break;
      }
    if (!found)
      throw ContractViolation("adapt: sequence move is not legal (step " +
                              std::to_string(step) + ")");
    entries.clear();
    for (const auto& m : moves)
      entries.push_back({policy.get(problem.policy_code(state, m)),
                         bias(problem.prior_code(state, m))});
    softmax_distribution(entries, probs);
    // One fused add per move keeps the reinforced move's weight from ever
    // dipping below its old value by rounding: alpha * (1 - p) >= 0 exactly.
    for (std::size_t i = 0; i < moves.size(); ++i) {
      double target = moves[i] == b ? 1.0 : 0.0;
      updated.add(problem.policy_code(state, moves[i]),
                  alpha * (target - probs[i]));
    }
    problem.play(state, b);
  }
  policy = std::move(updated);
}

// Nested search. Each level keeps a local copy of the incoming policy and
// adapts it toward the best sequence seen so far; ties go to the newest
// sequence. With a zero bias this is plain nested rollout policy adaptation.
template <SearchProblem P, BiasSource B>
PlayoutResult<P> gnrpa(const P& problem, const typename P::Instance& inst,
                       int level, const SearchParams& params,
                       const Policy& policy, const B& bias, Rng& rng,
                       SearchContext& ctx) {
  if (level <= 0) return playout(problem, inst, policy, bias, rng, ctx);
  PlayoutResult<P> best;
  Policy local = policy;
  for (int it = 0; it < params.iterations; ++it) {
    if (ctx.should_stop()) break;
    auto r = gnrpa(problem, inst, level - 1, params, local, bias, rng, ctx);
    if (r.score >= best.score) best = std::move(r);
    if (ctx.should_stop()) break;
    adapt(problem, inst, local, best.moves, params.alpha, bias);
  }
  return best;
}

// Repeated independent playouts from a fixed policy; no adaptation.
template <SearchProblem P, BiasSource B>
PlayoutResult<P> flat_sampling(const P& problem,
                               const typename P::Instance& inst,
                               const Policy& policy, const B& bias, Rng& rng,
                               SearchContext& ctx) {
  if (!ctx.has_any_limit())
    throw ContractViolation("flat_sampling: needs a stop score, playout cap, or time limit");
  PlayoutResult<P> best;
  while (!ctx.should_stop()) {
    auto r = playout(problem, inst, policy, bias, rng, ctx);
    if (r.score >= best.score) best = std::move(r);
  }
  return best;
}

// Largest n with n^level <= budget, computed exactly.
inline int iterations_for_budget(std::uint64_t budget, int level) {
  if (level <= 0) throw ContractViolation("iterations_for_budget: level must be positive");
  if (budget == 0) return 0;
  auto pow_fits = [&](std::uint64_t n) {
    std::uint64_t acc = 1;
    for (int i = 0; i < level; ++i) {
      if (n != 0 && acc > budget / n) return false;
      acc *= n;
    }
    return acc <= budget;
  };
  std::uint64_t n = static_cast<std::uint64_t>(
      std::llround(std::pow(static_cast<double>(budget), 1.0 / level)));
  while (n > 1 && !pow_fits(n)) --n;
  while (pow_fits(n + 1)) ++n;
  return static_cast<int>(n);
}

}  // namespace mcprior
