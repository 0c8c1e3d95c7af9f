#pragma once

#include <algorithm>
#include <concepts>
#include <optional>
#include <string>
#include <vector>

#include "mcprior/errors.hpp"
#include "mcprior/policy.hpp"

namespace mcprior {

// Contract every domain plugin implements.
//
// States are value types mutated in place by play(); trajectories are
// re-walked from a fresh root() whenever they need to be revisited, so no
// undo machinery is required. legal_moves() must be non-empty on any
// non-terminal state, play() deterministic, and both code functions pure in
// (state, move). policy_code and prior_code may key moves differently.
template <typename P>
concept SearchProblem =
    requires(const P& p, const typename P::Instance& inst,
             typename P::State& st, const typename P::State& cst,
             const typename P::Move& mv, const typename P::Solution& sol,
             std::vector<typename P::Move>& out) {
      { p.root(inst) } -> std::same_as<typename P::State>;
      { p.is_terminal(cst) } -> std::convertible_to<bool>;
      { p.legal_moves(cst, out) };
      { p.play(st, mv) };
      { p.score(cst) } -> std::convertible_to<double>;
      { p.solved_score(inst) } -> std::convertible_to<double>;
      { p.policy_code(cst, mv) } -> std::convertible_to<MoveCode>;
      { p.prior_code(cst, mv) } -> std::convertible_to<PriorCode>;
      { p.solution_move(cst, sol) } -> std::same_as<typename P::Move>;
      { p.validate_solution(inst, sol) } -> std::same_as<std::optional<std::string>>;
      { mv == mv } -> std::convertible_to<bool>;
    };

template <typename B>
concept BiasSource = requires(const B& b, PriorCode c) {
  { b(c) } -> std::convertible_to<BiasTerm>;
};

// An instance bundled with a known complete assignment reaching the solved
// score; the raw material replay consumes.
template <typename P>
struct InstanceSolutionPair {
  typename P::Instance instance;
  typename P::Solution solution;
};

// Replays the solution trajectory and reports the first violated constraint,
// or nullopt when the pair is sound.
template <SearchProblem P>
std::optional<std::string> validate_pair(const P& p,
                                         const typename P::Instance& inst,
                                         const typename P::Solution& sol) {
  if (auto v = p.validate_solution(inst, sol)) return v;

  auto state = p.root(inst);
  std::vector<typename P::Move> moves;
  std::size_t step = 0;
  while (!p.is_terminal(state)) {
    p.legal_moves(state, moves);
    if (moves.empty())
      return "step " + std::to_string(step) +
             ": non-terminal state has no legal moves";
    std::optional<typename P::Move> chosen;
    try {
      chosen = p.solution_move(state, sol);
    } catch (const DataError& e) {
      return "step " + std::to_string(step) + ": " + e.what();
    }
    if (std::find(moves.begin(), moves.end(), *chosen) == moves.end())
      return "step " + std::to_string(step) +
             ": solution move is not legal in this state";
    p.play(state, *chosen);
    ++step;
  }
  if (p.score(state) != p.solved_score(inst))
    return "trajectory terminates without reaching the solved score";
  return std::nullopt;
}

template <SearchProblem P>
std::optional<std::string> validate_pair(const P& p,
                                         const InstanceSolutionPair<P>& pair) {
  return validate_pair(p, pair.instance, pair.solution);
}

}  // namespace mcprior
