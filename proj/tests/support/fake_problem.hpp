#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcprior/errors.hpp"
#include "mcprior/problem.hpp"

// Synthetic tree problem for exercising the search core without a real
// domain. At depth d there are instance.branching[d] moves, numbered from 0.
// Score is minus the number of positions disagreeing with instance.target,
// so the target path is the unique solved playout.
struct FakeProblem {
  struct Instance {
    std::vector<int> branching;
    std::vector<int> target;  // same length as branching
  };
  struct State {
    const Instance* inst = nullptr;
    std::vector<int> path;
  };
  using Move = int;
  using Solution = std::vector<int>;

  int starve_depth = -1;  // legal_moves comes back empty at this depth
  bool share_codes_across_depths = false;
  bool constant_code = false;  // every move maps to code 7

  State root(const Instance& inst) const { return State{&inst, {}}; }

  bool is_terminal(const State& s) const {
    return s.path.size() == s.inst->branching.size();
  }

  void legal_moves(const State& s, std::vector<Move>& out) const {
    out.clear();
    auto d = s.path.size();
    if (static_cast<int>(d) == starve_depth) return;
    for (int m = 0; m < s.inst->branching[d]; ++m) out.push_back(m);
  }

  void play(State& s, Move m) const { s.path.push_back(m); }

  double score(const State& s) const {
    int bad = 0;
    for (std::size_t i = 0; i < s.path.size(); ++i)
      if (s.path[i] != s.inst->target[i]) ++bad;
    return -bad;
  }

  double solved_score(const Instance&) const { return 0.0; }

  std::uint64_t policy_code(const State& s, Move m) const {
    if (constant_code) return 7;
    if (share_codes_across_depths) return static_cast<std::uint64_t>(m);
    return (static_cast<std::uint64_t>(s.path.size()) << 8) |
           static_cast<std::uint64_t>(m);
  }

  std::uint64_t prior_code(const State& s, Move m) const {
    return policy_code(s, m);
  }

  Move solution_move(const State& s, const Solution& sol) const {
    auto d = s.path.size();
    if (d >= sol.size())
      throw mcprior::DataError("fake: solution shorter than trajectory");
    return sol[d];
  }

  std::optional<std::string> validate_solution(const Instance& inst,
                                               const Solution& sol) const {
    if (sol.size() != inst.branching.size())
      return std::string("fake: wrong solution length");
    for (std::size_t i = 0; i < sol.size(); ++i)
      if (sol[i] < 0 || sol[i] >= inst.branching[i])
        return std::string("fake: value out of range at position " +
                           std::to_string(i));
    return std::nullopt;
  }
};
static_assert(mcprior::SearchProblem<FakeProblem>);
