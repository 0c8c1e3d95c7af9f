#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcprior/policy.hpp"
#include "mcprior/problem.hpp"
#include "mcprior/rng.hpp"

namespace mcprior {

// Empty-grid kakuro: an n x n square filled with distinct values 1..k per
// row and column, where only the n row sums and n column sums are given.
struct KakuroInstance {
  int n = 0;
  int k = 0;  // values range over 1..k
  std::vector<int> row_sums;
  std::vector<int> col_sums;
};

struct KakuroSolution {
  int n = 0;
  std::vector<int> grid;  // complete, row-major
};

struct KakuroMove {
  int cell = 0;
  int value = 0;  // 1..k
  friend auto operator<=>(const KakuroMove&, const KakuroMove&) = default;
};

// Forward-checking CSP view, no channeling. dom holds candidate values per
// empty cell (bit v-1); used masks record values taken per line; rem is the
// hint minus the values assigned so far; line_empty counts open cells.
struct KakuroState {
  int n = 0;
  int k = 0;
  bool wiped = false;
  int empty_count = 0;
  std::vector<int> grid;
  std::vector<std::uint64_t> dom;
  std::vector<std::uint64_t> row_used;
  std::vector<std::uint64_t> col_used;
  std::vector<int> row_rem;
  std::vector<int> col_rem;
  std::vector<int> row_empty;
  std::vector<int> col_empty;
};

// Search plugin. One step assigns one value to the cell picked by
// minimum-remaining-values (ties to the lowest cell index). Forward checking
// removes the value from line peers and, when use_sum_bounds is on, also
// removes any peer value that cannot meet the remaining line sum given the
// minimum and maximum sums achievable by the other open cells with distinct
// unused values. A domain emptying is a wipeout and ends the playout.
class KakuroProblem {
 public:
  using Instance = KakuroInstance;
  using State = KakuroState;
  using Move = KakuroMove;
  using Solution = KakuroSolution;

  // Turning the min/max sum rule off leaves plain forward checking on the
  // all-different constraint. Playout-reachable solvability must not depend
  // on it. Prior corpora are replayed and guided searches run in this
  // weaker mode: it sights sum-breaking values instead of pruning them, so
  // their statistics (and not hand-coded rules) are what a learned bias
  // carries into the search.
  bool use_sum_bounds = true;

  State root(const Instance& inst) const;
  bool is_terminal(const State& s) const {
    return s.wiped || s.empty_count == 0;
  }
  void legal_moves(const State& s, std::vector<Move>& out) const;
  void play(State& s, const Move& m) const;
  // Incomplete: minus the unassigned cells. Complete: the number of lines
  // whose values reach the hint exactly (rem == 0), at most 2n.
  double score(const State& s) const;
  double solved_score(const Instance& inst) const { return 2.0 * inst.n; }

  MoveCode policy_code(const State&, const Move& m) const {
    return (static_cast<MoveCode>(m.cell) << 6) |
           static_cast<MoveCode>(m.value - 1);
  }
  // Packs the candidate value, its occurrence counts among the assigned
  // cells of the move's row and column, the two line hints (each capped at
  // k(k+1)/2), and the two remaining sums as offsets from the value,
  // saturated to [-1, 8]. The hints pin the line context, so a value no
  // line with these hints ever takes replays to frequency zero; the offsets
  // separate overshooting (-1), exactly completing (0) and leaving room.
  PriorCode prior_code(const State& s, const Move& m) const;

  Move solution_move(const State& s, const Solution& sol) const;
  std::optional<std::string> validate_solution(const Instance& inst,
                                               const Solution& sol) const;

  // Empty cell with the fewest candidates, lowest index on ties.
  int select_variable(const State& s) const;
};
static_assert(SearchProblem<KakuroProblem>);

// Samples a line-distinct square by uniform playouts (retried on the rare
// wipeout), computes the line sums as hints and keeps the square as the
// solution. Requires 1 <= n <= k <= 64.
InstanceSolutionPair<KakuroProblem> generate_kakuro(int n, int k, Rng& rng);

// Text format: line 1 "n k", line 2 the n column sums, line 3 the n row
// sums, then optionally "---" and the n solution rows.
void save_kakuro_pair(const std::string& path, const KakuroInstance& inst,
                      const KakuroSolution* sol);
struct LoadedKakuroPair {
  KakuroInstance instance;
  std::optional<KakuroSolution> solution;
};
LoadedKakuroPair load_kakuro_pair(const std::string& path);

}  // namespace mcprior
