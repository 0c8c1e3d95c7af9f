#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcprior/policy.hpp"
#include "mcprior/problem.hpp"
#include "mcprior/rng.hpp"

namespace mcprior {

// Latin square completion: fill an n x n grid with 1..n so every value
// appears once per row and column. Cells are indexed row-major; 0 = empty.
struct LatinInstance {
  int n = 0;
  std::vector<int> grid;
  double empty_fraction = 0.0;  // generator metadata
};

struct LatinSolution {
  int n = 0;
  std::vector<int> grid;  // complete
};

struct LatinMove {
  int cell = 0;
  int value = 0;  // 1..n
  friend auto operator<=>(const LatinMove&, const LatinMove&) = default;
};

// Bitmask-backed CSP view. dom holds candidate values per cell (bit v-1);
// row_val_cols[r*n+v-1] holds the columns of empty cells in row r that still
// admit v, col_val_rows likewise transposed. Placed masks record values
// already used per line.
struct LatinState {
  int n = 0;
  bool wiped = false;
  int empty_count = 0;
  std::vector<int> grid;
  std::vector<std::uint64_t> dom;
  std::vector<std::uint64_t> row_val_cols;
  std::vector<std::uint64_t> col_val_rows;
  std::vector<std::uint64_t> row_placed;
  std::vector<std::uint64_t> col_placed;
};

// Search plugin. One step assigns one value to the cell picked by
// minimum-remaining-values (ties to the lowest cell index); propagation runs
// forward checking plus the channeling rule "a value with a single admissible
// cell left in a row or column is assigned immediately". A playout ends
// complete (score 0) or in a wipeout (score -remaining).
class LatinProblem {
 public:
  using Instance = LatinInstance;
  using State = LatinState;
  using Move = LatinMove;
  using Solution = LatinSolution;

  State root(const Instance& inst) const;
  bool is_terminal(const State& s) const {
    return s.wiped || s.empty_count == 0;
  }
  void legal_moves(const State& s, std::vector<Move>& out) const;
  void play(State& s, const Move& m) const;
  double score(const State& s) const {
    return s.wiped ? -static_cast<double>(s.empty_count) : 0.0;
  }
  double solved_score(const Instance&) const { return 0.0; }

  MoveCode policy_code(const State&, const Move& m) const {
    return (static_cast<MoveCode>(m.cell) << 6) |
           static_cast<MoveCode>(m.value - 1);
  }
  // Dual code: how many cells in the move's row / column could still take
  // the move's value (the move's own cell included), packed (row, col).
  PriorCode prior_code(const State& s, const Move& m) const;

  Move solution_move(const State& s, const Solution& sol) const;
  std::optional<std::string> validate_solution(const Instance& inst,
                                               const Solution& sol) const;

  // Empty cell with the fewest candidates, lowest index on ties.
  int select_variable(const State& s) const;
};
static_assert(SearchProblem<LatinProblem>);

// Uniform playouts from the empty grid, retried until one completes.
LatinSolution generate_complete_square(int n, Rng& rng);

// Blanks exactly round(fraction * n^2) cells, chosen by seeded shuffle.
InstanceSolutionPair<LatinProblem> make_instance(const LatinSolution& full,
                                                 double fraction, Rng& rng);

struct SweepPoint {
  double fraction = 0.0;
  double median_playouts = 0.0;
};

// Median uniform-sampling playouts to solve, per empty fraction. Censored
// runs count as playout_cap. Fully deterministic in master_seed.
std::vector<SweepPoint> phase_transition_sweep(
    int n, const std::vector<double>& fractions, int instances_per_point,
    std::uint64_t playout_cap, std::uint64_t master_seed, unsigned workers);

// Text format: "n", n grid rows ('.' or 0 = empty), then optionally a line
// "---" and the n solution rows.
void save_latin_pair(const std::string& path, const LatinInstance& inst,
                     const LatinSolution* sol);
struct LoadedLatinPair {
  LatinInstance instance;
  std::optional<LatinSolution> solution;
};
LoadedLatinPair load_latin_pair(const std::string& path);

}  // namespace mcprior
