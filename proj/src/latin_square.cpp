#include "mcprior/latin_square.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mcprior/errors.hpp"
#include "mcprior/parallel.hpp"
#include "mcprior/search.hpp"

namespace mcprior {

namespace {

constexpr std::uint64_t bit(int v1) { return 1ULL << v1; }

struct Forced {
  int cell;
  int v1;
};

// Assignment worklists are reused across play() calls; states are
// thread-confined so one scratch list per thread is safe.
thread_local std::vector<Forced> t_queue;

void check_row_value(LatinState& s, int r, int v1, std::vector<Forced>& q) {
  if (s.row_placed[r] & bit(v1)) return;
  std::uint64_t m = s.row_val_cols[r * s.n + v1];
  if (m == 0) {
    s.wiped = true;
    return;
  }
  if ((m & (m - 1)) == 0) q.push_back({r * s.n + std::countr_zero(m), v1});
}

void check_col_value(LatinState& s, int c, int v1, std::vector<Forced>& q) {
  if (s.col_placed[c] & bit(v1)) return;
  std::uint64_t m = s.col_val_rows[c * s.n + v1];
  if (m == 0) {
    s.wiped = true;
    return;
  }
  if ((m & (m - 1)) == 0) q.push_back({std::countr_zero(m) * s.n + c, v1});
}

// Forward checking for one assignment; channeling singletons land on q.
void do_assign(LatinState& s, int cell, int v1, std::vector<Forced>& q) {
  const int n = s.n, r = cell / n, c = cell % n;
  const std::uint64_t old_dom = s.dom[cell];
  s.grid[cell] = v1 + 1;
  s.dom[cell] = bit(v1);
  --s.empty_count;
  s.row_placed[r] |= bit(v1);
  s.col_placed[c] |= bit(v1);

  // The cell stops supporting its other former candidates.
  std::uint64_t others = old_dom & ~bit(v1);
  while (others) {
    int w1 = std::countr_zero(others);
    others &= others - 1;
    s.row_val_cols[r * n + w1] &= ~(1ULL << c);
    s.col_val_rows[c * n + w1] &= ~(1ULL << r);
    check_row_value(s, r, w1, q);
    if (s.wiped) return;
    check_col_value(s, c, w1, q);
    if (s.wiped) return;
  }

  // The value is resolved in this row and column: prune it from peers.
  std::uint64_t cols = s.row_val_cols[r * n + v1] & ~(1ULL << c);
  s.row_val_cols[r * n + v1] = 0;
  while (cols) {
    int c2 = std::countr_zero(cols);
    cols &= cols - 1;
    int p = r * n + c2;
    s.dom[p] &= ~bit(v1);
    if (s.dom[p] == 0) {
      s.wiped = true;
      return;
    }
    s.col_val_rows[c2 * n + v1] &= ~(1ULL << r);
    check_col_value(s, c2, v1, q);
    if (s.wiped) return;
  }
  std::uint64_t rows = s.col_val_rows[c * n + v1] & ~(1ULL << r);
  s.col_val_rows[c * n + v1] = 0;
  while (rows) {
    int r2 = std::countr_zero(rows);
    rows &= rows - 1;
    int p = r2 * n + c;
    s.dom[p] &= ~bit(v1);
    if (s.dom[p] == 0) {
      s.wiped = true;
      return;
    }
    s.row_val_cols[r2 * n + v1] &= ~(1ULL << c);
    check_row_value(s, r2, v1, q);
    if (s.wiped) return;
  }
}

void run_queue(LatinState& s, std::vector<Forced>& q) {
  while (!q.empty() && !s.wiped) {
    Forced f = q.back();
    q.pop_back();
    if (s.grid[f.cell] != 0) {
      // Stale entry; a conflicting earlier assignment is a wipeout.
      if (s.grid[f.cell] != f.v1 + 1) s.wiped = true;
      continue;
    }
    if (!(s.dom[f.cell] & bit(f.v1))) {
      s.wiped = true;
      continue;
    }
    do_assign(s, f.cell, f.v1, q);
  }
  q.clear();
}

}  // namespace

LatinState LatinProblem::root(const Instance& inst) const {
  const int n = inst.n;
  if (n < 1 || n > 64)
    throw DataError("latin square order must be in [1, 64], got " +
                    std::to_string(n));
  if (static_cast<int>(inst.grid.size()) != n * n)
    throw DataError("latin square grid size mismatch");
  const std::uint64_t full = n == 64 ? ~0ULL : bit(n) - 1;

  LatinState s;
  s.n = n;
  s.grid = inst.grid;
  s.dom.assign(n * n, 0);
  s.row_val_cols.assign(n * n, 0);
  s.col_val_rows.assign(n * n, 0);
  s.row_placed.assign(n, 0);
  s.col_placed.assign(n, 0);

  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int v = s.grid[r * n + c];
      if (v == 0) continue;
      if (v < 1 || v > n) throw DataError("latin square cell value out of range");
      if ((s.row_placed[r] & bit(v - 1)) || (s.col_placed[c] & bit(v - 1)))
        throw DataError("latin square instance has a duplicated value in a line");
      s.row_placed[r] |= bit(v - 1);
      s.col_placed[c] |= bit(v - 1);
    }

  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int i = r * n + c;
      if (s.grid[i] != 0) {
        s.dom[i] = bit(s.grid[i] - 1);
        continue;
      }
      ++s.empty_count;
      std::uint64_t d = full & ~(s.row_placed[r] | s.col_placed[c]);
      s.dom[i] = d;
      if (d == 0) s.wiped = true;
      while (d) {
        int v1 = std::countr_zero(d);
        d &= d - 1;
        s.row_val_cols[r * n + v1] |= 1ULL << c;
        s.col_val_rows[c * n + v1] |= 1ULL << r;
      }
    }

  auto& q = t_queue;
  q.clear();
  for (int r = 0; r < n && !s.wiped; ++r)
    for (int v1 = 0; v1 < n && !s.wiped; ++v1) check_row_value(s, r, v1, q);
  for (int c = 0; c < n && !s.wiped; ++c)
    for (int v1 = 0; v1 < n && !s.wiped; ++v1) check_col_value(s, c, v1, q);
  run_queue(s, q);
  return s;
}

int LatinProblem::select_variable(const State& s) const {
  int best = -1, best_size = 65;
  const int nn = s.n * s.n;
  for (int i = 0; i < nn; ++i) {
    if (s.grid[i] != 0) continue;
    int d = std::popcount(s.dom[i]);
    if (d < best_size) {
      best_size = d;
      best = i;
    }
  }
  return best;
}

void LatinProblem::legal_moves(const State& s, std::vector<Move>& out) const {
  out.clear();
  int cell = select_variable(s);
  if (cell < 0) return;
  std::uint64_t d = s.dom[cell];
  while (d) {
    int v1 = std::countr_zero(d);
    d &= d - 1;
    out.push_back({cell, v1 + 1});
  }
}

void LatinProblem::play(State& s, const Move& m) const {
  if (m.value < 1 || m.value > s.n || m.cell < 0 || m.cell >= s.n * s.n ||
      s.grid[m.cell] != 0 || !(s.dom[m.cell] & bit(m.value - 1)))
    throw ContractViolation("latin: play of an illegal move");
  auto& q = t_queue;
  q.clear();
  do_assign(s, m.cell, m.value - 1, q);
  run_queue(s, q);
}

PriorCode LatinProblem::prior_code(const State& s, const Move& m) const {
  const int n = s.n, r = m.cell / n, c = m.cell % n;
  int sr = std::popcount(s.row_val_cols[r * n + m.value - 1]);
  int sc = std::popcount(s.col_val_rows[c * n + m.value - 1]);
  sr = std::clamp(sr, 1, n);
  sc = std::clamp(sc, 1, n);
  return (static_cast<PriorCode>(sr) << 8) | static_cast<PriorCode>(sc);
}

LatinMove LatinProblem::solution_move(const State& s,
                                      const Solution& sol) const {
  int cell = select_variable(s);
  if (cell < 0)
    throw DataError("latin: no empty cell left to read from the solution");
  if (sol.n != s.n || static_cast<int>(sol.grid.size()) != s.n * s.n)
    throw DataError("latin: solution shape mismatch");
  int v = sol.grid[cell];
  if (v < 1 || v > s.n)
    throw DataError("latin: solution has no value for cell " +
                    std::to_string(cell));
  return {cell, v};
}

std::optional<std::string> LatinProblem::validate_solution(
    const Instance& inst, const Solution& sol) const {
  const int n = inst.n;
  if (sol.n != n || static_cast<int>(sol.grid.size()) != n * n)
    return std::string("solution shape does not match the instance");
  std::vector<std::uint64_t> row_seen(n, 0), col_seen(n, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int v = sol.grid[r * n + c];
      if (v < 1 || v > n)
        return "solution cell (" + std::to_string(r) + "," +
               std::to_string(c) + ") is not a value in 1.." +
               std::to_string(n);
      if (row_seen[r] & bit(v - 1))
        return "value " + std::to_string(v) + " duplicated in row " +
               std::to_string(r);
      if (col_seen[c] & bit(v - 1))
        return "value " + std::to_string(v) + " duplicated in column " +
               std::to_string(c);
      row_seen[r] |= bit(v - 1);
      col_seen[c] |= bit(v - 1);
      int given = inst.grid[r * n + c];
      if (given != 0 && given != v)
        return "solution disagrees with the given cell (" + std::to_string(r) +
               "," + std::to_string(c) + ")";
    }
  return std::nullopt;
}

LatinSolution generate_complete_square(int n, Rng& rng) {
  LatinProblem p;
  LatinInstance empty{n, std::vector<int>(n * n, 0), 1.0};
  std::vector<LatinMove> moves;
  for (;;) {
    auto s = p.root(empty);
    while (!p.is_terminal(s)) {
      p.legal_moves(s, moves);
      p.play(s, moves[rng.below(moves.size())]);
    }
    if (!s.wiped) return {n, s.grid};
  }
}

InstanceSolutionPair<LatinProblem> make_instance(const LatinSolution& full,
                                                 double fraction, Rng& rng) {
  const int n = full.n;
  if (fraction < 0.0 || fraction > 1.0)
    throw DataError("empty fraction must be in [0, 1]");
  auto blanks = static_cast<int>(std::llround(fraction * n * n));
  std::vector<int> idx(n * n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n * n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  LatinInstance inst{n, full.grid, fraction};
  for (int i = 0; i < blanks; ++i) inst.grid[idx[i]] = 0;
  return {inst, full};
}

std::vector<SweepPoint> phase_transition_sweep(
    int n, const std::vector<double>& fractions, int instances_per_point,
    std::uint64_t playout_cap, std::uint64_t master_seed, unsigned workers) {
  const std::size_t per = static_cast<std::size_t>(instances_per_point);
  const std::size_t total = fractions.size() * per;
  std::vector<double> used(total, 0.0);
  parallel_for_index(total, workers, [&](std::size_t t) {
    std::uint64_t seed = derive_seed(master_seed, stream::kSweep, t);
    Rng gen_rng(derive_seed(seed, 1));
    Rng search_rng(derive_seed(seed, 2));
    LatinProblem prob;
    auto square = generate_complete_square(n, gen_rng);
    auto pair = make_instance(square, fractions[t / per], gen_rng);
    RunLimits lim;
    lim.stop_score = 0.0;
    lim.max_playouts = playout_cap;
    SearchContext ctx(lim);
    flat_sampling(prob, pair.instance, Policy{}, ZeroBias{}, search_rng, ctx);
    used[t] = static_cast<double>(ctx.playouts());
  });
  std::vector<SweepPoint> out;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    auto lo = used.begin() + static_cast<std::ptrdiff_t>(f * per);
    std::vector<double> slice(lo, lo + static_cast<std::ptrdiff_t>(per));
    std::sort(slice.begin(), slice.end());
    double median = per % 2 ? slice[per / 2]
                            : 0.5 * (slice[per / 2 - 1] + slice[per / 2]);
    out.push_back({fractions[f], median});
  }
  return out;
}

void save_latin_pair(const std::string& path, const LatinInstance& inst,
                     const LatinSolution* sol) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << inst.n << "\n";
  for (int r = 0; r < inst.n; ++r) {
    for (int c = 0; c < inst.n; ++c) {
      if (c) out << ' ';
      int v = inst.grid[r * inst.n + c];
      if (v == 0)
        out << '.';
      else
        out << v;
    }
    out << "\n";
  }
  if (sol) {
    out << "---\n";
    for (int r = 0; r < sol->n; ++r) {
      for (int c = 0; c < sol->n; ++c) {
        if (c) out << ' ';
        out << sol->grid[r * sol->n + c];
      }
      out << "\n";
    }
  }
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

namespace {

int parse_cell(const std::string& tok, int n, const std::string& where) {
  if (tok == "." || tok == "0") return 0;
  try {
    std::size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v < 1 || v > n) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw DataError(where + ": bad cell token '" + tok + "'");
  }
}

}  // namespace

LoadedLatinPair load_latin_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  int lineno = 0;
  std::string line;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    throw DataError(path + ": unexpected end of file while reading " +
                    std::string(what));
  };
  auto where = [&] { return path + ":" + std::to_string(lineno); };

  next_line("the order line");
  int n = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> n) || n < 1 || n > 64)
      throw DataError(where() + ": expected an order in [1, 64]");
  }
  auto read_grid = [&](const char* what) {
    std::vector<int> grid;
    grid.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
      next_line(what);
      std::istringstream ls(line);
      std::string tok;
      for (int c = 0; c < n; ++c) {
        if (!(ls >> tok))
          throw DataError(where() + ": row has fewer than " +
                          std::to_string(n) + " cells");
        grid.push_back(parse_cell(tok, n, where()));
      }
      if (ls >> tok)
        throw DataError(where() + ": row has more than " + std::to_string(n) +
                        " cells");
    }
    return grid;
  };

  LoadedLatinPair out;
  out.instance.n = n;
  out.instance.grid = read_grid("the instance grid");
  int filled = 0;
  for (int v : out.instance.grid)
    if (v != 0) ++filled;
  out.instance.empty_fraction =
      1.0 - static_cast<double>(filled) / static_cast<double>(n * n);

  // Reject inconsistent givens early.
  LatinProblem p;
  (void)p.root(out.instance);

  std::string rest;
  while (std::getline(in, rest)) {
    ++lineno;
    if (rest.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (rest.find("---") == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected '---' before the solution grid");
    LatinSolution sol;
    sol.n = n;
    sol.grid = read_grid("the solution grid");
    if (auto err = p.validate_solution(out.instance, sol))
      throw DataError(path + ": solution invalid: " + *err);
    out.solution = std::move(sol);
    break;
  }
  return out;
}

}  // namespace mcprior
