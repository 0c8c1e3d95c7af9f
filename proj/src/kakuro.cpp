#include "mcprior/kakuro.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "mcprior/errors.hpp"

namespace mcprior {

namespace {

constexpr std::uint64_t bit(int v) { return 1ULL << (v - 1); }

constexpr std::uint64_t full_mask(int k) {
  return k == 64 ? ~0ULL : (1ULL << k) - 1;
}

// Values w from avail that could start a completion of the line: S - w must
// lie between the smallest and the largest sum of m - 1 distinct other
// available values. m is the number of open cells, S the remaining sum.
std::uint64_t feasible_mask(std::uint64_t avail, int m, int S) {
  int vals[64];
  int c = 0;
  for (std::uint64_t a = avail; a; a &= a - 1)
    vals[c++] = std::countr_zero(a) + 1;
  if (m < 1 || m > c) return 0;
  int pre[65], suf[65];
  pre[0] = suf[0] = 0;
  for (int i = 0; i < c; ++i) {
    pre[i + 1] = pre[i] + vals[i];
    suf[i + 1] = suf[i] + vals[c - 1 - i];
  }
  std::uint64_t out = 0;
  for (int i = 0; i < c; ++i) {
    const int w = vals[i];
    const int lo = i < m - 1 ? pre[m] - w : pre[m - 1];
    const int hi = i >= c - (m - 1) ? suf[m] - w : suf[m - 1];
    if (S - w >= lo && S - w <= hi) out |= bit(w);
  }
  return out;
}

// Intersects every open cell of a line with keep; cells are visited at
// stride step starting from base (a row or a column).
void prune_line(KakuroState& s, int base, int step, std::uint64_t keep) {
  for (int j = 0; j < s.n; ++j) {
    const int p = base + j * step;
    if (s.grid[p] != 0) continue;
    s.dom[p] &= keep;
    if (s.dom[p] == 0) {
      s.wiped = true;
      return;
    }
  }
}

// One assignment plus forward checking on the move's row and column. With
// bounds on, peers keep only sum-feasible values; without, they only lose
// the assigned value.
void do_assign(KakuroState& s, int cell, int v, bool bounds) {
  const int n = s.n, r = cell / n, c = cell % n;
  const std::uint64_t full = full_mask(s.k);
  s.grid[cell] = v;
  s.dom[cell] = bit(v);
  --s.empty_count;
  s.row_used[r] |= bit(v);
  s.col_used[c] |= bit(v);
  s.row_rem[r] -= v;
  s.col_rem[c] -= v;
  --s.row_empty[r];
  --s.col_empty[c];

  if (s.row_empty[r] > 0) {
    const std::uint64_t avail = ~s.row_used[r] & full;
    prune_line(s, r * n, 1,
               bounds ? feasible_mask(avail, s.row_empty[r], s.row_rem[r])
                      : avail);
    if (s.wiped) return;
  }
  if (s.col_empty[c] > 0) {
    const std::uint64_t avail = ~s.col_used[c] & full;
    prune_line(s, c, n,
               bounds ? feasible_mask(avail, s.col_empty[c], s.col_rem[c])
                      : avail);
  }
}

}  // namespace

KakuroState KakuroProblem::root(const Instance& inst) const {
  const int n = inst.n;
  if (n < 1 || inst.k < n || inst.k > 64)
    throw DataError("kakuro instance needs 1 <= n <= k <= 64, got n=" +
                    std::to_string(n) + " k=" + std::to_string(inst.k));
  if (static_cast<int>(inst.row_sums.size()) != n ||
      static_cast<int>(inst.col_sums.size()) != n)
    throw DataError("kakuro instance must carry n row sums and n column sums");

  KakuroState s;
  s.n = n;
  s.k = inst.k;
  s.empty_count = n * n;
  s.grid.assign(static_cast<std::size_t>(n) * n, 0);
  s.dom.assign(static_cast<std::size_t>(n) * n, full_mask(inst.k));
  s.row_used.assign(n, 0);
  s.col_used.assign(n, 0);
  s.row_rem = inst.row_sums;
  s.col_rem = inst.col_sums;
  s.row_empty.assign(n, n);
  s.col_empty.assign(n, n);

  if (use_sum_bounds) {
    const std::uint64_t full = full_mask(inst.k);
    for (int r = 0; r < n && !s.wiped; ++r)
      prune_line(s, r * n, 1, feasible_mask(full, n, s.row_rem[r]));
    for (int c = 0; c < n && !s.wiped; ++c)
      prune_line(s, c, n, feasible_mask(full, n, s.col_rem[c]));
  }
  return s;
}

int KakuroProblem::select_variable(const State& s) const {
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

void KakuroProblem::legal_moves(const State& s, std::vector<Move>& out) const {
  out.clear();
  if (s.wiped) return;
  int cell = select_variable(s);
  if (cell < 0) return;
  std::uint64_t d = s.dom[cell];
  while (d) {
    int v = std::countr_zero(d) + 1;
    d &= d - 1;
    out.push_back({cell, v});
  }
}

void KakuroProblem::play(State& s, const Move& m) const {
  if (m.value < 1 || m.value > s.k || m.cell < 0 || m.cell >= s.n * s.n ||
      s.grid[m.cell] != 0 || !(s.dom[m.cell] & bit(m.value)))
    throw ContractViolation("kakuro: play of an illegal move");
  do_assign(s, m.cell, m.value, use_sum_bounds);
}

double KakuroProblem::score(const State& s) const {
  if (s.empty_count > 0) return -static_cast<double>(s.empty_count);
  int good = 0;
  for (int r = 0; r < s.n; ++r)
    if (s.row_rem[r] == 0) ++good;
  for (int c = 0; c < s.n; ++c)
    if (s.col_rem[c] == 0) ++good;
  return good;
}

PriorCode KakuroProblem::prior_code(const State& s, const Move& m) const {
  const int n = s.n, r = m.cell / n, c = m.cell % n;
  int occ_r = 0, occ_c = 0, placed_r = 0, placed_c = 0;
  for (int j = 0; j < n; ++j) {
    if (s.grid[r * n + j] == m.value) ++occ_r;
    if (s.grid[j * n + c] == m.value) ++occ_c;
    placed_r += s.grid[r * n + j];
    placed_c += s.grid[j * n + c];
  }
  // Assigned values plus the remainder recover the line hint in any state.
  const int cap = s.k * (s.k + 1) / 2;
  const int hint_r = std::clamp(placed_r + s.row_rem[r], 0, cap);
  const int hint_c = std::clamp(placed_c + s.col_rem[c], 0, cap);
  const int rel_r = std::clamp(s.row_rem[r] - m.value, -1, 8) + 1;
  const int rel_c = std::clamp(s.col_rem[c] - m.value, -1, 8) + 1;
  return static_cast<PriorCode>(m.value) |
         static_cast<PriorCode>(std::min(occ_r, 3)) << 7 |
         static_cast<PriorCode>(std::min(occ_c, 3)) << 9 |
         static_cast<PriorCode>(hint_r) << 11 |
         static_cast<PriorCode>(hint_c) << 23 |
         static_cast<PriorCode>(rel_r) << 35 |
         static_cast<PriorCode>(rel_c) << 39;
}

KakuroMove KakuroProblem::solution_move(const State& s,
                                        const Solution& sol) const {
  int cell = select_variable(s);
  if (cell < 0)
    throw DataError("kakuro: no empty cell left to read from the solution");
  if (sol.n != s.n || static_cast<int>(sol.grid.size()) != s.n * s.n)
    throw DataError("kakuro: solution shape mismatch");
  int v = sol.grid[cell];
  if (v < 1 || v > s.k)
    throw DataError("kakuro: solution has no value for cell " +
                    std::to_string(cell));
  return {cell, v};
}

std::optional<std::string> KakuroProblem::validate_solution(
    const Instance& inst, const Solution& sol) const {
  const int n = inst.n;
  if (sol.n != n || static_cast<int>(sol.grid.size()) != n * n)
    return std::string("solution shape does not match the instance");
  if (static_cast<int>(inst.row_sums.size()) != n ||
      static_cast<int>(inst.col_sums.size()) != n)
    return std::string("instance does not carry n row sums and n column sums");
  std::vector<std::uint64_t> row_seen(n, 0), col_seen(n, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int v = sol.grid[r * n + c];
      if (v < 1 || v > inst.k)
        return "solution cell (" + std::to_string(r) + "," +
               std::to_string(c) + ") is not a value in 1.." +
               std::to_string(inst.k);
      if (row_seen[r] & bit(v))
        return "value " + std::to_string(v) + " duplicated in row " +
               std::to_string(r);
      if (col_seen[c] & bit(v))
        return "value " + std::to_string(v) + " duplicated in column " +
               std::to_string(c);
      row_seen[r] |= bit(v);
      col_seen[c] |= bit(v);
    }
  for (int r = 0; r < n; ++r) {
    int sum = 0;
    for (int c = 0; c < n; ++c) sum += sol.grid[r * n + c];
    if (sum != inst.row_sums[r])
      return "row " + std::to_string(r) + " sums to " + std::to_string(sum) +
             ", hint is " + std::to_string(inst.row_sums[r]);
  }
  for (int c = 0; c < n; ++c) {
    int sum = 0;
    for (int r = 0; r < n; ++r) sum += sol.grid[r * n + c];
    if (sum != inst.col_sums[c])
      return "column " + std::to_string(c) + " sums to " +
             std::to_string(sum) + ", hint is " +
             std::to_string(inst.col_sums[c]);
  }
  return std::nullopt;
}

InstanceSolutionPair<KakuroProblem> generate_kakuro(int n, int k, Rng& rng) {
  if (n < 1 || k < n || k > 64)
    throw DataError("kakuro generation needs 1 <= n <= k <= 64, got n=" +
                    std::to_string(n) + " k=" + std::to_string(k));
  const std::uint64_t full = full_mask(k);
  std::vector<int> grid;
  std::vector<std::uint64_t> row_used(n), col_used(n);
  for (;;) {
    grid.assign(static_cast<std::size_t>(n) * n, 0);
    std::fill(row_used.begin(), row_used.end(), 0ULL);
    std::fill(col_used.begin(), col_used.end(), 0ULL);
    bool ok = true;
    for (int step = 0; step < n * n && ok; ++step) {
      int best = -1, best_size = 65;
      for (int i = 0; i < n * n; ++i) {
        if (grid[i] != 0) continue;
        int d = std::popcount(~(row_used[i / n] | col_used[i % n]) & full);
        if (d < best_size) {
          best_size = d;
          best = i;
        }
      }
      if (best_size == 0) {
        ok = false;
        break;
      }
      std::uint64_t d = ~(row_used[best / n] | col_used[best % n]) & full;
      for (auto skip = rng.below(static_cast<std::uint64_t>(best_size));
           skip > 0; --skip)
        d &= d - 1;
      const int v = std::countr_zero(d) + 1;
      grid[best] = v;
      row_used[best / n] |= bit(v);
      col_used[best % n] |= bit(v);
    }
    if (ok) break;
  }

  KakuroInstance inst;
  inst.n = n;
  inst.k = k;
  inst.row_sums.assign(n, 0);
  inst.col_sums.assign(n, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      inst.row_sums[r] += grid[r * n + c];
      inst.col_sums[c] += grid[r * n + c];
    }
  return {inst, KakuroSolution{n, grid}};
}

void save_kakuro_pair(const std::string& path, const KakuroInstance& inst,
                      const KakuroSolution* sol) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << inst.n << ' ' << inst.k << "\n";
  for (int c = 0; c < inst.n; ++c) {
    if (c) out << ' ';
    out << inst.col_sums[c];
  }
  out << "\n";
  for (int r = 0; r < inst.n; ++r) {
    if (r) out << ' ';
    out << inst.row_sums[r];
  }
  out << "\n";
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

LoadedKakuroPair load_kakuro_pair(const std::string& path) {
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

  next_line("the size line");
  int n = 0, k = 0;
  {
    std::istringstream ls(line);
    std::string extra;
    if (!(ls >> n >> k) || (ls >> extra) || n < 1 || k < n || k > 64)
      throw DataError(where() + ": expected 'n k' with 1 <= n <= k <= 64");
  }

  auto read_sums = [&](const char* what) {
    next_line(what);
    std::istringstream ls(line);
    std::vector<int> sums(n);
    // Any hint must be a sum of n distinct values out of 1..k.
    const int lo = n * (n + 1) / 2;
    const int hi = n * k - n * (n - 1) / 2;
    for (int i = 0; i < n; ++i) {
      if (!(ls >> sums[i]))
        throw DataError(where() + ": expected " + std::to_string(n) + " " +
                        what);
      if (sums[i] < lo || sums[i] > hi)
        throw DataError(where() + ": hint " + std::to_string(sums[i]) +
                        " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    std::string extra;
    if (ls >> extra)
      throw DataError(where() + ": more than " + std::to_string(n) + " " +
                      what);
    return sums;
  };

  LoadedKakuroPair out;
  out.instance.n = n;
  out.instance.k = k;
  out.instance.col_sums = read_sums("column sums");
  out.instance.row_sums = read_sums("row sums");

  KakuroProblem p;
  (void)p.root(out.instance);

  std::string rest;
  while (std::getline(in, rest)) {
    ++lineno;
    if (rest.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (rest.find("---") == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected '---' before the solution grid");
    KakuroSolution sol;
    sol.n = n;
    sol.grid.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
      next_line("the solution grid");
      std::istringstream ls(line);
      int v = 0;
      for (int c = 0; c < n; ++c) {
        if (!(ls >> v))
          throw DataError(where() + ": solution row has fewer than " +
                          std::to_string(n) + " cells");
        sol.grid.push_back(v);
      }
      std::string extra;
      if (ls >> extra)
        throw DataError(where() + ": solution row has more than " +
                        std::to_string(n) + " cells");
    }
    if (auto bad = p.validate_solution(out.instance, sol))
      throw DataError(path + ": " + *bad);
    out.solution = std::move(sol);
    break;
  }
  return out;
}

}  // namespace mcprior
