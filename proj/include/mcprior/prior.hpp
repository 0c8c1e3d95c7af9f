#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcprior/errors.hpp"
#include "mcprior/policy.hpp"
#include "mcprior/problem.hpp"

namespace mcprior {

struct PriorCounter {
  std::uint64_t count = 0;  // times the code's move was the solution move
  std::uint64_t nb = 0;     // times the code's move was legal
  friend bool operator==(const PriorCounter&, const PriorCounter&) = default;
};

// Frequency counters accumulated by replaying solved instances. Codes that
// were never legal anywhere are simply absent.
class PriorTable {
 public:
  std::string family;
  std::uint64_t instances = 0;
  double tau = 0.0;

  void add_legal(PriorCode c) { ++counters_[c].nb; }
  void add_chosen(PriorCode c) { ++counters_[c].count; }
  void add(PriorCode c, std::uint64_t dcount, std::uint64_t dnb) {
    auto& e = counters_[c];
    e.count += dcount;
    e.nb += dnb;
  }

  const PriorCounter* find(PriorCode c) const {
    auto it = counters_.find(c);
    return it == counters_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return counters_.size(); }
  bool empty() const { return counters_.empty(); }

  // Sorted by code.
  std::vector<std::pair<PriorCode, PriorCounter>> sorted_entries() const;

  // Component-wise addition; families must agree unless one side is empty.
  void merge(const PriorTable& other);

  // Enforces count <= nb and nb >= 1 for every stored code.
  void validate() const;

 private:
  std::unordered_map<PriorCode, PriorCounter> counters_;
};

// Walks the solution trajectory of one solved instance and accumulates the
// counters: nb for every legal move at every step, count for the move the
// solution dictates. Nothing is committed if the pair turns out corrupt.
template <SearchProblem P>
void replay(const P& problem, const typename P::Instance& inst,
            const typename P::Solution& sol, PriorTable& table) {
  auto state = problem.root(inst);
  std::vector<typename P::Move> moves;
  std::vector<PriorCode> legal_codes;
  std::vector<PriorCode> chosen_codes;
  std::size_t step = 0;
  while (!problem.is_terminal(state)) {
    problem.legal_moves(state, moves);
    if (moves.empty())
      throw DataError("replay: dead end at step " + std::to_string(step));
    typename P::Move b = [&] {
      try {
        return problem.solution_move(state, sol);
      } catch (const DataError& e) {
        throw DataError("replay: step " + std::to_string(step) + ": " +
                        e.what());
      }
    }();
    bool legal = false;
    for (const auto& m : moves)
      if (m == b) {
        legal = true;
        break;
      }
    if (!legal)
      throw DataError("replay: solution move illegal at step " +
                      std::to_string(step));
    for (const auto& m : moves)
      legal_codes.push_back(problem.prior_code(state, m));
    chosen_codes.push_back(problem.prior_code(state, b));
    problem.play(state, b);
    ++step;
  }
  if (problem.score(state) != problem.solved_score(inst))
    throw DataError("replay: trajectory does not reach the solved score");
  for (PriorCode c : legal_codes) table.add_legal(c);
  for (PriorCode c : chosen_codes) table.add_chosen(c);
  table.instances += 1;
}

struct PriorBiasOptions {
  double tau = 4.0;
  double frequency_floor = 1e-6;
  // count = 0 codes get the excluded sentinel instead of the floor bias.
  bool hard_exclude_unplayed = false;
};

// Immutable code -> bias lookup baked from a PriorTable:
//   count >= 1        tau * log(count/nb)
//   count  = 0        tau * log(frequency_floor), or excluded in hard mode
//   code absent       0 (neutral)
class PriorBias {
 public:
  PriorBias(const PriorTable& table, PriorBiasOptions opt);

  BiasTerm operator()(PriorCode c) const {
    auto it = bias_.find(c);
    return it == bias_.end() ? BiasTerm{} : it->second;
  }

  const PriorBiasOptions& options() const { return opt_; }

 private:
  PriorBiasOptions opt_;
  std::unordered_map<PriorCode, BiasTerm> bias_;
};

struct FrequencyHistogram {
  double bucket_width = 0.1;
  // buckets[i] counts frequencies in [i*width, (i+1)*width), excluding 1.0.
  std::vector<std::uint64_t> buckets;
  // Codes at exactly 0 also fall in buckets[0]; exact 1.0 is its own bucket.
  std::uint64_t exact_zero = 0;
  std::uint64_t exact_one = 0;
  std::uint64_t total = 0;
};

FrequencyHistogram frequency_histogram(const PriorTable& table,
                                       double bucket_width);

void save_prior(const PriorTable& table, const std::string& path);
PriorTable load_prior(const std::string& path);

}  // namespace mcprior
