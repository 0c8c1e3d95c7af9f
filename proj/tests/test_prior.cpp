#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "mcprior/prior.hpp"
#include "mcprior/rng.hpp"
#include "support/fake_problem.hpp"

using namespace mcprior;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Independent recount of what replay should have produced for one pair.
void expected_counts(const FakeProblem& p, const FakeProblem::Instance& inst,
                     const FakeProblem::Solution& sol,
                     std::map<PriorCode, PriorCounter>& into) {
  auto state = p.root(inst);
  std::vector<int> moves;
  while (!p.is_terminal(state)) {
    p.legal_moves(state, moves);
    for (int m : moves) ++into[p.prior_code(state, m)].nb;
    int b = p.solution_move(state, sol);
    ++into[p.prior_code(state, b)].count;
    p.play(state, b);
  }
}

bool tables_equal(const PriorTable& a, const PriorTable& b) {
  return a.sorted_entries() == b.sorted_entries() && a.family == b.family &&
         a.instances == b.instances && a.tau == b.tau;
}

}  // namespace

TEST_CASE("replay on a forced-move chain yields frequency 1 everywhere") {
  FakeProblem p;
  FakeProblem::Instance inst{{1, 1, 1}, {0, 0, 0}};
  PriorTable t;
  replay(p, inst, {0, 0, 0}, t);
  CHECK(t.instances == 1);
  CHECK(t.size() == 3);
  for (const auto& [code, c] : t.sorted_entries()) {
    (void)code;
    CHECK(c.count == c.nb);
    CHECK(c.nb == 1);
  }
}

TEST_CASE("replay counters match an independent trajectory recount") {
  FakeProblem p;
  p.share_codes_across_depths = true;  // forces real aggregation across steps
  Rng rng(606);
  PriorTable t;
  std::map<PriorCode, PriorCounter> expect;
  std::uint64_t steps_total = 0, branch_total = 0;
  for (int i = 0; i < 50; ++i) {
    FakeProblem::Instance inst;
    FakeProblem::Solution sol;
    int depth = 1 + static_cast<int>(rng.below(5));
    for (int d = 0; d < depth; ++d) {
      int b = 1 + static_cast<int>(rng.below(5));
      inst.branching.push_back(b);
      inst.target.push_back(0);
      sol.push_back(static_cast<int>(rng.below(b)));
      ++steps_total;
      branch_total += b;
    }
    inst.target = sol;  // make the solution the target so it solves
    replay(p, inst, sol, t);
    expected_counts(p, inst, sol, expect);
  }
  CHECK(t.instances == 50);
  REQUIRE(t.size() == expect.size());
  std::uint64_t count_sum = 0, nb_sum = 0;
  for (const auto& [code, c] : t.sorted_entries()) {
    CHECK(c.count == expect[code].count);
    CHECK(c.nb == expect[code].nb);
    count_sum += c.count;
    nb_sum += c.nb;
  }
  CHECK(count_sum == steps_total);
  CHECK(nb_sum == branch_total);
}

TEST_CASE("replay of a corrupt pair throws and leaves the table untouched") {
  FakeProblem p;
  FakeProblem::Instance inst{{2, 2}, {1, 1}};
  PriorTable t;
  replay(p, inst, {1, 1}, t);
  auto before = t.sorted_entries();

  CHECK_THROWS_AS(replay(p, inst, {1, 9}, t), DataError);   // illegal move
  CHECK_THROWS_AS(replay(p, inst, {1}, t), DataError);      // too short
  CHECK_THROWS_AS(replay(p, inst, {0, 1}, t), DataError);   // doesn't solve
  CHECK(t.sorted_entries() == before);
  CHECK(t.instances == 1);
}

TEST_CASE("corpus order does not matter and sharded merge is exact") {
  FakeProblem p;
  p.share_codes_across_depths = true;
  Rng rng(12);
  std::vector<std::pair<FakeProblem::Instance, FakeProblem::Solution>> corpus;
  for (int i = 0; i < 30; ++i) {
    FakeProblem::Instance inst;
    for (int d = 0; d < 3; ++d) {
      inst.branching.push_back(2 + static_cast<int>(rng.below(3)));
      inst.target.push_back(static_cast<int>(rng.below(inst.branching.back())));
    }
    corpus.emplace_back(inst, inst.target);
  }

  PriorTable forward, backward, shard_a, shard_b;
  for (const auto& [i, s] : corpus) replay(p, i, s, forward);
  for (auto it = corpus.rbegin(); it != corpus.rend(); ++it)
    replay(p, it->first, it->second, backward);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    replay(p, corpus[i].first, corpus[i].second, i % 2 ? shard_a : shard_b);
  shard_a.merge(shard_b);

  CHECK(tables_equal(forward, backward));
  CHECK(tables_equal(forward, shard_a));
}

TEST_CASE("merge rejects mismatched families") {
  PriorTable a, b;
  a.family = "x";
  b.family = "y";
  CHECK_THROWS_AS(a.merge(b), DataError);
}

TEST_CASE("bias values follow tau * log(count/nb)") {
  PriorTable t;
  t.add(1, 7, 7);          // frequency 1 -> bias 0 exactly
  t.add(2, 10083, 1000000);
  t.add(3, 0, 42);         // legal but never chosen
  t.add(4, 1, 2);

  PriorBiasOptions opt;
  opt.tau = 6.0;
  PriorBias bias(t, opt);
  CHECK(bias(1).value == 0.0);
  CHECK(!bias(1).excluded);
  CHECK(bias(2).value == doctest::Approx(-27.58).epsilon(1e-3));
  CHECK(bias(4).value == doctest::Approx(6.0 * std::log(0.5)));
  CHECK(bias(999).value == 0.0);  // absent code is neutral
  CHECK(!bias(999).excluded);

  // count = 0: soft exclusion via the frequency floor by default.
  CHECK(bias(3).value == doctest::Approx(6.0 * std::log(1e-6)));
  CHECK(!bias(3).excluded);

  PriorBiasOptions hard = opt;
  hard.hard_exclude_unplayed = true;
  PriorBias hard_bias(t, hard);
  CHECK(hard_bias(3).excluded);
  CHECK(!hard_bias(2).excluded);
}

TEST_CASE("bias is monotone in count for fixed nb") {
  PriorTable t;
  for (std::uint64_t c = 1; c <= 10; ++c) t.add(c, c, 10);
  PriorBias bias(t, {});
  for (std::uint64_t c = 1; c < 10; ++c) CHECK(bias(c).value < bias(c + 1).value);
  CHECK(bias(10).value == 0.0);
  for (std::uint64_t c = 1; c <= 10; ++c) CHECK(bias(c).value <= 0.0);
}

TEST_CASE("bias provider rejects bad parameters and corrupt tables") {
  PriorTable t;
  t.add(1, 3, 2);  // count > nb
  CHECK_THROWS_AS(PriorBias(t, {}), DataError);
  PriorTable ok;
  PriorBiasOptions opt;
  opt.tau = -1.0;
  CHECK_THROWS_AS(PriorBias(ok, opt), DataError);
  opt.tau = 1.0;
  opt.frequency_floor = 0.0;
  CHECK_THROWS_AS(PriorBias(ok, opt), DataError);
}

TEST_CASE("histogram buckets frequencies with exact-0 and exact-1 spikes") {
  PriorTable t;
  t.add(1, 0, 5);    // 0.0
  t.add(2, 0, 9);    // 0.0
  t.add(3, 1, 20);   // 0.05
  t.add(4, 1, 2);    // 0.5
  t.add(5, 3, 4);    // 0.75
  t.add(6, 5, 5);    // 1.0
  t.add(7, 99, 100); // 0.99
  auto h = frequency_histogram(t, 0.1);
  REQUIRE(h.buckets.size() == 10);
  CHECK(h.total == 7);
  CHECK(h.exact_zero == 2);
  CHECK(h.exact_one == 1);
  CHECK(h.buckets[0] == 3);  // both zeros and the 0.05
  CHECK(h.buckets[5] == 1);
  CHECK(h.buckets[7] == 1);
  CHECK(h.buckets[9] == 1);  // 0.99 stays below the exact-1.0 spike

  auto empty = frequency_histogram(PriorTable{}, 0.1);
  CHECK(empty.total == 0);
  CHECK(empty.exact_one == 0);

  CHECK_THROWS_AS(frequency_histogram(t, 0.0), DataError);
  CHECK_THROWS_AS(frequency_histogram(t, 1.5), DataError);
}

TEST_CASE("prior file round-trips field for field") {
  PriorTable t;
  t.family = "fake-n3";
  t.instances = 123;
  t.tau = 4.25;
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t nb = 1 + rng.below(1000);
    t.add(rng.next_u64() % 100000, rng.below(nb + 1), nb);
  }
  auto path = temp_path("mcprior_roundtrip.prior");
  save_prior(t, path);
  auto back = load_prior(path);
  CHECK(tables_equal(t, back));

  // Saving the loaded table reproduces the file byte for byte.
  auto path2 = temp_path("mcprior_roundtrip2.prior");
  save_prior(back, path2);
  std::ifstream a(path), b(path2);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("loading an empty file gives a valid empty table") {
  auto path = temp_path("mcprior_empty.prior");
  std::ofstream(path).close();
  auto t = load_prior(path);
  CHECK(t.size() == 0);
  CHECK(t.instances == 0);
  std::filesystem::remove(path);
}

TEST_CASE("malformed prior files are rejected with a line number") {
  auto path = temp_path("mcprior_bad.prior");
  auto expect_fail = [&](const std::string& content, const char* line_tag) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
    out.close();
    CHECK_THROWS_WITH_AS(load_prior(path), doctest::Contains(line_tag),
                         DataError);
  };
  expect_fail("#family f\n12 5 3\n", ":2:");        // count > nb
  expect_fail("#family f\n12 0 0\n", ":2:");        // nb = 0
  expect_fail("#bogus x\n", ":1:");                 // unknown header
  expect_fail("1 2 3\n1 1 2\n", ":2:");             // duplicate code
  expect_fail("#family f\nnot numbers here\n", ":2:");
  expect_fail("#family f\n1 2 3 4\n", ":2:");       // trailing field
  CHECK_THROWS_AS(load_prior(temp_path("mcprior_missing.prior")), DataError);
  std::filesystem::remove(path);
}
