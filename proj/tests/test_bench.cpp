#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mcprior/bench.hpp"
#include "mcprior/kakuro.hpp"
#include "mcprior/latin_square.hpp"
#include "mcprior/prior.hpp"
#include "mcprior/rna.hpp"
#include "mcprior/rng.hpp"

using namespace mcprior;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("names and parsers agree in both directions") {
  for (Family f : {Family::kLsc, Family::kKakuro, Family::kRna})
    CHECK(parse_family(family_name(f)) == f);
  for (Algorithm a : {Algorithm::kSampling, Algorithm::kSamplingPrior,
                      Algorithm::kNrpa, Algorithm::kGnrpaPrior})
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_THROWS_AS(parse_family("sudoku"), DataError);
  CHECK_THROWS_AS(parse_algorithm("mcts"), DataError);
}

TEST_CASE("doubles render to the shortest text that reads back exactly") {
  CHECK(render_double(0.42) == "0.42");
  CHECK(render_double(1.0) == "1");
  CHECK(render_double(0.5) == "0.5");
  CHECK(render_double(1e-6) == "1e-06");
  Rng rng(90);
  for (int i = 0; i < 200; ++i) {
    double v = (rng.uniform() - 0.5) * std::pow(10.0, (int)rng.below(7));
    CHECK(std::strtod(render_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("config text round-trips and reports bad lines") {
  ExperimentConfig def;
  auto text = render_config(def);
  auto back = render_config(parse_config(text));
  CHECK(back == text);

  auto cfg = parse_config(
      "# comment\n"
      "family = kakuro\n"
      "\n"
      "n = 10\n"
      "k = 11\n"
      "algorithms = sampling, gnrpa+prior\n"
      "budgets = 32,1024\n"
      "tau = 4\n"
      "seed = 7\n"
      "n = 9\n");  // later assignment wins
  CHECK(cfg.family == Family::kKakuro);
  CHECK(cfg.n == 9);
  CHECK(cfg.k == 11);
  REQUIRE(cfg.algorithms.size() == 2);
  CHECK(cfg.algorithms[1] == Algorithm::kGnrpaPrior);
  CHECK(cfg.budgets == std::vector<double>{32, 1024});
  CHECK(cfg.seed == 7);
  CHECK(render_config(parse_config(render_config(cfg))) == render_config(cfg));

  auto check_line = [](const char* text_in, const char* needle) {
    try {
      parse_config(text_in);
      FAIL("expected DataError for ", text_in);
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_line("n = 5\nbogus_key = 1\n", "line 2");
  check_line("n = x\n", "integer");
  check_line("just words\n", "key = value");
  check_line("budget_kind = hours\n", "playouts or seconds");

  CHECK(parse_config("algorithms =\n").algorithms.empty());
  CHECK(parse_config("fold_cmd = RNAfold --noPS\n").fold_cmd ==
        "RNAfold --noPS");
}

TEST_CASE("config validation rejects unusable experiments") {
  auto bad = [](const char* text_in) {
    auto cfg = parse_config(text_in);
    CHECK_THROWS_AS(validate_config(cfg), DataError);
  };
  validate_config(ExperimentConfig{});
  bad("n = 0\n");
  bad("family = kakuro\nn = 5\nk = 4\n");
  bad("fraction = 1.5\n");
  bad("tau = -1\n");
  bad("alpha = 0\n");
  bad("level = 0\n");
  bad("algorithms =\n");
  bad("algorithms = nrpa,nrpa\n");
  bad("budgets =\n");
  bad("budgets = 64,64\n");
  bad("budgets = 64,32\n");
  bad("budgets = 10.5,64\n");
  auto sec = parse_config("budget_kind = seconds\nbudgets = 0.5,2.5\n");
  validate_config(sec);  // fractional budgets are fine as seconds
}

TEST_CASE("bench results render to a fixed csv layout") {
  BenchResults r;
  r.algorithms = {Algorithm::kSampling, Algorithm::kGnrpaPrior};
  r.budgets = {16, 64};
  r.total = 10;
  r.solved = {{2, 5}, {7, 9}};
  CHECK(bench_csv(r) ==
        "algorithm,budget,solved,total\n"
        "sampling,16,2,10\n"
        "sampling,64,5,10\n"
        "gnrpa+prior,16,7,10\n"
        "gnrpa+prior,64,9,10\n");

  r.budget_kind = BudgetKind::kSeconds;
  r.budgets = {0.5, 2};
  CHECK(bench_csv(r).find("sampling,0.5,2,10\n") != std::string::npos);
}

TEST_CASE("histogram csv separates the exact spikes from the ranges") {
  FrequencyHistogram h;
  h.bucket_width = 0.1;
  h.buckets = {5, 0, 1, 0, 0, 0, 0, 0, 0, 4};
  h.exact_zero = 2;
  h.exact_one = 3;
  h.total = 13;
  CHECK(histogram_csv(h) ==
        "bucket,count\n"
        "0.0,2\n"
        "[0,0.1),3\n"
        "[0.1,0.2),0\n"
        "[0.2,0.3),1\n"
        "[0.3,0.4),0\n"
        "[0.4,0.5),0\n"
        "[0.5,0.6),0\n"
        "[0.6,0.7),0\n"
        "[0.7,0.8),0\n"
        "[0.8,0.9),0\n"
        "[0.9,1),4\n"
        "1.0,3\n"
        "total,13\n");
}

TEST_CASE("a small lsc bench is deterministic and monotone across budgets") {
  auto cfg = parse_config(
      "family = lsc\n"
      "n = 5\n"
      "fraction = 0.4\n"
      "training = 60\n"
      "test = 12\n"
      "budgets = 16,64,256\n"
      "seed = 11\n"
      "workers = 1\n");
  auto r1 = run_bench(cfg);
  REQUIRE(r1.algorithms.size() == 4);
  REQUIRE(r1.solved.size() == 4);
  CHECK(r1.total == 12);
  for (const auto& row : r1.solved) {
    REQUIRE(row.size() == 3);
    CHECK(row[0] <= row[1]);
    CHECK(row[1] <= row[2]);
    CHECK(row[2] <= 12);
  }
  // n=5 at 40% empty is easy; every algorithm should finish most of them.
  for (const auto& row : r1.solved) CHECK(row[2] >= 8);

  auto r2 = run_bench(cfg);
  CHECK(bench_csv(r2) == bench_csv(r1));

  cfg.workers = 3;
  auto r3 = run_bench(cfg);
  CHECK(bench_csv(r3) == bench_csv(r1));

  cfg.budgets = {64, 16};
  CHECK_THROWS_AS(run_bench(cfg), DataError);
}

TEST_CASE("a small kakuro bench runs all four algorithms") {
  auto cfg = parse_config(
      "family = kakuro\n"
      "n = 4\n"
      "training = 40\n"
      "test = 8\n"
      "budgets = 8,64\n"
      "seed = 3\n"
      "workers = 1\n");
  auto r = run_bench(cfg);
  CHECK(r.total == 8);
  for (const auto& row : r.solved) {
    CHECK(row[0] <= row[1]);
    CHECK(row[1] >= 4);  // n=4 kakuro is tiny
  }
  auto again = run_bench(cfg);
  CHECK(bench_csv(again) == bench_csv(r));
}

TEST_CASE("a small rna bench with the builtin folder stays deterministic") {
  auto cfg = parse_config(
      "family = rna\n"
      "n = 25\n"
      "training = 30\n"
      "test = 6\n"
      "algorithms = sampling,sampling+prior\n"
      "budgets = 50,200\n"
      "tau = 6\n"
      "seed = 5\n"
      "workers = 1\n");
  auto r = run_bench(cfg);
  CHECK(r.total == 6);
  REQUIRE(r.solved.size() == 2);
  for (const auto& row : r.solved) CHECK(row[0] <= row[1]);
  auto again = run_bench(cfg);
  CHECK(bench_csv(again) == bench_csv(r));
}

TEST_CASE("a degenerate folder makes train and test collide and that is fatal") {
  // An engine that folds everything to dots produces identical targets, so
  // the train/test disjointness check has to fire.
  auto cfg = parse_config(
      "family = rna\n"
      "n = 8\n"
      "training = 2\n"
      "test = 1\n"
      "algorithms = sampling+prior\n"
      "budgets = 4\n"
      "fold_cmd = sed -u 's/[ACGU]/./g'\n"
      "workers = 1\n");
  try {
    run_bench(cfg);
    FAIL("expected the disjointness check to throw");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("duplicates") != std::string::npos);
  }
}

TEST_CASE("lsc corpus files reproduce the in-memory prior exactly") {
  auto cfg = parse_config(
      "family = lsc\n"
      "n = 5\n"
      "fraction = 0.4\n"
      "training = 25\n"
      "seed = 21\n");
  auto dir = fresh_dir("mcb_lsc_corpus");
  generate_corpus(cfg, dir.string());

  std::istringstream manifest(slurp(dir / "manifest.txt"));
  int lines = 0;
  std::string line;
  while (std::getline(manifest, line)) ++lines;
  CHECK(lines == 25);

  PriorTable learned;
  learned.family = "lsc";
  auto rep = learn_prior_corpus(Family::kLsc, dir.string(), learned);
  CHECK(rep.pairs == 25);
  CHECK(rep.skipped == 0);

  PriorTable expect;
  expect.family = "lsc";
  LatinProblem prob;
  for (std::uint64_t i = 0; i < 25; ++i) {
    Rng rng(derive_seed(21, stream::kTrain, i));
    auto full = generate_complete_square(5, rng);
    auto pr = make_instance(full, 0.4, rng);
    replay(prob, pr.instance, pr.solution, expect);
  }
  CHECK(learned.sorted_entries() == expect.sorted_entries());
  CHECK(learned.instances == 25);

  // Same seed, fresh directory: byte-identical corpus.
  auto dir2 = fresh_dir("mcb_lsc_corpus2");
  generate_corpus(cfg, dir2.string());
  CHECK(slurp(dir2 / "manifest.txt") == slurp(dir / "manifest.txt"));
  CHECK(slurp(dir2 / "pair_000000.txt") == slurp(dir / "pair_000000.txt"));
  CHECK(slurp(dir2 / "pair_000024.txt") == slurp(dir / "pair_000024.txt"));

  // A truncated pair is skipped and reported, not fatal.
  std::ofstream(dir / "pair_000003.txt") << "5\n1 2 3 4 5\n";
  PriorTable partial;
  auto rep2 = learn_prior_corpus(Family::kLsc, dir.string(), partial);
  CHECK(rep2.pairs == 24);
  CHECK(rep2.skipped == 1);

  CHECK_THROWS_AS(
      learn_prior_corpus(Family::kLsc, (dir / "nowhere").string(), partial),
      DataError);
}

TEST_CASE("kakuro corpus files reproduce the in-memory prior exactly") {
  auto cfg = parse_config(
      "family = kakuro\n"
      "n = 4\n"
      "training = 15\n"
      "seed = 22\n");
  auto dir = fresh_dir("mcb_kak_corpus");
  generate_corpus(cfg, dir.string());

  PriorTable learned;
  learned.family = "kakuro";
  auto rep = learn_prior_corpus(Family::kKakuro, dir.string(), learned);
  CHECK(rep.pairs == 15);
  CHECK(rep.skipped == 0);

  PriorTable expect;
  expect.family = "kakuro";
  KakuroProblem prob;
  for (std::uint64_t i = 0; i < 15; ++i) {
    Rng rng(derive_seed(22, stream::kTrain, i));
    auto pr = generate_kakuro(4, 5, rng);
    replay(prob, pr.instance, pr.solution, expect);
  }
  CHECK(learned.sorted_entries() == expect.sorted_entries());
}

TEST_CASE("rna corpus files reproduce the in-memory prior exactly") {
  auto cfg = parse_config(
      "family = rna\n"
      "n = 15\n"
      "training = 20\n"
      "seed = 23\n");
  auto dir = fresh_dir("mcb_rna_corpus");
  generate_corpus(cfg, dir.string());
  CHECK(fs::exists(dir / "corpus.txt"));

  PriorTable learned;
  learned.family = "rna";
  auto rep = learn_prior_corpus(Family::kRna, dir.string(), learned);
  CHECK(rep.pairs == 20);
  CHECK(rep.skipped == 0);

  NussinovFolder folder;
  PriorTable expect;
  expect.family = "rna";
  std::vector<TargetStructure> targets;
  std::vector<std::string> seqs;
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng(derive_seed(23, stream::kTrain, i));
    auto pr = generate_rna_pair(15, folder, rng);
    targets.push_back(pr.instance.target);
    seqs.push_back(pr.solution.sequence);
  }
  ngram_replay(targets, seqs, expect);
  CHECK(learned.sorted_entries() == expect.sorted_entries());

  // The bare record file works as a corpus path too.
  PriorTable from_file;
  from_file.family = "rna";
  auto rep2 = learn_prior_corpus(Family::kRna, (dir / "corpus.txt").string(),
                                 from_file);
  CHECK(rep2.pairs == 20);
  CHECK(from_file.sorted_entries() == expect.sorted_entries());
}

TEST_CASE("solving one instance from a file reports a verifiable record") {
  Rng rng(31);
  LatinProblem prob;
  auto full = generate_complete_square(5, rng);
  auto pr = make_instance(full, 0.2, rng);
  auto dir = fresh_dir("mcb_solve");
  auto inst_path = (dir / "inst.txt").string();
  save_latin_pair(inst_path, pr.instance, nullptr);

  auto cfg = parse_config(
      "family = lsc\n"
      "n = 5\n"
      "budgets = 400\n"
      "seed = 9\n");
  auto rec = solve_instance(cfg, Algorithm::kSampling, inst_path, nullptr);
  CHECK(rec.solved);
  CHECK(rec.score == 0.0);
  CHECK(rec.playouts_used >= 1);
  CHECK(rec.playouts_used <= 400);
  CHECK(rec.seed == 9);
  REQUIRE(!rec.solution.empty());

  LatinSolution sol;
  sol.n = 5;
  std::istringstream in(rec.solution);
  int v;
  while (in >> v) sol.grid.push_back(v);
  REQUIRE(sol.grid.size() == 25);
  CHECK(prob.validate_solution(pr.instance, sol) == std::nullopt);

  CHECK_THROWS_AS(
      solve_instance(cfg, Algorithm::kGnrpaPrior, inst_path, nullptr),
      DataError);

  // Zero temperature makes the prior invisible: same record as plain nrpa.
  PriorTable table;
  table.family = "lsc";
  replay(prob, pr.instance, pr.solution, table);
  cfg.tau = 0.0;
  auto with = solve_instance(cfg, Algorithm::kGnrpaPrior, inst_path, &table);
  auto without = solve_instance(cfg, Algorithm::kNrpa, inst_path, nullptr);
  CHECK(with.playouts_used == without.playouts_used);
  CHECK(with.score == without.score);
  CHECK(with.solution == without.solution);
}

TEST_CASE("solving an rna puzzle file uses the configured folder") {
  NussinovFolder folder;
  Rng rng(32);
  auto pair = generate_rna_pair(14, folder, rng);
  auto dir = fresh_dir("mcb_solve_rna");
  auto path = (dir / "puzzle.txt").string();
  save_rna_puzzle(path, pair.instance);

  auto cfg = parse_config(
      "family = rna\n"
      "budgets = 2000\n"
      "seed = 12\n");
  auto rec = solve_instance(cfg, Algorithm::kSampling, path, nullptr);
  if (rec.solved) {
    std::string seq = rec.solution.substr(0, rec.solution.find('\n'));
    RnaProblem prob;
    prob.folder = &folder;
    CHECK(prob.validate_solution(pair.instance, RnaSolution{seq}) ==
          std::nullopt);
    CHECK(folder.fold(seq) == pair.instance.target.chars);
  }
  CHECK(rec.playouts_used <= 2000);
}

TEST_CASE("time budgets run the pipeline on wall clock limits") {
  auto cfg = parse_config(
      "family = lsc\n"
      "n = 4\n"
      "fraction = 0.3\n"
      "training = 10\n"
      "test = 3\n"
      "algorithms = sampling,gnrpa+prior\n"
      "budget_kind = seconds\n"
      "budgets = 0.05,0.2\n"
      "seed = 13\n"
      "workers = 1\n");
  auto r = run_bench(cfg);
  CHECK(r.total == 3);
  for (const auto& row : r.solved) CHECK(row[0] <= row[1]);
  // n=4 at 30% empty solves well inside 200ms.
  CHECK(r.solved[0][1] == 3);
  auto csv = bench_csv(r);
  CHECK(csv.find("sampling,0.05,") != std::string::npos);
}
