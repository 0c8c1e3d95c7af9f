#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcprior/errors.hpp"
#include "mcprior/prior.hpp"

namespace mcprior {

enum class Family { kLsc, kKakuro, kRna };
enum class Algorithm { kSampling, kSamplingPrior, kNrpa, kGnrpaPrior };
enum class BudgetKind { kPlayouts, kSeconds };

const char* family_name(Family f);
const char* algorithm_name(Algorithm a);
Family parse_family(const std::string& s);        // DataError on unknown
Algorithm parse_algorithm(const std::string& s);  // DataError on unknown

// One experiment: generate a training corpus, learn a prior, generate a
// test set, run every algorithm on every test instance, tabulate solved
// counts per budget rung. Amounts are desk scale by default.
struct ExperimentConfig {
  Family family = Family::kLsc;
  int n = 20;            // lsc: side, kakuro: side, rna: target length
  int k = 0;             // kakuro values 1..k; 0 means n+1
  double fraction = 0.42;  // lsc: fraction of blanked cells
  std::uint64_t training = 10000;
  std::uint64_t test = 100;
  std::vector<Algorithm> algorithms = {
      Algorithm::kSampling, Algorithm::kSamplingPrior, Algorithm::kNrpa,
      Algorithm::kGnrpaPrior};
  BudgetKind budget_kind = BudgetKind::kPlayouts;
  std::vector<double> budgets = {1024, 2048, 4096, 8192, 16384};
  double tau = 4.0;
  double alpha = 1.0;
  int level = 2;
  std::uint64_t seed = 1;
  std::string fold_cmd;  // rna: external engine; empty uses the builtin
  unsigned workers = 0;  // 0 means one per CPU
  std::string out = "bench_out";
};

// Shortest decimal text that parses back to exactly v.
std::string render_double(double v);

// Sets one key to a textual value; throws DataError on unknown keys or
// unparsable values. Keys mirror the config file format.
void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value);

void validate_config(const ExperimentConfig& cfg);

// Line-oriented "key = value" text. '#' starts a comment, blank lines are
// skipped. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Every field, one per line, reloadable through parse_config.
std::string render_config(const ExperimentConfig& cfg);

struct BenchResults {
  std::vector<Algorithm> algorithms;
  BudgetKind budget_kind = BudgetKind::kPlayouts;
  std::vector<double> budgets;
  std::uint64_t total = 0;
  // solved[a][b]: instances solved by algorithms[a] within budgets[b].
  std::vector<std::vector<std::uint64_t>> solved;
};

std::string bench_csv(const BenchResults& r);

// Full pipeline in memory. Training and test instances come from disjoint
// seed streams of cfg.seed; a test instance colliding with a training
// instance is an error. Each algorithm runs each test instance once at the
// largest budget; a rung is credited when the first solve fell within it.
// Progress notes go to *log when given.
BenchResults run_bench(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Writes cfg.training generated pairs under dir: lsc and kakuro get one
// pair file each plus manifest.txt (file and seed per line), rna gets
// corpus.txt plus manifest.txt (record index and seed per line).
void generate_corpus(const ExperimentConfig& cfg, const std::string& dir);

struct LearnReport {
  std::uint64_t pairs = 0;    // records accepted into the table
  std::uint64_t skipped = 0;  // corrupt or unreplayable records
};

// Accumulates the prior counters from a corpus written by generate_corpus.
// For rna, path may also name a bare record file (structure line, sequence
// line, blank line between records). Corrupt pairs are skipped and counted.
LearnReport learn_prior_corpus(Family family, const std::string& path,
                               PriorTable& table);

// One instance, one algorithm. Loads the per-family instance file, runs
// with cfg's parameters and seed, reports what happened.
struct SolveRecord {
  bool solved = false;
  double score = 0.0;  // best score seen
  std::uint64_t playouts_used = 0;  // playouts to first solve, or all spent
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string solution;  // render of the best terminal found, if solved
};

SolveRecord solve_instance(const ExperimentConfig& cfg, Algorithm algorithm,
                           const std::string& instance_path,
                           const PriorTable* prior);

// "bucket,count" rows: exact 0.0, the ten width-0.1 ranges, exact 1.0,
// then a total row. Stable text for diffing.
std::string histogram_csv(const FrequencyHistogram& h);

}  // namespace mcprior
