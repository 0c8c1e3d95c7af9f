#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcprior/bench.hpp"
#include "mcprior/latin_square.hpp"
#include "mcprior/prior.hpp"
#include "mcprior/rng.hpp"

namespace fs = std::filesystem;
using namespace mcprior;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

int cmd_generate(const ExperimentConfig& cfg, const std::string& out) {
  generate_corpus(cfg, out);
  std::fprintf(stderr, "wrote %llu %s pairs under %s\n",
               static_cast<unsigned long long>(cfg.training),
               family_name(cfg.family), out.c_str());
  return 0;
}

int cmd_learn_prior(Family family, const std::string& corpus, double tau,
                    const std::string& out) {
  PriorTable table;
  table.family = family_name(family);
  table.tau = tau;
  auto rep = learn_prior_corpus(family, corpus, table);
  save_prior(table, out);
  std::cout << histogram_csv(frequency_histogram(table, 0.1));
  std::fprintf(stderr, "replayed %llu pairs, skipped %llu; %zu codes -> %s\n",
               static_cast<unsigned long long>(rep.pairs),
               static_cast<unsigned long long>(rep.skipped), table.size(),
               out.c_str());
  if (rep.skipped * 100 > (rep.pairs + rep.skipped)) {
    std::fprintf(stderr, "more than 1%% of the corpus was unusable\n");
    return 2;
  }
  return 0;
}

int cmd_solve(const ExperimentConfig& cfg, Algorithm algorithm,
              const std::string& instance, const PriorTable* prior) {
  auto rec = solve_instance(cfg, algorithm, instance, prior);
  nlohmann::json j;
  j["solved"] = rec.solved;
  j["score"] = rec.score;
  j["playouts_used"] = rec.playouts_used;
  j["wall_time"] = rec.wall_time_s;
  j["seed"] = rec.seed;
  if (!rec.solution.empty()) j["solution"] = rec.solution;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg) {
  auto results = run_bench(cfg, &std::cerr);
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  const auto csv = bench_csv(results);
  write_text((fs::path(cfg.out) / "results.csv").string(), csv);
  write_text((fs::path(cfg.out) / "config.txt").string(), render_config(cfg));
  std::fprintf(stderr, "results in %s\n",
               (fs::path(cfg.out) / "results.csv").c_str());
  std::cout << csv;
  return 0;
}

int cmd_histogram(const std::string& prior_path, const std::string& out) {
  auto table = load_prior(prior_path);
  emit(out, histogram_csv(frequency_histogram(table, 0.1)));
  return 0;
}

int cmd_phase_sweep(int n, int count, std::uint64_t budget, std::uint64_t seed,
                    unsigned workers, const std::string& out) {
  std::vector<double> fractions;
  for (int pct = 30; pct <= 55; ++pct) fractions.push_back(pct / 100.0);
  auto points = phase_transition_sweep(n, fractions, count, budget, seed,
                                       workers ? workers : 1);
  std::string csv = "fraction,median_playouts\n";
  for (const auto& p : points)
    csv += render_double(p.fraction) + "," + render_double(p.median_playouts) +
           "\n";
  emit(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Monte Carlo search with learned playout priors. Generates solved "
      "corpora, learns priors by replaying them, solves single instances and "
      "runs budget sweeps over latin square completion, kakuro and inverse "
      "rna folding."};
  app.require_subcommand(1);

  std::string family = "lsc";
  int n = 20, k = 0, level = 2, count = 10000;
  double fraction = 0.42, tau = 4.0, alpha = 1.0;
  std::uint64_t seed = 1, budget = 1024;
  double time_limit = 0.0;
  unsigned workers = 0;
  std::string out, prior_path, fold_cmd, corpus, instance, algorithm,
      config_path, budget_list, time_list;

  auto* gen = app.add_subcommand(
      "generate", "Write a corpus of solved instance/solution pairs");
  gen->add_option("--family", family, "lsc, kakuro or rna")->required();
  gen->add_option("--n", n, "side length, or rna target length");
  gen->add_option("--k", k, "kakuro cell values 1..k (0 means n+1)");
  gen->add_option("--fraction", fraction, "lsc fraction of blanked cells");
  gen->add_option("--count", count, "number of pairs")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--fold-cmd", fold_cmd,
                  "external folding engine for rna (line protocol)");
  gen->add_option("--out", out, "corpus directory")->required();

  auto* learn = app.add_subcommand(
      "learn-prior", "Replay a corpus into move-frequency counters");
  learn->add_option("corpus", corpus, "corpus directory (or rna record file)")
      ->required();
  learn->add_option("--family", family, "lsc, kakuro or rna")->required();
  learn->add_option("--tau", tau, "temperature recorded with the prior");
  learn->add_option("--out", out, "prior file to write")->required();

  auto* solve =
      app.add_subcommand("solve", "Run one algorithm on one instance file");
  solve->add_option("instance", instance, "instance file")->required();
  solve->add_option("--family", family, "lsc, kakuro or rna")->required();
  solve
      ->add_option("--algorithm", algorithm,
                   "sampling, sampling+prior, nrpa or gnrpa+prior")
      ->required();
  auto* solve_budget =
      solve->add_option("--budget", budget, "playout budget");
  auto* solve_time =
      solve->add_option("--time-limit", time_limit, "seconds of search");
  solve_time->excludes(solve_budget);
  auto* solve_tau = solve->add_option(
      "--tau", tau, "prior temperature (default: value stored in the prior)");
  solve->add_option("--alpha", alpha, "adaptation step");
  solve->add_option("--level", level, "nesting level");
  solve->add_option("--seed", seed, "search seed");
  solve->add_option("--prior", prior_path, "prior file");
  solve->add_option("--fold-cmd", fold_cmd, "external folding engine");

  auto* bench = app.add_subcommand(
      "bench", "Generate, learn, then sweep algorithms over budgets");
  bench->add_option("--config", config_path, "key = value experiment file");
  auto* b_family = bench->add_option("--family", family, "");
  auto* b_n = bench->add_option("--n", n, "");
  auto* b_k = bench->add_option("--k", k, "");
  auto* b_fraction = bench->add_option("--fraction", fraction, "");
  auto* b_count = bench->add_option("--count", count, "training pairs");
  auto* b_tau = bench->add_option("--tau", tau, "");
  auto* b_alpha = bench->add_option("--alpha", alpha, "");
  auto* b_level = bench->add_option("--level", level, "");
  auto* b_seed = bench->add_option("--seed", seed, "");
  auto* b_fold = bench->add_option("--fold-cmd", fold_cmd, "");
  auto* b_workers = bench->add_option("--workers", workers, "");
  auto* b_out = bench->add_option("--out", out, "results directory");
  auto* b_budget = bench->add_option("--budget", budget_list,
                                     "comma list of playout budgets");
  auto* b_time = bench->add_option("--time-limit", time_list,
                                   "comma list of second budgets");
  b_time->excludes(b_budget);

  auto* hist = app.add_subcommand(
      "histogram", "Bucket the move frequencies of a saved prior");
  hist->add_option("--prior", prior_path, "prior file")->required();
  hist->add_option("--out", out, "csv file (default stdout)");

  auto* sweep = app.add_subcommand(
      "phase-sweep",
      "Median playouts to solve lsc across empty fractions 30%..55%");
  sweep->add_option("--n", n, "side length");
  sweep->add_option("--count", count, "instances per fraction");
  sweep->add_option("--budget", budget, "playout cap per instance");
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--workers", workers, "worker threads");
  sweep->add_option("--out", out, "csv file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen)) {
      ExperimentConfig cfg;
      cfg.family = parse_family(family);
      cfg.n = n;
      cfg.k = k;
      cfg.fraction = fraction;
      cfg.training = static_cast<std::uint64_t>(count);
      cfg.seed = seed;
      cfg.fold_cmd = fold_cmd;
      return cmd_generate(cfg, out);
    }
    if (app.got_subcommand(learn))
      return cmd_learn_prior(parse_family(family), corpus, tau, out);
    if (app.got_subcommand(solve)) {
      ExperimentConfig cfg;
      cfg.family = parse_family(family);
      cfg.alpha = alpha;
      cfg.level = level;
      cfg.seed = seed;
      cfg.fold_cmd = fold_cmd;
      if (solve_time->count()) {
        cfg.budget_kind = BudgetKind::kSeconds;
        cfg.budgets = {time_limit};
      } else {
        cfg.budgets = {static_cast<double>(budget)};
      }
      PriorTable table;
      bool have_prior = !prior_path.empty();
      if (have_prior) table = load_prior(prior_path);
      cfg.tau = solve_tau->count()
                    ? tau
                    : (have_prior && table.tau > 0 ? table.tau : tau);
      return cmd_solve(cfg, parse_algorithm(algorithm), instance,
                       have_prior ? &table : nullptr);
    }
    if (app.got_subcommand(bench)) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = load_config(config_path);
      if (b_family->count()) cfg.family = parse_family(family);
      if (b_n->count()) cfg.n = n;
      if (b_k->count()) cfg.k = k;
      if (b_fraction->count()) cfg.fraction = fraction;
      if (b_count->count()) cfg.training = static_cast<std::uint64_t>(count);
      if (b_tau->count()) cfg.tau = tau;
      if (b_alpha->count()) cfg.alpha = alpha;
      if (b_level->count()) cfg.level = level;
      if (b_seed->count()) cfg.seed = seed;
      if (b_fold->count()) cfg.fold_cmd = fold_cmd;
      if (b_workers->count()) cfg.workers = workers;
      if (b_out->count()) cfg.out = out;
      if (b_budget->count()) {
        cfg.budget_kind = BudgetKind::kPlayouts;
        apply_setting(cfg, "budgets", budget_list);
      }
      if (b_time->count()) {
        cfg.budget_kind = BudgetKind::kSeconds;
        apply_setting(cfg, "budgets", time_list);
      }
      validate_config(cfg);
      return cmd_bench(cfg);
    }
    if (app.got_subcommand(hist)) return cmd_histogram(prior_path, out);
    if (app.got_subcommand(sweep))
      return cmd_phase_sweep(n, count, budget, seed, workers, out);
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const OracleError& e) {
    std::fprintf(stderr, "oracle error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
