#include "mcprior/bench.hpp"

#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "mcprior/kakuro.hpp"
#include "mcprior/latin_square.hpp"
#include "mcprior/rna.hpp"
#include "mcprior/search.hpp"

namespace mcprior {

const char* family_name(Family f) {
  switch (f) {
    case Family::kLsc: return "lsc";
    case Family::kKakuro: return "kakuro";
    case Family::kRna: return "rna";
  }
  return "?";
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kSampling: return "sampling";
    case Algorithm::kSamplingPrior: return "sampling+prior";
    case Algorithm::kNrpa: return "nrpa";
    case Algorithm::kGnrpaPrior: return "gnrpa+prior";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "lsc") return Family::kLsc;
  if (s == "kakuro") return Family::kKakuro;
  if (s == "rna") return Family::kRna;
  throw DataError("unknown family '" + s + "' (expected lsc, kakuro or rna)");
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "sampling") return Algorithm::kSampling;
  if (s == "sampling+prior") return Algorithm::kSamplingPrior;
  if (s == "nrpa") return Algorithm::kNrpa;
  if (s == "gnrpa+prior") return Algorithm::kGnrpaPrior;
  throw DataError("unknown algorithm '" + s +
                  "' (expected sampling, sampling+prior, nrpa or gnrpa+prior)");
}

std::string render_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw DataError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  int x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw DataError(key + ": expected an integer, got '" + v + "'");
  return x;
}

double parse_dbl(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty() || !std::isfinite(x))
    throw DataError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value) {
  if (key == "family") {
    cfg.family = parse_family(value);
  } else if (key == "n") {
    cfg.n = parse_int(key, value);
  } else if (key == "k") {
    cfg.k = parse_int(key, value);
  } else if (key == "fraction") {
    cfg.fraction = parse_dbl(key, value);
  } else if (key == "training") {
    cfg.training = parse_u64(key, value);
  } else if (key == "test") {
    cfg.test = parse_u64(key, value);
  } else if (key == "algorithms") {
    cfg.algorithms.clear();
    for (const auto& item : split_list(value))
      cfg.algorithms.push_back(parse_algorithm(item));
  } else if (key == "budget_kind") {
    if (value == "playouts")
      cfg.budget_kind = BudgetKind::kPlayouts;
    else if (value == "seconds")
      cfg.budget_kind = BudgetKind::kSeconds;
    else
      throw DataError("budget_kind: expected playouts or seconds, got '" +
                      value + "'");
  } else if (key == "budgets") {
    cfg.budgets.clear();
    for (const auto& item : split_list(value))
      cfg.budgets.push_back(parse_dbl(key, item));
  } else if (key == "tau") {
    cfg.tau = parse_dbl(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_dbl(key, value);
  } else if (key == "level") {
    cfg.level = parse_int(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "fold_cmd") {
    cfg.fold_cmd = value;
  } else if (key == "workers") {
    cfg.workers = static_cast<unsigned>(parse_u64(key, value));
  } else if (key == "out") {
    cfg.out = value;
  } else {
    throw DataError("unknown config key '" + key + "'");
  }
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw DataError("n must be at least 1");
  if (cfg.family == Family::kKakuro && cfg.k != 0 &&
      (cfg.k < cfg.n || cfg.k > 64))
    throw DataError("kakuro needs n <= k <= 64 (or k = 0 for n+1)");
  if (cfg.fraction < 0.0 || cfg.fraction > 1.0)
    throw DataError("fraction must lie in [0, 1]");
  if (cfg.tau < 0.0) throw DataError("tau must be non-negative");
  if (cfg.alpha <= 0.0) throw DataError("alpha must be positive");
  if (cfg.level < 1) throw DataError("level must be at least 1");
  if (cfg.algorithms.empty()) throw DataError("no algorithms selected");
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.algorithms.size(); ++j)
      if (cfg.algorithms[i] == cfg.algorithms[j])
        throw DataError(std::string("algorithm listed twice: ") +
                        algorithm_name(cfg.algorithms[i]));
  if (cfg.budgets.empty()) throw DataError("no budgets given");
  for (std::size_t i = 0; i < cfg.budgets.size(); ++i) {
    if (cfg.budgets[i] <= 0.0) throw DataError("budgets must be positive");
    if (i > 0 && cfg.budgets[i] <= cfg.budgets[i - 1])
      throw DataError("budgets must be strictly increasing");
    if (cfg.budget_kind == BudgetKind::kPlayouts &&
        cfg.budgets[i] != std::floor(cfg.budgets[i]))
      throw DataError("playout budgets must be whole numbers");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected key = value");
    try {
      apply_setting(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const DataError& e) {
      throw DataError("config line " + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "family = " << family_name(cfg.family) << "\n";
  out << "n = " << cfg.n << "\n";
  out << "k = " << cfg.k << "\n";
  out << "fraction = " << render_double(cfg.fraction) << "\n";
  out << "training = " << cfg.training << "\n";
  out << "test = " << cfg.test << "\n";
  out << "algorithms = ";
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
    out << (i ? "," : "") << algorithm_name(cfg.algorithms[i]);
  out << "\n";
  out << "budget_kind = "
      << (cfg.budget_kind == BudgetKind::kPlayouts ? "playouts" : "seconds")
      << "\n";
  out << "budgets = ";
  for (std::size_t i = 0; i < cfg.budgets.size(); ++i) {
    out << (i ? "," : "");
    if (cfg.budget_kind == BudgetKind::kPlayouts)
      out << static_cast<std::uint64_t>(cfg.budgets[i]);
    else
      out << render_double(cfg.budgets[i]);
  }
  out << "\n";
  out << "tau = " << render_double(cfg.tau) << "\n";
  out << "alpha = " << render_double(cfg.alpha) << "\n";
  out << "level = " << cfg.level << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "fold_cmd = " << cfg.fold_cmd << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "out = " << cfg.out << "\n";
  return out.str();
}

std::string bench_csv(const BenchResults& r) {
  std::ostringstream out;
  out << "algorithm,budget,solved,total\n";
  for (std::size_t a = 0; a < r.algorithms.size(); ++a)
    for (std::size_t b = 0; b < r.budgets.size(); ++b) {
      out << algorithm_name(r.algorithms[a]) << ',';
      if (r.budget_kind == BudgetKind::kPlayouts)
        out << static_cast<std::uint64_t>(r.budgets[b]);
      else
        out << render_double(r.budgets[b]);
      out << ',' << r.solved[a][b] << ',' << r.total << "\n";
    }
  return out.str();
}

std::string histogram_csv(const FrequencyHistogram& h) {
  std::ostringstream out;
  out << "bucket,count\n";
  out << "0.0," << h.exact_zero << "\n";
  for (std::size_t i = 0; i < h.buckets.size(); ++i) {
    char lo[32], hi[32];
    std::snprintf(lo, sizeof lo, "%.6g", static_cast<double>(i) * h.bucket_width);
    std::snprintf(hi, sizeof hi, "%.6g",
                  static_cast<double>(i + 1) * h.bucket_width);
    std::uint64_t c = h.buckets[i];
    if (i == 0) c -= h.exact_zero;  // buckets[0] includes the exact zeros
    out << '[' << lo << ',' << hi << ")," << c << "\n";
  }
  out << "1.0," << h.exact_one << "\n";
  out << "total," << h.total << "\n";
  return out.str();
}

namespace {

int kakuro_k(const ExperimentConfig& cfg) {
  return cfg.k == 0 ? cfg.n + 1 : cfg.k;
}

std::unique_ptr<FoldingOracle> make_folder(const ExperimentConfig& cfg) {
  if (cfg.fold_cmd.empty()) return std::make_unique<NussinovFolder>();
  return std::make_unique<ExternalFolder>(cfg.fold_cmd);
}

// Per-family glue: generation, prior accumulation, instance hashing and
// rendering. One driver per worker thread; rna drivers own their folder.
struct LscDriver {
  using Problem = LatinProblem;
  Problem problem;

  explicit LscDriver(const ExperimentConfig&) {}

  InstanceSolutionPair<Problem> generate(const ExperimentConfig& cfg,
                                         Rng& rng) {
    auto full = generate_complete_square(cfg.n, rng);
    return make_instance(full, cfg.fraction, rng);
  }
  void accumulate(const InstanceSolutionPair<Problem>& pr, PriorTable& t) {
    replay(problem, pr.instance, pr.solution, t);
  }
  std::string key(const LatinInstance& inst) const {
    std::string s = std::to_string(inst.n);
    for (int v : inst.grid) {
      s += ',';
      s += std::to_string(v);
    }
    return s;
  }
  std::string render(const LatinState& s) const {
    std::string out;
    for (int r = 0; r < s.n; ++r) {
      for (int c = 0; c < s.n; ++c) {
        if (c) out += ' ';
        out += std::to_string(s.grid[static_cast<std::size_t>(r * s.n + c)]);
      }
      out += '\n';
    }
    return out;
  }
  LatinInstance load(const std::string& path) const {
    return load_latin_pair(path).instance;
  }
};

struct KakuroDriver {
  using Problem = KakuroProblem;
  Problem problem;

  // Replay and search both run plain forward checking: sum-breaking values
  // stay visible, so the replayed statistics carry the sum knowledge and
  // the searches are graded on recovering it from the bias alone.
  explicit KakuroDriver(const ExperimentConfig&) {
    problem.use_sum_bounds = false;
  }

  InstanceSolutionPair<Problem> generate(const ExperimentConfig& cfg,
                                         Rng& rng) {
    return generate_kakuro(cfg.n, kakuro_k(cfg), rng);
  }
  void accumulate(const InstanceSolutionPair<Problem>& pr, PriorTable& t) {
    replay(problem, pr.instance, pr.solution, t);
  }
  std::string key(const KakuroInstance& inst) const {
    std::string s = std::to_string(inst.n) + "," + std::to_string(inst.k);
    for (int v : inst.row_sums) s += "," + std::to_string(v);
    for (int v : inst.col_sums) s += "," + std::to_string(v);
    return s;
  }
  std::string render(const KakuroState& s) const {
    std::string out;
    for (int r = 0; r < s.n; ++r) {
      for (int c = 0; c < s.n; ++c) {
        if (c) out += ' ';
        out += std::to_string(s.grid[static_cast<std::size_t>(r * s.n + c)]);
      }
      out += '\n';
    }
    return out;
  }
  KakuroInstance load(const std::string& path) const {
    return load_kakuro_pair(path).instance;
  }
};

struct RnaDriver {
  using Problem = RnaProblem;
  std::unique_ptr<FoldingOracle> folder;
  Problem problem;

  explicit RnaDriver(const ExperimentConfig& cfg) : folder(make_folder(cfg)) {
    problem.folder = folder.get();
  }

  InstanceSolutionPair<Problem> generate(const ExperimentConfig& cfg,
                                         Rng& rng) {
    return generate_rna_pair(cfg.n, *folder, rng);
  }
  void accumulate(const InstanceSolutionPair<Problem>& pr, PriorTable& t) {
    std::vector<TargetStructure> targets{pr.instance.target};
    std::vector<std::string> seqs{pr.solution.sequence};
    auto rep = ngram_replay(targets, seqs, t);
    if (rep.skipped) throw DataError("generated rna pair failed to replay");
  }
  std::string key(const RnaInstance& inst) const {
    return inst.target.chars + "|" + inst.mask;
  }
  std::string render(const RnaState& s) const { return s.filled + "\n"; }
  RnaInstance load(const std::string& path) const {
    return load_rna_puzzle(path);
  }
};

// One instance under one algorithm, run once at the top budget with the
// solved score as stop condition. Nested searches restart until a limit
// trips so the whole budget is spent.
template <typename Problem, typename Bias>
PlayoutResult<Problem> run_to_budget(const Problem& problem,
                                     const typename Problem::Instance& inst,
                                     const ExperimentConfig& cfg, bool nested,
                                     const Bias& bias, Rng& rng,
                                     SearchContext& ctx) {
  if (!nested) return flat_sampling(problem, inst, Policy{}, bias, rng, ctx);
  SearchParams params;
  params.level = cfg.level;
  params.alpha = cfg.alpha;
  params.iterations =
      cfg.budget_kind == BudgetKind::kPlayouts
          ? iterations_for_budget(
                static_cast<std::uint64_t>(cfg.budgets.back()), cfg.level)
          : 100;
  if (params.iterations < 1) params.iterations = 1;
  PlayoutResult<Problem> best;
  while (!ctx.should_stop()) {
    auto r = gnrpa(problem, inst, cfg.level, params, Policy{}, bias, rng, ctx);
    if (r.score >= best.score) best = std::move(r);
  }
  return best;
}

template <typename Problem>
PlayoutResult<Problem> run_algorithm(const Problem& problem,
                                     const typename Problem::Instance& inst,
                                     const ExperimentConfig& cfg, Algorithm a,
                                     const PriorBias& bias, Rng& rng,
                                     SearchContext& ctx) {
  switch (a) {
    case Algorithm::kSampling:
      return run_to_budget(problem, inst, cfg, false, ZeroBias{}, rng, ctx);
    case Algorithm::kSamplingPrior:
      return run_to_budget(problem, inst, cfg, false, bias, rng, ctx);
    case Algorithm::kNrpa:
      return run_to_budget(problem, inst, cfg, true, ZeroBias{}, rng, ctx);
    case Algorithm::kGnrpaPrior:
      return run_to_budget(problem, inst, cfg, true, bias, rng, ctx);
  }
  throw ContractViolation("run_algorithm: bad algorithm");
}

bool uses_prior(Algorithm a) {
  return a == Algorithm::kSamplingPrior || a == Algorithm::kGnrpaPrior;
}

SearchContext make_context(const ExperimentConfig& cfg, double solved_score) {
  RunLimits lim;
  lim.stop_score = solved_score;
  if (cfg.budget_kind == BudgetKind::kPlayouts)
    lim.max_playouts = static_cast<std::uint64_t>(cfg.budgets.back());
  else
    lim.time_limit_s = cfg.budgets.back();
  return SearchContext(lim);
}

template <typename Driver>
BenchResults run_bench_impl(const ExperimentConfig& cfg, std::ostream* log) {
  BenchResults res;
  res.algorithms = cfg.algorithms;
  res.budget_kind = cfg.budget_kind;
  res.budgets = cfg.budgets;
  res.total = cfg.test;

  bool needs_prior = false;
  for (Algorithm a : cfg.algorithms) needs_prior |= uses_prior(a);

  Driver driver(cfg);
  PriorTable table;
  table.family = family_name(cfg.family);
  table.tau = cfg.tau;
  std::unordered_set<std::string> train_keys;
  if (needs_prior) {
    for (std::uint64_t i = 0; i < cfg.training; ++i) {
      Rng rng(derive_seed(cfg.seed, stream::kTrain, i));
      auto pr = driver.generate(cfg, rng);
      train_keys.insert(driver.key(pr.instance));
      driver.accumulate(pr, table);
      if (log && (i + 1) % 2000 == 0)
        *log << "trained on " << (i + 1) << " pairs\n";
    }
    table.validate();
    if (log)
      *log << "prior: " << table.size() << " codes from " << table.instances
           << " pairs\n";
  }
  PriorBias bias(table, {.tau = cfg.tau});

  std::vector<typename Driver::Problem::Instance> tests;
  tests.reserve(cfg.test);
  for (std::uint64_t i = 0; i < cfg.test; ++i) {
    Rng rng(derive_seed(cfg.seed, stream::kTest, i));
    auto pr = driver.generate(cfg, rng);
    if (train_keys.count(driver.key(pr.instance)))
      throw DataError("test instance " + std::to_string(i) +
                      " duplicates a training instance; change the seed");
    tests.push_back(std::move(pr.instance));
  }

  const std::size_t na = cfg.algorithms.size(), ni = tests.size();
  std::vector<std::optional<double>> first_solve(na * ni);
  std::atomic<std::size_t> cursor{0};
  std::mutex fail_mutex;
  std::exception_ptr failure;

  auto work = [&] {
    try {
      Driver local(cfg);
      for (;;) {
        std::size_t t = cursor.fetch_add(1);
        if (t >= na * ni) break;
        const auto& inst = tests[t % ni];
        auto ctx = make_context(cfg, local.problem.solved_score(inst));
        Rng rng(derive_seed(cfg.seed, stream::kSearch, t));
        run_algorithm(local.problem, inst, cfg, cfg.algorithms[t / ni], bias,
                      rng, ctx);
        if (cfg.budget_kind == BudgetKind::kPlayouts) {
          if (ctx.solved_at())
            first_solve[t] = static_cast<double>(*ctx.solved_at());
        } else {
          first_solve[t] = ctx.solved_elapsed_s();
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> hold(fail_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  unsigned want = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  if (want < 1) want = 1;
  if (want > na * ni && na * ni > 0) want = static_cast<unsigned>(na * ni);
  if (want <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < want; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  res.solved.assign(na, std::vector<std::uint64_t>(cfg.budgets.size(), 0));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < cfg.budgets.size(); ++b)
      for (std::size_t i = 0; i < ni; ++i) {
        const auto& f = first_solve[a * ni + i];
        if (f && *f <= cfg.budgets[b]) ++res.solved[a][b];
      }
  if (log)
    for (std::size_t a = 0; a < na; ++a)
      *log << algorithm_name(cfg.algorithms[a]) << ": "
           << res.solved[a].back() << "/" << res.total
           << " at the top budget\n";
  return res;
}

}  // namespace

BenchResults run_bench(const ExperimentConfig& cfg, std::ostream* log) {
  validate_config(cfg);
  switch (cfg.family) {
    case Family::kLsc: return run_bench_impl<LscDriver>(cfg, log);
    case Family::kKakuro: return run_bench_impl<KakuroDriver>(cfg, log);
    case Family::kRna: return run_bench_impl<RnaDriver>(cfg, log);
  }
  throw ContractViolation("run_bench: bad family");
}

void generate_corpus(const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  if (cfg.n < 1) throw DataError("n must be at least 1");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw DataError("cannot write under " + dir);

  if (cfg.family == Family::kRna) {
    RnaDriver driver(cfg);
    std::vector<TargetStructure> targets;
    std::vector<std::string> seqs;
    for (std::uint64_t i = 0; i < cfg.training; ++i) {
      std::uint64_t s = derive_seed(cfg.seed, stream::kTrain, i);
      Rng rng(s);
      auto pr = driver.generate(cfg, rng);
      targets.push_back(std::move(pr.instance.target));
      seqs.push_back(std::move(pr.solution.sequence));
      manifest << i << ' ' << s << "\n";
    }
    save_rna_corpus((fs::path(dir) / "corpus.txt").string(), targets, seqs);
    return;
  }

  char name[32];
  for (std::uint64_t i = 0; i < cfg.training; ++i) {
    std::uint64_t s = derive_seed(cfg.seed, stream::kTrain, i);
    Rng rng(s);
    std::snprintf(name, sizeof name, "pair_%06llu.txt",
                  static_cast<unsigned long long>(i));
    const std::string path = (fs::path(dir) / name).string();
    if (cfg.family == Family::kLsc) {
      LscDriver driver(cfg);
      auto pr = driver.generate(cfg, rng);
      save_latin_pair(path, pr.instance, &pr.solution);
    } else {
      KakuroDriver driver(cfg);
      auto pr = driver.generate(cfg, rng);
      save_kakuro_pair(path, pr.instance, &pr.solution);
    }
    manifest << name << ' ' << s << "\n";
  }
}

LearnReport learn_prior_corpus(Family family, const std::string& path,
                               PriorTable& table) {
  namespace fs = std::filesystem;
  LearnReport rep;
  if (family == Family::kRna) {
    fs::path p(path);
    if (fs::is_directory(p)) p /= "corpus.txt";
    auto corpus = load_rna_corpus(p.string());
    rep.skipped += corpus.skipped;
    auto r = ngram_replay(corpus.targets, corpus.sequences, table);
    rep.pairs += r.accepted;
    rep.skipped += r.skipped;
    return rep;
  }

  std::ifstream manifest(fs::path(path) / "manifest.txt");
  if (!manifest)
    throw DataError("no manifest.txt under " + path +
                    " (expected a corpus directory)");
  std::string line;
  while (std::getline(manifest, line)) {
    std::istringstream in(line);
    std::string name;
    if (!(in >> name)) continue;
    const std::string file = (fs::path(path) / name).string();
    try {
      if (family == Family::kLsc) {
        auto pr = load_latin_pair(file);
        if (!pr.solution) throw DataError(file + ": no solution recorded");
        replay(LatinProblem{}, pr.instance, *pr.solution, table);
      } else {
        auto pr = load_kakuro_pair(file);
        if (!pr.solution) throw DataError(file + ": no solution recorded");
        KakuroProblem weak;
        weak.use_sum_bounds = false;  // matches the bench replay model
        replay(weak, pr.instance, *pr.solution, table);
      }
      ++rep.pairs;
    } catch (const DataError&) {
      ++rep.skipped;
    }
  }
  return rep;
}

namespace {

template <typename Driver>
SolveRecord solve_impl(const ExperimentConfig& cfg, Algorithm algorithm,
                       const std::string& instance_path,
                       const PriorTable* prior) {
  Driver driver(cfg);
  auto inst = driver.load(instance_path);

  PriorTable empty;
  if (uses_prior(algorithm) && !prior)
    throw DataError(std::string(algorithm_name(algorithm)) +
                    " needs a prior (--prior)");
  PriorBias bias(prior ? *prior : empty, {.tau = cfg.tau});

  auto ctx = make_context(cfg, driver.problem.solved_score(inst));
  Rng rng(derive_seed(cfg.seed, stream::kSearch, 0));
  auto t0 = std::chrono::steady_clock::now();
  auto best =
      run_algorithm(driver.problem, inst, cfg, algorithm, bias, rng, ctx);
  auto t1 = std::chrono::steady_clock::now();

  SolveRecord rec;
  rec.solved = ctx.solved();
  rec.score = ctx.best_score();
  rec.playouts_used = ctx.solved_at() ? *ctx.solved_at() : ctx.playouts();
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  rec.seed = cfg.seed;
  if (rec.solved) {
    auto s = driver.problem.root(inst);
    for (const auto& m : best.moves) driver.problem.play(s, m);
    rec.solution = driver.render(s);
  }
  return rec;
}

}  // namespace

SolveRecord solve_instance(const ExperimentConfig& cfg, Algorithm algorithm,
                           const std::string& instance_path,
                           const PriorTable* prior) {
  if (cfg.budgets.empty()) throw DataError("no budget given");
  switch (cfg.family) {
    case Family::kLsc:
      return solve_impl<LscDriver>(cfg, algorithm, instance_path, prior);
    case Family::kKakuro:
      return solve_impl<KakuroDriver>(cfg, algorithm, instance_path, prior);
    case Family::kRna:
      return solve_impl<RnaDriver>(cfg, algorithm, instance_path, prior);
  }
  throw ContractViolation("solve_instance: bad family");
}

}  // namespace mcprior
