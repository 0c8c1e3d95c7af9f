#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcprior/policy.hpp"
#include "mcprior/prior.hpp"
#include "mcprior/problem.hpp"
#include "mcprior/rng.hpp"

namespace mcprior {

// Inverse RNA folding: pick nucleotides for a target secondary structure in
// dot-bracket notation until the designed sequence folds into the target.

// Move tokens. 0..3 write one unpaired base at a '.' position, 4..9 write an
// ordered base pair onto a '(' position and its partner.
inline constexpr int kRnaTokens = 10;
inline constexpr const char* kRnaTokenName[kRnaTokens] = {
    "A", "C", "G", "U", "CG", "GC", "GU", "UG", "AU", "UA"};

constexpr bool rna_token_is_pair(int t) { return t >= 4; }
char rna_token_first(int t);   // the base written at the decision position
char rna_token_second(int t);  // pair tokens only: the base at the partner

// Token for an ordered base pair, or -1 when the pair is not one of the six
// allowed ones (CG, GC, GU, UG, AU, UA).
int rna_pair_token(char first, char second);
// Token writing base c at an unpaired position, or -1.
int rna_base_token(char c);

struct TargetStructure {
  std::string chars;          // over '.', '(', ')'
  std::vector<int> pair_map;  // partner index for brackets, -1 for '.'
};

// Stack matching; DataError names the offending position.
TargetStructure parse_dotbracket(const std::string& text);

struct RnaInstance {
  TargetStructure target;
  // Optional imposed bases: same length as the target, 'N' = free. Empty
  // means unconstrained.
  std::string mask;
};

struct RnaSolution {
  std::string sequence;  // over A, C, G, U; same length as the target
};

struct RnaMove {
  int token = 0;
  friend auto operator<=>(const RnaMove&, const RnaMove&) = default;
};

// cursor rests on the next decision position ('.' or '(', never ')'), or
// past the end when complete. prev_token feeds the bigram prior code; -1
// marks the start of the sequence.
struct RnaState {
  const RnaInstance* inst = nullptr;
  std::string filled;  // '?' until written
  int cursor = 0;
  int decision_index = 0;
  int prev_token = -1;
};

// Produces a dot-bracket structure of the same length for a sequence over
// A, C, G, U. Implementations with an external engine throw OracleError on
// any protocol violation instead of degrading.
class FoldingOracle {
 public:
  virtual ~FoldingOracle() = default;
  virtual std::string fold(const std::string& sequence) = 0;
};

// Maximum base pairing dynamic program over the six allowed pairs with a
// minimum hairpin loop of 3 unpaired positions; ties resolved toward the
// leftmost opening position, so folds are deterministic.
class NussinovFolder : public FoldingOracle {
 public:
  std::string fold(const std::string& sequence) override;
};

// Runs a user-supplied command (via /bin/sh) speaking a line protocol: one
// sequence in, one dot-bracket line of equal length out. The engine process
// is kept alive across calls.
class ExternalFolder : public FoldingOracle {
 public:
  explicit ExternalFolder(const std::string& command);
  ~ExternalFolder() override;
  ExternalFolder(const ExternalFolder&) = delete;
  ExternalFolder& operator=(const ExternalFolder&) = delete;
  std::string fold(const std::string& sequence) override;

 private:
  std::string command_;
  int pid_ = -1;
  int to_engine_ = -1;
  int from_engine_ = -1;
  std::string buffer_;
};

// Search plugin. A playout scans decision positions left to right; score of
// a complete state is minus the number of positions where the folded
// structure differs from the target, so 0 means solved.
class RnaProblem {
 public:
  using Instance = RnaInstance;
  using State = RnaState;
  using Move = RnaMove;
  using Solution = RnaSolution;

  FoldingOracle* folder = nullptr;  // required by score(), not owned

  State root(const Instance& inst) const;
  bool is_terminal(const State& s) const {
    return s.cursor >= static_cast<int>(s.inst->target.chars.size());
  }
  void legal_moves(const State& s, std::vector<Move>& out) const;
  void play(State& s, const Move& m) const;
  double score(const State& s) const;
  double solved_score(const Instance&) const { return 0.0; }

  MoveCode policy_code(const State& s, const Move& m) const {
    return (static_cast<MoveCode>(s.decision_index) << 4) |
           static_cast<MoveCode>(m.token);
  }
  // Bigram over decision tokens: (previous token + 1) << 4 | token. The
  // structure character is implied by the token class, so this matches a
  // code over (previous char, previous move, char, move). Codes with a
  // previous token are the at most 10 x 10 regular ones; the << 4 field 0
  // marks the start sentinel.
  PriorCode prior_code(const State& s, const Move& m) const {
    return (static_cast<PriorCode>(s.prev_token + 1) << 4) |
           static_cast<PriorCode>(m.token);
  }

  Move solution_move(const State& s, const Solution& sol) const;
  std::optional<std::string> validate_solution(const Instance& inst,
                                               const Solution& sol) const;
};
static_assert(SearchProblem<RnaProblem>);

// Folds a random sequence of the given length and keeps (structure,
// sequence) as an achievable puzzle with a known solution.
InstanceSolutionPair<RnaProblem> generate_rna_pair(int length,
                                                   FoldingOracle& folder,
                                                   Rng& rng);

struct NgramReplayReport {
  std::uint64_t accepted = 0;
  std::uint64_t skipped = 0;  // disallowed base pair or stray letters
};

// Replays each (target, sequence) record move by move and accumulates the
// bigram statistics: the chosen token's code gains a count, every token
// legal at that position gains an availability. Records whose bracket
// positions hold a pair outside the six allowed, or letters outside
// A,C,G,U, are skipped and reported; a length mismatch throws DataError.
// The sequences need not fold back into their targets.
NgramReplayReport ngram_replay(const std::vector<TargetStructure>& targets,
                               const std::vector<std::string>& sequences,
                               PriorTable& table);

struct RnaCorpus {
  std::vector<TargetStructure> targets;
  std::vector<std::string> sequences;
  std::uint64_t skipped = 0;  // malformed records dropped by the loader
};

// Corpus format: records of two lines, structure then sequence, separated
// by blank lines. Malformed records are skipped and counted, not fatal.
RnaCorpus load_rna_corpus(const std::string& path);
void save_rna_corpus(const std::string& path,
                     const std::vector<TargetStructure>& targets,
                     const std::vector<std::string>& sequences);

// Puzzle format: one dot-bracket line, optional second line with the
// imposed-base mask ('N' = free).
RnaInstance load_rna_puzzle(const std::string& path);
void save_rna_puzzle(const std::string& path, const RnaInstance& inst);

}  // namespace mcprior
