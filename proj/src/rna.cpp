#include "mcprior/rna.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>
#include <utility>

#include "mcprior/errors.hpp"

namespace mcprior {

char rna_token_first(int t) {
  if (t < 0 || t >= kRnaTokens)
    throw ContractViolation("rna: token out of range");
  return kRnaTokenName[t][0];
}

char rna_token_second(int t) {
  if (!rna_token_is_pair(t))
    throw ContractViolation("rna: second base of a non-pair token");
  return kRnaTokenName[t][1];
}

int rna_pair_token(char first, char second) {
  for (int t = 4; t < kRnaTokens; ++t)
    if (kRnaTokenName[t][0] == first && kRnaTokenName[t][1] == second)
      return t;
  return -1;
}

int rna_base_token(char c) {
  for (int t = 0; t < 4; ++t)
    if (kRnaTokenName[t][0] == c) return t;
  return -1;
}

TargetStructure parse_dotbracket(const std::string& text) {
  TargetStructure t;
  t.chars = text;
  t.pair_map.assign(text.size(), -1);
  std::vector<int> stack;
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (text[i]) {
      case '.':
        break;
      case '(':
        stack.push_back(static_cast<int>(i));
        break;
      case ')':
        if (stack.empty())
          throw DataError("dot-bracket position " + std::to_string(i) +
                          ": unmatched ')'");
        t.pair_map[i] = stack.back();
        t.pair_map[stack.back()] = static_cast<int>(i);
        stack.pop_back();
        break;
      default:
        throw DataError("dot-bracket position " + std::to_string(i) +
                        ": stray character '" + text[i] + "'");
    }
  }
  if (!stack.empty())
    throw DataError("dot-bracket position " + std::to_string(stack.back()) +
                    ": unmatched '('");
  return t;
}

namespace {

int skip_closers(const TargetStructure& t, int pos) {
  const int n = static_cast<int>(t.chars.size());
  while (pos < n && t.chars[pos] == ')') ++pos;
  return pos;
}

// 0 when the mask leaves the position free.
char fixed_base(const RnaInstance& inst, int pos) {
  if (inst.mask.empty() || inst.mask[pos] == 'N') return 0;
  return inst.mask[pos];
}

void tokens_at(const RnaInstance& inst, int pos, std::vector<RnaMove>& out) {
  const char c = inst.target.chars[pos];
  if (c == '.') {
    const char f = fixed_base(inst, pos);
    for (int t = 0; t < 4; ++t)
      if (!f || kRnaTokenName[t][0] == f) out.push_back({t});
  } else {
    const char f = fixed_base(inst, pos);
    const char g = fixed_base(inst, inst.target.pair_map[pos]);
    for (int t = 4; t < kRnaTokens; ++t)
      if ((!f || kRnaTokenName[t][0] == f) && (!g || kRnaTokenName[t][1] == g))
        out.push_back({t});
  }
}

void check_structure(const TargetStructure& t) {
  const int n = static_cast<int>(t.chars.size());
  if (static_cast<int>(t.pair_map.size()) != n)
    throw DataError("rna: pair map out of sync with the structure");
  for (int i = 0; i < n; ++i) {
    const char c = t.chars[i];
    const int p = t.pair_map[i];
    if (c == '.' && p != -1)
      throw DataError("rna: unpaired position " + std::to_string(i) +
                      " has a partner");
    if (c == '(' &&
        (p <= i || p >= n || t.chars[p] != ')' || t.pair_map[p] != i))
      throw DataError("rna: broken pair at position " + std::to_string(i));
    if (c == ')' && (p < 0 || p >= i || t.chars[p] != '(' ||
                     t.pair_map[p] != i))
      throw DataError("rna: broken pair at position " + std::to_string(i));
    if (c != '.' && c != '(' && c != ')')
      throw DataError("rna: stray character in the structure at position " +
                      std::to_string(i));
  }
}

void check_mask(const RnaInstance& inst) {
  if (inst.mask.empty()) return;
  if (inst.mask.size() != inst.target.chars.size())
    throw DataError("rna: mask length differs from the target");
  for (std::size_t i = 0; i < inst.mask.size(); ++i) {
    const char m = inst.mask[i];
    if (m != 'N' && rna_base_token(m) < 0)
      throw DataError("rna: mask position " + std::to_string(i) +
                      " must be one of N, A, C, G, U");
  }
}

}  // namespace

RnaState RnaProblem::root(const Instance& inst) const {
  check_structure(inst.target);
  check_mask(inst);
  std::vector<Move> probe;
  const int n = static_cast<int>(inst.target.chars.size());
  for (int pos = 0; pos < n; ++pos) {
    if (inst.target.chars[pos] == ')') continue;
    probe.clear();
    tokens_at(inst, pos, probe);
    if (probe.empty())
      throw DataError("rna: mask leaves position " + std::to_string(pos) +
                      " without a legal move");
  }
  RnaState s;
  s.inst = &inst;
  s.filled.assign(inst.target.chars.size(), '?');
  s.cursor = skip_closers(inst.target, 0);
  return s;
}

void RnaProblem::legal_moves(const State& s, std::vector<Move>& out) const {
  out.clear();
  if (is_terminal(s)) return;
  tokens_at(*s.inst, s.cursor, out);
}

void RnaProblem::play(State& s, const Move& m) const {
  const auto& t = s.inst->target;
  if (is_terminal(s) || m.token < 0 || m.token >= kRnaTokens)
    throw ContractViolation("rna: play of an illegal move");
  const int pos = s.cursor;
  const bool pair = rna_token_is_pair(m.token);
  if ((t.chars[pos] == '.') == pair)
    throw ContractViolation("rna: move token does not fit the position");
  const char first = rna_token_first(m.token);
  const char want = fixed_base(*s.inst, pos);
  if (want && want != first)
    throw ContractViolation("rna: move violates the imposed base");
  s.filled[pos] = first;
  if (pair) {
    const int partner = t.pair_map[pos];
    const char second = rna_token_second(m.token);
    const char want2 = fixed_base(*s.inst, partner);
    if (want2 && want2 != second)
      throw ContractViolation("rna: move violates the imposed base");
    s.filled[partner] = second;
  }
  s.prev_token = m.token;
  ++s.decision_index;
  s.cursor = skip_closers(t, pos + 1);
}

double RnaProblem::score(const State& s) const {
  if (!is_terminal(s))
    throw ContractViolation("rna: score of an incomplete state");
  if (folder == nullptr)
    throw ContractViolation("rna: no folding engine configured");
  const auto& target = s.inst->target.chars;
  if (target.empty()) return 0.0;
  const std::string folded = folder->fold(s.filled);
  int diff = 0;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (folded[i] != target[i]) ++diff;
  return -diff;
}

RnaMove RnaProblem::solution_move(const State& s, const Solution& sol) const {
  const auto& t = s.inst->target;
  if (sol.sequence.size() != t.chars.size())
    throw DataError("rna: solution length differs from the target");
  if (is_terminal(s))
    throw DataError("rna: no decision left to read from the solution");
  const int pos = s.cursor;
  if (t.chars[pos] == '.') {
    int token = rna_base_token(sol.sequence[pos]);
    if (token < 0)
      throw DataError("rna: solution position " + std::to_string(pos) +
                      " is not a base");
    return {token};
  }
  const int partner = t.pair_map[pos];
  int token = rna_pair_token(sol.sequence[pos], sol.sequence[partner]);
  if (token < 0)
    throw DataError("rna: solution pair at positions " + std::to_string(pos) +
                    "," + std::to_string(partner) +
                    " is not one of the six allowed");
  return {token};
}

std::optional<std::string> RnaProblem::validate_solution(
    const Instance& inst, const Solution& sol) const {
  const auto& t = inst.target;
  const int n = static_cast<int>(t.chars.size());
  if (static_cast<int>(sol.sequence.size()) != n)
    return std::string("solution length differs from the target");
  for (int i = 0; i < n; ++i)
    if (rna_base_token(sol.sequence[i]) < 0)
      return "solution position " + std::to_string(i) +
             " is not one of A, C, G, U";
  for (int i = 0; i < n; ++i) {
    if (t.chars[i] != '(') continue;
    if (rna_pair_token(sol.sequence[i], sol.sequence[t.pair_map[i]]) < 0)
      return "positions " + std::to_string(i) + "," +
             std::to_string(t.pair_map[i]) +
             " do not hold one of the six allowed pairs";
  }
  if (!inst.mask.empty()) {
    if (inst.mask.size() != t.chars.size())
      return std::string("mask length differs from the target");
    for (int i = 0; i < n; ++i)
      if (inst.mask[i] != 'N' && inst.mask[i] != sol.sequence[i])
        return "solution violates the imposed base at position " +
               std::to_string(i);
  }
  return std::nullopt;
}

namespace {

bool allowed_pair(char a, char b) { return rna_pair_token(a, b) >= 0; }

}  // namespace

std::string NussinovFolder::fold(const std::string& sequence) {
  const int n = static_cast<int>(sequence.size());
  for (char c : sequence)
    if (rna_base_token(c) < 0)
      throw DataError("fold: sequence must be over A, C, G, U");
  if (n == 0) return "";
  // M[i][j]: maximum pairs within sequence[i..j], hairpin loop >= 3.
  std::vector<std::vector<int>> M(n, std::vector<int>(n, 0));
  for (int span = 4; span < n; ++span)
    for (int i = 0; i + span < n; ++i) {
      const int j = i + span;
      int best = M[i][j - 1];
      for (int k = i; k <= j - 4; ++k) {
        if (!allowed_pair(sequence[k], sequence[j])) continue;
        const int v = (k > i ? M[i][k - 1] : 0) + 1 + M[k + 1][j - 1];
        if (v > best) best = v;
      }
      M[i][j] = best;
    }
  std::string out(sequence.size(), '.');
  std::vector<std::pair<int, int>> segments{{0, n - 1}};
  while (!segments.empty()) {
    auto [i, j] = segments.back();
    segments.pop_back();
    while (j - i >= 4) {
      int opener = -1;
      for (int k = i; k <= j - 4; ++k) {
        if (!allowed_pair(sequence[k], sequence[j])) continue;
        if ((k > i ? M[i][k - 1] : 0) + 1 + M[k + 1][j - 1] == M[i][j]) {
          opener = k;
          break;
        }
      }
      if (opener < 0) {
        --j;
        continue;
      }
      out[opener] = '(';
      out[j] = ')';
      segments.emplace_back(opener + 1, j - 1);
      j = opener - 1;
    }
  }
  return out;
}

ExternalFolder::ExternalFolder(const std::string& command)
    : command_(command) {
  // A dying engine should surface as a write error, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0)
    throw OracleError("folding engine: pipe creation failed");
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw OracleError("folding engine: pipe creation failed");
  }
  pid_ = fork();
  if (pid_ < 0) {
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    throw OracleError("folding engine: fork failed");
  }
  if (pid_ == 0) {
    dup2(to_child[0], 0);
    dup2(from_child[1], 1);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  to_engine_ = to_child[1];
  from_engine_ = from_child[0];
}

ExternalFolder::~ExternalFolder() {
  if (to_engine_ >= 0) close(to_engine_);
  if (from_engine_ >= 0) close(from_engine_);
  if (pid_ > 0) {
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) != 0) return;
      usleep(10000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }
}

std::string ExternalFolder::fold(const std::string& sequence) {
  for (char c : sequence)
    if (rna_base_token(c) < 0)
      throw DataError("fold: sequence must be over A, C, G, U");
  const std::string msg = sequence + "\n";
  const char* p = msg.data();
  std::size_t left = msg.size();
  while (left > 0) {
    const ssize_t w = write(to_engine_, p, left);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw OracleError("folding engine '" + command_ +
                        "': write failed: " + std::strerror(errno));
    }
    p += w;
    left -= static_cast<std::size_t>(w);
  }
  std::string line;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      break;
    }
    char chunk[4096];
    const ssize_t r = read(from_engine_, chunk, sizeof chunk);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw OracleError("folding engine '" + command_ +
                        "': read failed: " + std::strerror(errno));
    }
    if (r == 0)
      throw OracleError("folding engine '" + command_ +
                        "' closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(r));
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() != sequence.size())
    throw OracleError("folding engine '" + command_ + "' returned " +
                      std::to_string(line.size()) +
                      " characters for a sequence of " +
                      std::to_string(sequence.size()));
  try {
    parse_dotbracket(line);
  } catch (const DataError& e) {
    throw OracleError("folding engine '" + command_ +
                      "' returned an invalid structure: " + e.what());
  }
  return line;
}

InstanceSolutionPair<RnaProblem> generate_rna_pair(int length,
                                                   FoldingOracle& folder,
                                                   Rng& rng) {
  if (length < 0) throw DataError("rna generation: negative length");
  RnaProblem p;
  const char bases[4] = {'A', 'C', 'G', 'U'};
  for (;;) {
    std::string seq(static_cast<std::size_t>(length), 'A');
    for (auto& ch : seq) ch = bases[rng.below(4)];
    RnaInstance inst{parse_dotbracket(folder.fold(seq)), {}};
    RnaSolution sol{std::move(seq)};
    // An engine pairing letters outside the six allowed pairs would make
    // the record unreplayable; draw again in that case.
    if (p.validate_solution(inst, sol) == std::nullopt)
      return {std::move(inst), std::move(sol)};
  }
}

NgramReplayReport ngram_replay(const std::vector<TargetStructure>& targets,
                               const std::vector<std::string>& sequences,
                               PriorTable& table) {
  if (targets.size() != sequences.size())
    throw DataError("ngram replay: " + std::to_string(targets.size()) +
                    " targets vs " + std::to_string(sequences.size()) +
                    " sequences");
  NgramReplayReport rep;
  RnaProblem prob;
  std::vector<RnaMove> moves;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].chars.size() != sequences[i].size())
      throw DataError("ngram replay: record " + std::to_string(i) +
                      ": sequence length differs from the structure");
    const RnaInstance inst{targets[i], {}};
    const RnaSolution sol{sequences[i]};
    std::vector<PriorCode> legal, chosen;
    bool ok = true;
    auto s = prob.root(inst);
    while (!prob.is_terminal(s)) {
      RnaMove mv;
      try {
        mv = prob.solution_move(s, sol);
      } catch (const DataError&) {
        ok = false;
        break;
      }
      prob.legal_moves(s, moves);
      for (const auto& m : moves) legal.push_back(prob.prior_code(s, m));
      chosen.push_back(prob.prior_code(s, mv));
      prob.play(s, mv);
    }
    if (!ok) {
      ++rep.skipped;
      continue;
    }
    for (PriorCode c : legal) table.add_legal(c);
    for (PriorCode c : chosen) table.add_chosen(c);
    table.instances += 1;
    ++rep.accepted;
  }
  return rep;
}

RnaCorpus load_rna_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  RnaCorpus out;
  std::vector<std::string> block;
  auto flush_block = [&] {
    if (block.empty()) return;
    bool ok = block.size() == 2;
    if (ok)
      for (char c : block[1])
        if (rna_base_token(c) < 0) ok = false;
    if (ok && block[0].size() != block[1].size()) ok = false;
    if (ok) {
      try {
        out.targets.push_back(parse_dotbracket(block[0]));
        out.sequences.push_back(block[1]);
      } catch (const DataError&) {
        ok = false;
      }
    }
    if (!ok) ++out.skipped;
    block.clear();
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      flush_block();
    else
      block.push_back(line);
  }
  flush_block();
  return out;
}

void save_rna_corpus(const std::string& path,
                     const std::vector<TargetStructure>& targets,
                     const std::vector<std::string>& sequences) {
  if (targets.size() != sequences.size())
    throw DataError("corpus save: " + std::to_string(targets.size()) +
                    " targets vs " + std::to_string(sequences.size()) +
                    " sequences");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < targets.size(); ++i)
    out << targets[i].chars << "\n" << sequences[i] << "\n\n";
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

RnaInstance load_rna_puzzle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  if (lines.empty())
    throw DataError(path + ": no dot-bracket line found");
  if (lines.size() > 2)
    throw DataError(path + ": expected a structure and an optional mask");
  RnaInstance inst;
  try {
    inst.target = parse_dotbracket(lines[0]);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  if (lines.size() == 2) inst.mask = lines[1];
  RnaProblem p;
  try {
    (void)p.root(inst);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  return inst;
}

void save_rna_puzzle(const std::string& path, const RnaInstance& inst) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << inst.target.chars << "\n";
  if (!inst.mask.empty()) out << inst.mask << "\n";
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace mcprior
