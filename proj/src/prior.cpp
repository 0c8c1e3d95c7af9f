#include "mcprior/prior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcprior {

std::vector<std::pair<PriorCode, PriorCounter>> PriorTable::sorted_entries()
    const {
  std::vector<std::pair<PriorCode, PriorCounter>> out(counters_.begin(),
                                                      counters_.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void PriorTable::merge(const PriorTable& other) {
  if (!family.empty() && !other.family.empty() && family != other.family)
    throw DataError("prior merge: family mismatch ('" + family + "' vs '" +
                    other.family + "')");
  if (family.empty()) family = other.family;
  instances += other.instances;
  for (const auto& [code, c] : other.counters_) add(code, c.count, c.nb);
}

void PriorTable::validate() const {
  for (const auto& [code, c] : counters_) {
    if (c.nb == 0)
      throw DataError("prior table: code " + std::to_string(code) +
                      " has nb = 0");
    if (c.count > c.nb)
      throw DataError("prior table: code " + std::to_string(code) +
                      " has count > nb");
  }
}

PriorBias::PriorBias(const PriorTable& table, PriorBiasOptions opt)
    : opt_(opt) {
  if (opt_.tau < 0.0)
    throw DataError("prior bias: tau must be >= 0");
  if (!(opt_.frequency_floor > 0.0 && opt_.frequency_floor < 1.0))
    throw DataError("prior bias: frequency floor must be in (0, 1)");
  table.validate();
  double floor_bias = opt_.tau * std::log(opt_.frequency_floor);
  for (const auto& [code, c] : table.sorted_entries()) {
    BiasTerm t;
    if (c.count >= 1)
      t.value = opt_.tau * std::log(static_cast<double>(c.count) /
                                    static_cast<double>(c.nb));
    else if (opt_.hard_exclude_unplayed)
      t.excluded = true;
    else
      t.value = floor_bias;
    bias_.emplace(code, t);
  }
}

FrequencyHistogram frequency_histogram(const PriorTable& table,
                                       double bucket_width) {
  if (!(bucket_width > 0.0 && bucket_width <= 1.0))
    throw DataError("histogram: bucket width must be in (0, 1]");
  FrequencyHistogram h;
  h.bucket_width = bucket_width;
  auto nbuckets = static_cast<std::size_t>(std::ceil(1.0 / bucket_width));
  h.buckets.assign(nbuckets, 0);
  for (const auto& [code, c] : table.sorted_entries()) {
    (void)code;
    double f = static_cast<double>(c.count) / static_cast<double>(c.nb);
    ++h.total;
    if (f == 1.0) {
      ++h.exact_one;
      continue;
    }
    if (f == 0.0) ++h.exact_zero;
    auto i = static_cast<std::size_t>(f / bucket_width);
    if (i >= nbuckets) i = nbuckets - 1;
    ++h.buckets[i];
  }
  return h;
}

void save_prior(const PriorTable& table, const std::string& path) {
  table.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  char tau_buf[64];
  std::snprintf(tau_buf, sizeof tau_buf, "%.17g", table.tau);
  out << "#family " << table.family << "\n";
  out << "#instances " << table.instances << "\n";
  out << "#tau " << tau_buf << "\n";
  for (const auto& [code, c] : table.sorted_entries())
    out << code << ' ' << c.count << ' ' << c.nb << "\n";
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

PriorTable load_prior(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  PriorTable table;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      if (key == "#family") {
        ls >> table.family;  // may legitimately be empty
      } else if (key == "#instances") {
        if (!(ls >> table.instances)) fail("bad #instances value");
      } else if (key == "#tau") {
        if (!(ls >> table.tau)) fail("bad #tau value");
      } else {
        fail("unknown header '" + key + "'");
      }
      continue;
    }
    std::istringstream ls(line);
    PriorCode code;
    std::uint64_t count, nb;
    if (!(ls >> code >> count >> nb)) fail("expected '<code> <count> <nb>'");
    std::string extra;
    if (ls >> extra) fail("trailing content '" + extra + "'");
    if (nb == 0) fail("nb must be >= 1");
    if (count > nb) fail("count exceeds nb");
    if (table.find(code)) fail("duplicate code " + std::to_string(code));
    table.add(code, count, nb);
  }
  return table;
}

}  // namespace mcprior
