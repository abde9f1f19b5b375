#include "gswmt/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace gswmt {

double TranslationTable::prob(const std::string& target, const std::string& source) const {
  auto row = t.find(source);
  if (row == t.end()) return 0.0;
  auto it = row->second.find(target);
  return it == row->second.end() ? 0.0 : it->second;
}

void TranslationTable::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [src, row] : t)
    for (const auto& [tgt, p] : row) keys.emplace_back(src, tgt);
  std::sort(keys.begin(), keys.end());
  out << std::setprecision(12);
  for (const auto& [src, tgt] : keys) out << src << '\t' << tgt << '\t' << t.at(src).at(tgt) << '\n';
}

TranslationTable TranslationTable::load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  TranslationTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string src, tgt, prob;
    if (!std::getline(ss, src, '\t') || !std::getline(ss, tgt, '\t') || !std::getline(ss, prob, '\t'))
      throw std::runtime_error("bad translation table line " + std::to_string(lineno));
    table.t[src][tgt] = std::stod(prob);
  }
  return table;
}

Ibm1Result train_ibm1(const std::vector<SentencePair>& pairs, const Ibm1Config& cfg,
                      Direction direction) {
  if (pairs.empty()) throw std::runtime_error("cannot train alignment model on empty corpus");
  if (cfg.iterations < 1) throw std::runtime_error("alignment training needs at least 1 iteration");

  // Intern both sides; "source" below means the conditioning side.
  std::vector<std::vector<std::uint32_t>> src_sents(pairs.size()), tgt_sents(pairs.size());
  std::vector<std::string> src_words, tgt_words;
  std::unordered_map<std::string, std::uint32_t> src_ids, tgt_ids;
  const auto intern = [](const std::string& w, std::unordered_map<std::string, std::uint32_t>& ids,
                         std::vector<std::string>& words) {
    auto [it, inserted] = ids.emplace(w, static_cast<std::uint32_t>(words.size()));
    if (inserted) words.push_back(w);
    return it->second;
  };
  if (cfg.use_null) intern(TranslationTable::kNull, src_ids, src_words);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const TokenSeq& s = direction == Direction::SourceToTarget ? pairs[k].source : pairs[k].target;
    const TokenSeq& e = direction == Direction::SourceToTarget ? pairs[k].target : pairs[k].source;
    if (cfg.use_null) src_sents[k].push_back(0);  // NULL participates in every sentence
    for (const auto& w : s) src_sents[k].push_back(intern(w, src_ids, src_words));
    for (const auto& w : e) tgt_sents[k].push_back(intern(w, tgt_ids, tgt_words));
  }

  // Uniform initialization 1/|V_target| over co-occurring pairs. Restricting
  // to co-occurring pairs leaves the EM trajectory identical to a full
  // uniform table: everything else gets zero expected count in iteration 1.
  const double uniform = 1.0 / static_cast<double>(tgt_words.size());
  std::vector<std::unordered_map<std::uint32_t, double>> t(src_words.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    for (std::uint32_t f : src_sents[k])
      for (std::uint32_t e : tgt_sents[k]) t[f][e] = uniform;

  std::vector<double> ll_per_iter;
  std::vector<std::unordered_map<std::uint32_t, double>> counts(src_words.size());
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (auto& row : counts)
      for (auto& [e, c] : row) c = 0.0;
    double ll = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& fs = src_sents[k];
      const auto& es = tgt_sents[k];
      const double log_len = std::log(static_cast<double>(fs.size()));
      for (std::uint32_t e : es) {
        double z = 0.0;
        for (std::uint32_t f : fs) z += t[f][e];
        ll += std::log(z) - log_len;
        for (std::uint32_t f : fs) counts[f][e] += t[f][e] / z;
      }
    }
    ll_per_iter.push_back(ll);
    for (std::size_t f = 0; f < counts.size(); ++f) {
      double total = 0.0;
      for (const auto& [e, c] : counts[f]) total += c;
      if (total <= 0.0) continue;
      for (const auto& [e, c] : counts[f]) t[f][e] = c / total;
    }
  }

  Ibm1Result result;
  result.log_likelihood = std::move(ll_per_iter);
  for (std::size_t f = 0; f < t.size(); ++f)
    for (const auto& [e, p] : t[f]) result.table.t[src_words[f]][tgt_words[e]] = p;
  return result;
}

AlignmentLinks viterbi_align(const SentencePair& pair, const TranslationTable& table) {
  AlignmentLinks links;
  for (std::uint32_t j = 0; j < pair.target.size(); ++j) {
    const std::string& e = pair.target[j];
    // NULL is the incumbent, so it keeps exact ties (and words that never
    // co-occurred with anything stay unlinked); word-word ties fall to the
    // smallest source index via the strict comparison.
    double best = table.prob(e, TranslationTable::kNull);
    int best_i = -1;
    for (std::uint32_t i = 0; i < pair.source.size(); ++i) {
      const double p = table.prob(e, pair.source[i]);
      if (p > best) {
        best = p;
        best_i = static_cast<int>(i);
      }
    }
    if (best_i >= 0) links.emplace(static_cast<std::uint32_t>(best_i), j);
  }
  return links;
}

SymmetrizationHeuristic heuristic_from_string(const std::string& s) {
  if (s == "intersection") return SymmetrizationHeuristic::Intersection;
  if (s == "union") return SymmetrizationHeuristic::Union;
  if (s == "grow-diag") return SymmetrizationHeuristic::GrowDiag;
  throw std::runtime_error("unknown symmetrization heuristic: " + s);
}

AlignmentLinks symmetrize(const AlignmentLinks& forward, const AlignmentLinks& reverse,
                          SymmetrizationHeuristic heuristic) {
  AlignmentLinks inter, uni;
  std::set_intersection(forward.begin(), forward.end(), reverse.begin(), reverse.end(),
                        std::inserter(inter, inter.begin()));
  std::set_union(forward.begin(), forward.end(), reverse.begin(), reverse.end(),
                 std::inserter(uni, uni.begin()));
  switch (heuristic) {
    case SymmetrizationHeuristic::Intersection:
      return inter;
    case SymmetrizationHeuristic::Union:
      return uni;
    case SymmetrizationHeuristic::GrowDiag:
      break;
  }
  AlignmentLinks grown = inter;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [i, j] : uni) {  // std::set iterates row-major already
      if (grown.count({i, j})) continue;
      bool adjacent = false;
      for (int di = -1; di <= 1 && !adjacent; ++di) {
        for (int dj = -1; dj <= 1 && !adjacent; ++dj) {
          if (di == 0 && dj == 0) continue;
          const long ni = static_cast<long>(i) + di;
          const long nj = static_cast<long>(j) + dj;
          if (ni < 0 || nj < 0) continue;
          if (grown.count({static_cast<std::uint32_t>(ni), static_cast<std::uint32_t>(nj)}))
            adjacent = true;
        }
      }
      if (adjacent) {
        grown.emplace(i, j);
        changed = true;
      }
    }
  }
  return grown;
}

AlignmentLinks flip_links(const AlignmentLinks& links) {
  AlignmentLinks out;
  for (const auto& [i, j] : links) out.emplace(j, i);
  return out;
}

void save_alignments(const std::vector<AlignmentLinks>& alignments, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& links : alignments) {
    bool first = true;
    for (const auto& [i, j] : links) {
      if (!first) out << ' ';
      out << i << '-' << j;
      first = false;
    }
    out << '\n';
  }
}

std::vector<AlignmentLinks> load_alignments(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<AlignmentLinks> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    AlignmentLinks links;
    std::istringstream ss(line);
    std::string item;
    while (ss >> item) {
      const auto dash = item.find('-');
      if (dash == std::string::npos)
        throw std::runtime_error("bad alignment token: " + item);
      links.emplace(static_cast<std::uint32_t>(std::stoul(item.substr(0, dash))),
                    static_cast<std::uint32_t>(std::stoul(item.substr(dash + 1))));
    }
    out.push_back(std::move(links));
  }
  return out;
}

}  // namespace gswmt
