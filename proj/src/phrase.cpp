#include "gswmt/phrase.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gswmt {

std::vector<PhrasePair> extract_phrases(const SentencePair& pair, const AlignmentLinks& links,
                                        int max_len) {
  std::vector<PhrasePair> out;
  if (links.empty() || max_len < 1) return out;
  const int slen = static_cast<int>(pair.source.size());
  const int tlen = static_cast<int>(pair.target.size());

  std::vector<bool> tgt_aligned(tlen, false);
  for (const auto& [i, j] : links) tgt_aligned[j] = true;

  for (int i1 = 0; i1 < slen; ++i1) {
    for (int i2 = i1; i2 < std::min(slen, i1 + max_len); ++i2) {
      // Project the source span onto the target side.
      int j1 = tlen, j2 = -1;
      for (const auto& [i, j] : links) {
        if (static_cast<int>(i) >= i1 && static_cast<int>(i) <= i2) {
          j1 = std::min(j1, static_cast<int>(j));
          j2 = std::max(j2, static_cast<int>(j));
        }
      }
      if (j2 < 0) continue;  // no link inside the span
      // Consistency: everything linked to [j1,j2] must lie inside [i1,i2].
      bool consistent = true;
      for (const auto& [i, j] : links) {
        if (static_cast<int>(j) >= j1 && static_cast<int>(j) <= j2 &&
            (static_cast<int>(i) < i1 || static_cast<int>(i) > i2)) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;
      // Extend over unaligned boundary target words.
      for (int jj1 = j1; jj1 >= 0 && (jj1 == j1 || !tgt_aligned[jj1]); --jj1) {
        for (int jj2 = j2; jj2 < tlen && (jj2 == j2 || !tgt_aligned[jj2]); ++jj2) {
          if (jj2 - jj1 + 1 > max_len) break;
          PhrasePair pp;
          pp.source.assign(pair.source.begin() + i1, pair.source.begin() + i2 + 1);
          pp.target.assign(pair.target.begin() + jj1, pair.target.begin() + jj2 + 1);
          for (const auto& [i, j] : links) {
            if (static_cast<int>(i) >= i1 && static_cast<int>(i) <= i2 &&
                static_cast<int>(j) >= jj1 && static_cast<int>(j) <= jj2)
              pp.links.emplace(i - i1, j - jj1);
          }
          out.push_back(std::move(pp));
        }
      }
    }
  }
  return out;
}

namespace {

std::string join(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Standard lexical weight with max over linked words: for every target word,
// take the best t(e|f) among its linked source words (NULL for unaligned).
double lexical_weight(const TokenSeq& cond, const TokenSeq& pred, const AlignmentLinks& links,
                      const TranslationTable& table, bool pred_is_target) {
  double lw = 1.0;
  for (std::uint32_t p = 0; p < pred.size(); ++p) {
    double best = -1.0;
    for (const auto& [i, j] : links) {
      const std::uint32_t pred_idx = pred_is_target ? j : i;
      const std::uint32_t cond_idx = pred_is_target ? i : j;
      if (pred_idx != p) continue;
      best = std::max(best, table.prob(pred[p], cond[cond_idx]));
    }
    if (best < 0.0) best = table.prob(pred[p], TranslationTable::kNull);
    lw *= best;
  }
  return lw;
}

}  // namespace

PhraseTable PhraseTable::build(const std::vector<SentencePair>& pairs,
                               const std::vector<AlignmentLinks>& alignments,
                               const TranslationTable& forward, const TranslationTable& reverse,
                               int max_len) {
  if (pairs.size() != alignments.size())
    throw std::runtime_error("phrase extraction: " + std::to_string(pairs.size()) +
                             " sentence pairs but " + std::to_string(alignments.size()) +
                             " alignments");

  struct Cell {
    std::uint64_t count = 0;
    double lex_ts = 0.0;
    double lex_st = 0.0;
    TokenSeq target;
  };
  // Ordered maps keep score computation and output deterministic.
  std::map<std::string, std::map<std::string, Cell>> by_source;
  std::map<std::string, std::uint64_t> src_totals, tgt_totals;

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (const auto& pp : extract_phrases(pairs[k], alignments[k], max_len)) {
      const std::string skey = join(pp.source);
      const std::string tkey = join(pp.target);
      Cell& cell = by_source[skey][tkey];
      cell.count++;
      cell.target = pp.target;
      cell.lex_ts = std::max(cell.lex_ts, lexical_weight(pp.source, pp.target, pp.links, forward, true));
      cell.lex_st = std::max(cell.lex_st, lexical_weight(pp.target, pp.source, pp.links, reverse, false));
      src_totals[skey]++;
      tgt_totals[tkey]++;
    }
  }

  PhraseTable table;
  for (const auto& [skey, row] : by_source) {
    std::vector<PhraseOption>& options = table.entries_[skey];
    for (const auto& [tkey, cell] : row) {
      PhraseOption opt;
      opt.target = cell.target;
      opt.phi_tgt_src = std::log(static_cast<double>(cell.count) / static_cast<double>(src_totals[skey]));
      opt.phi_src_tgt = std::log(static_cast<double>(cell.count) / static_cast<double>(tgt_totals[tkey]));
      // Lexical weights can hit exact zero (no NULL mass for an unaligned
      // word); floor them so log-linear scores stay finite.
      opt.lex_tgt_src = std::log(std::max(cell.lex_ts, 1e-12));
      opt.lex_src_tgt = std::log(std::max(cell.lex_st, 1e-12));
      options.push_back(std::move(opt));
    }
  }
  table.index_source_words();
  return table;
}

void PhraseTable::index_source_words() {
  source_words_.clear();
  max_source_len_ = 0;
  for (const auto& [skey, options] : entries_) {
    std::istringstream ss(skey);
    std::string w;
    int len = 0;
    while (ss >> w) {
      source_words_[w] = true;
      ++len;
    }
    max_source_len_ = std::max(max_source_len_, len);
  }
}

const std::vector<PhraseOption>* PhraseTable::lookup(const TokenSeq& source_phrase) const {
  auto it = entries_.find(join(source_phrase));
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t PhraseTable::size() const {
  std::size_t n = 0;
  for (const auto& [skey, options] : entries_) n += options.size();
  return n;
}

void PhraseTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::vector<std::string> keys;
  keys.reserve(entries_.size());
  for (const auto& [skey, options] : entries_) keys.push_back(skey);
  std::sort(keys.begin(), keys.end());
  out << std::setprecision(12);
  for (const auto& skey : keys) {
    for (const auto& opt : entries_.at(skey)) {
      out << skey << " ||| " << join(opt.target) << " ||| " << std::exp(opt.phi_tgt_src) << ' '
          << std::exp(opt.phi_src_tgt) << ' ' << std::exp(opt.lex_tgt_src) << ' '
          << std::exp(opt.lex_src_tgt) << '\n';
    }
  }
}

PhraseTable PhraseTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  PhraseTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string sep = " ||| ";
    const auto p1 = line.find(sep);
    const auto p2 = p1 == std::string::npos ? std::string::npos : line.find(sep, p1 + sep.size());
    if (p2 == std::string::npos)
      throw std::runtime_error("bad phrase table line " + std::to_string(lineno));
    const std::string skey = line.substr(0, p1);
    const std::string tkey = line.substr(p1 + sep.size(), p2 - p1 - sep.size());
    std::istringstream scores(line.substr(p2 + sep.size()));
    double pts, pst, lts, lst;
    if (!(scores >> pts >> pst >> lts >> lst))
      throw std::runtime_error("bad phrase table scores at line " + std::to_string(lineno));
    PhraseOption opt;
    std::istringstream ts(tkey);
    std::string w;
    while (ts >> w) opt.target.push_back(w);
    opt.phi_tgt_src = std::log(std::max(pts, 1e-12));
    opt.phi_src_tgt = std::log(std::max(pst, 1e-12));
    opt.lex_tgt_src = std::log(std::max(lts, 1e-12));
    opt.lex_src_tgt = std::log(std::max(lst, 1e-12));
    table.entries_[skey].push_back(std::move(opt));
  }
  table.index_source_words();
  return table;
}

}  // namespace gswmt
