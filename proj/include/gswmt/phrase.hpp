#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gswmt/align.hpp"
#include "gswmt/corpus.hpp"

namespace gswmt {

// One alignment-consistent phrase pair; links are re-indexed to the phrase.
struct PhrasePair {
  TokenSeq source;
  TokenSeq target;
  AlignmentLinks links;
};

// All consistent phrase pairs up to max_len words per side. Unaligned
// boundary target words extend the aligned block in the standard way;
// unaligned source boundary words are covered by enumerating all source
// spans.
std::vector<PhrasePair> extract_phrases(const SentencePair& pair, const AlignmentLinks& links,
                                        int max_len = 7);

struct PhraseOption {
  TokenSeq target;
  // log-probabilities
  double phi_tgt_src = 0.0;
  double phi_src_tgt = 0.0;
  double lex_tgt_src = 0.0;
  double lex_src_tgt = 0.0;
};

class PhraseTable {
 public:
  // phi scores are relative extraction frequencies; lexical weights follow
  // the max-over-linked-words convention, with NULL probability for
  // unaligned words. When the same pair is extracted with different internal
  // alignments, the best lexical weight is kept.
  static PhraseTable build(const std::vector<SentencePair>& pairs,
                           const std::vector<AlignmentLinks>& alignments,
                           const TranslationTable& forward,  // t(target|source)
                           const TranslationTable& reverse,  // t(source|target)
                           int max_len = 7);

  const std::vector<PhraseOption>* lookup(const TokenSeq& source_phrase) const;
  bool covers_word(const std::string& word) const { return source_words_.count(word) != 0; }
  std::size_t size() const;
  int max_source_len() const { return max_source_len_; }

  // `src ||| tgt ||| phi(t|s) phi(s|t) lex(t|s) lex(s|t)` with plain decimal
  // probabilities.
  void save(const std::string& path) const;
  static PhraseTable load(const std::string& path);

  const std::unordered_map<std::string, std::vector<PhraseOption>>& entries() const {
    return entries_;
  }

 private:
  std::unordered_map<std::string, std::vector<PhraseOption>> entries_;
  std::unordered_map<std::string, bool> source_words_;
  int max_source_len_ = 0;

  void index_source_words();
};

}  // namespace gswmt
