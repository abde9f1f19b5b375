#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gswmt/corpus.hpp"

namespace gswmt {

// Backoff-smoothed trigram language model with Witten-Bell discounting.
//
// Seen events get the discounted relative frequency c/(c+T) where T is the
// number of distinct continuations of the history; the leftover mass T/(c+T)
// is routed to unseen events through the backoff weight. Sentence-boundary
// markers <s> and </s> are added automatically; <unk> always carries the
// unigram unseen mass, so no query can score -inf.
class TrigramModel {
 public:
  struct Config {
    std::uint64_t min_count = 1;  // words below this map to <unk>
  };

  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  static TrigramModel train(const std::vector<TokenSeq>& sentences);
  static TrigramModel train(const std::vector<TokenSeq>& sentences, const Config& cfg);

  // log P(word | context), natural log. Context is the preceding words,
  // oldest first; at most the last two are used. Unknown words (in context
  // or predicted) are mapped to <unk>.
  double log_prob(std::span<const std::string> context, const std::string& word) const;

  // Sum of conditional log-probabilities for all words plus the end marker.
  double score_sentence(const TokenSeq& sentence) const;

  // exp(-(total logprob) / (total predicted tokens incl. end markers)).
  double perplexity(const std::vector<TokenSeq>& corpus) const;

  void save_arpa(const std::string& path) const;
  void save_arpa(std::ostream& out) const;
  static TrigramModel load_arpa(const std::string& path);
  static TrigramModel load_arpa(std::istream& in);

  // Every word the model can predict (<s> excluded).
  std::vector<std::string> predictable_vocabulary() const;

  std::size_t unigram_count() const { return id_to_word_.size(); }
  std::size_t bigram_count() const { return logp2_.size(); }
  std::size_t trigram_count() const { return logp3_.size(); }

 private:
  friend class TrigramBuilder;

  std::uint32_t id_or_unk(const std::string& w) const;
  double lp_uni(std::uint32_t w) const;
  double lp_bi(std::uint32_t u, std::uint32_t w) const;
  double lp_tri(std::uint32_t u, std::uint32_t v, std::uint32_t w) const;

  static std::uint64_t key2(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 21) | b;
  }
  static std::uint64_t key3(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    return (key2(a, b) << 21) | c;
  }

  std::vector<std::string> id_to_word_;
  std::unordered_map<std::string, std::uint32_t> word_to_id_;
  std::uint32_t bos_ = 0, eos_ = 1, unk_ = 2;

  std::vector<double> logp1_;    // per id; <s> holds a -99*ln(10) sentinel
  std::vector<double> logbow1_;  // per id, 0 when the word is no bigram history
  std::unordered_map<std::uint64_t, double> logp2_;
  std::unordered_map<std::uint64_t, double> logbow2_;
  std::unordered_map<std::uint64_t, double> logp3_;
};

}  // namespace gswmt
