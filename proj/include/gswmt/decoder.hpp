#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gswmt/corpus.hpp"
#include "gswmt/lm.hpp"
#include "gswmt/phrase.hpp"

namespace gswmt {

struct FeatureWeights {
  double phi_tgt_src = 0.25;
  double phi_src_tgt = 0.25;
  double lex_tgt_src = 0.25;
  double lex_src_tgt = 0.25;
  double lm = 0.5;
  double word_penalty = 0.0;
  double phrase_penalty = 0.0;
  double distortion = 0.3;

  void save_tsv(const std::string& path) const;
  static FeatureWeights load_tsv(const std::string& path);
};

struct DecoderConfig {
  int beam = 100;             // histogram pruning per stack
  int distortion_limit = 4;   // max |jump|; negative means unlimited
  bool monotone = false;
  FeatureWeights weights;
};

struct TranslationResult {
  TokenSeq target;
  double score = 0.0;
};

// Beam-search stack decoder over phrase segmentations with a log-linear
// model. Source words no option covers become 1-word copy-through phrases
// with all translation features 0, so OOV words are copied, never deleted.
class Decoder {
 public:
  Decoder(const PhraseTable& table, const TrigramModel& lm, DecoderConfig config)
      : table_(table), lm_(lm), config_(std::move(config)) {}

  const DecoderConfig& config() const { return config_; }
  void set_weights(const FeatureWeights& w) { config_.weights = w; }

  TranslationResult translate(const TokenSeq& source) const;

  // Order-preserving; with threads > 1 sentences decode concurrently and the
  // output is identical to the serial run.
  std::vector<TokenSeq> translate_corpus(const std::vector<TokenSeq>& sentences,
                                         int threads = 1) const;

 private:
  TranslationResult decode(const TokenSeq& source, bool monotone) const;

  const PhraseTable& table_;
  const TrigramModel& lm_;
  DecoderConfig config_;
};

// Random-search weight tuning: evaluates the decoder's current weights plus
// (trials - 1) vectors sampled from fixed per-feature ranges, and returns the
// vector with the best dev BLEU (ties keep the earlier candidate).
FeatureWeights tune_weights(const PhraseTable& table, const TrigramModel& lm,
                            const DecoderConfig& base, const std::vector<SentencePair>& dev,
                            int trials, std::uint64_t seed, int threads = 1);

}  // namespace gswmt
