#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gswmt/charseq2seq.hpp"
#include "gswmt/corpus.hpp"
#include "gswmt/g2p.hpp"
#include "gswmt/rules.hpp"

namespace gswmt {

enum class NormalizationStrategy { Orth, Phon, Cbnmt, OrthThenPhon, CbnmtThenPhon };
NormalizationStrategy strategy_from_string(const std::string& s);
const char* to_string(NormalizationStrategy s);

enum class Resolution { KnownGSW, KnownDE, Unchanged };
const char* to_string(Resolution r);

struct NormalizationOutcome {
  std::string word;     // the original w
  std::string output;   // w' when replaced, otherwise w
  Resolution resolution = Resolution::Unchanged;
};

// Everything a normalization run may need. Strategies throw when the model
// they require is missing.
struct NormalizationModels {
  RuleSet rules;
  std::shared_ptr<const G2PModel> g2p;
  std::shared_ptr<const PhoneticIndex> gsw_index;
  std::shared_ptr<const PhoneticIndex> de_index;
  std::shared_ptr<const CharSeq2SeqModel> char_model;
};

// The out-of-vocabulary conversion procedure: produce w' via the strategy;
// a known GSW word replaces w, else a known DE word replaces w, else w stays.
// Combined strategies fall back to the second strategy only when the first
// one left the word unchanged.
NormalizationOutcome normalize_oov(const std::string& word, NormalizationStrategy strategy,
                                   const Vocabulary& gsw_vocab, const Vocabulary& de_vocab,
                                   const NormalizationModels& models);

struct SentenceNormalizer {
  NormalizationStrategy strategy = NormalizationStrategy::Orth;
  // Direct mode substitutes the char model's output without the vocabulary
  // checks (applies to the plain Cbnmt strategy only).
  bool cbnmt_direct = false;
};

// Tokens already in the GSW vocabulary and detached punctuation stay
// untouched; everything else runs through normalize_oov. Token count is
// preserved.
TokenSeq normalize_sentence(const TokenSeq& sentence, const SentenceNormalizer& mode,
                            const Vocabulary& gsw_vocab, const Vocabulary& de_vocab,
                            const NormalizationModels& models);

}  // namespace gswmt
